#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fastmr/parallel.hpp"
#include "fastmr/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fastmr — fast mean-reverting stochastic volatility portfolio experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t threads = 0;
    bool deep = false;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--seed", seed, "master seed (overrides the config)")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--threads", threads, "worker threads (0 = hardware default)");
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_flag("--deep", deep, "run the slower, higher-resolution variants");

    const char* names[] = {"check", "stationary", "spde", "portfolio",
                           "rates-small", "weak-large", "report"};
    const char* descriptions[] = {
        "evaluate the recurrence and Feller conditions",
        "estimate stationary moments and limit correlations",
        "solve the conditional density / survival fields and their energy balance",
        "simulate conditional portfolio loss curves",
        "small vol-of-vol convergence rates (vol path; fields with --deep)",
        "large vol-of-vol weak convergence study (strong plateau with --deep)",
        "human-readable summary report"};
    // fallthrough lets the global flags appear after the subcommand name
    for (std::size_t i = 0; i < 7; ++i) app.add_subcommand(names[i], descriptions[i])->fallthrough();

    // per-subcommand numerics overrides for the SPDE solver
    auto* spde = app.get_subcommand("spde");
    // free the short -h so the --h volatility override can be registered
    spde->set_help_flag("--help", "print this help message and exit");
    double o_dx = -1, o_dt = -1, o_xmax = -1, o_T = -1, o_rho1 = -1, o_h = -1;
    spde->add_option("--dx", o_dx, "spatial step");
    spde->add_option("--dt", o_dt, "time step");
    spde->add_option("--xmax", o_xmax, "domain truncation");
    spde->add_option("--T", o_T, "horizon");
    spde->add_option("--rho1", o_rho1, "asset-market correlation");
    spde->add_option("--h", o_h, "constant volatility level (switches h to constant)");

    CLI11_PARSE(app, argc, argv);

    fastmr::set_worker_threads(threads);

    fastmr::ExperimentConfig cfg;
    try {
        if (!config_path.empty()) cfg = fastmr::load_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return fastmr::kExitValidation;
    }
    if (seed_set) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (o_dx > 0) cfg.numerics.dx = o_dx;
    if (o_dt > 0) cfg.numerics.dt = o_dt;
    if (o_xmax > 0) cfg.numerics.x_max = o_xmax;
    if (o_T > 0) cfg.market.horizon = o_T;
    if (o_rho1 >= 0) cfg.coeffs.rho1 = o_rho1;
    if (o_h >= 0) {
        cfg.spec.h_kind = fastmr::HKind::Constant;
        cfg.spec.h_const = o_h;
    }

    fastmr::RunOptions opts;
    opts.subcommand = app.get_subcommands().front()->get_name();
    opts.deep = deep;
    return fastmr::run_experiment(cfg, opts, std::cout);
}
