#include "fastmr/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "fastmr/asymptotics.hpp"
#include "fastmr/ergodic.hpp"
#include "fastmr/parallel.hpp"
#include "fastmr/spde.hpp"

namespace fastmr {

namespace {
std::atomic<std::size_t> g_worker_threads{0};
}

void set_worker_threads(std::size_t n) { g_worker_threads.store(n); }
std::size_t worker_threads() { return g_worker_threads.load(); }

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct OutputSink {
    fs::path dir;
    RunManifest manifest;
    Clock::time_point start = Clock::now();

    void write_csv(const std::string& name, const CsvTable& table) {
        const auto path = (dir / name).string();
        write_text_file(path, table.render());
        manifest.file_checksums[name] = file_checksum(path);
    }

    void mark(const std::string& phase) {
        manifest.timings_seconds[phase] =
            std::chrono::duration<double>(Clock::now() - start).count();
    }

    void finish(bool complete) {
        manifest.complete = complete;
        write_text_file((dir / "manifest.json").string(), manifest.render_json());
    }
};

std::vector<std::string> base_metadata(const ExperimentConfig& cfg) {
    return {"seed=" + std::to_string(cfg.seed),
            "config_hash=" + std::to_string(fnv1a(cfg.canonical_text())),
            "tool_version=" + std::string(kToolVersion)};
}

VolScheme pick_scheme(const VolFunctionSpec& spec) {
    if (spec.g_kind == GKind::ConstantOne) return VolScheme::ExactOu;
    if (spec.g_cir_like()) return VolScheme::FullTruncationEuler;
    return VolScheme::Euler;
}

// ---- check ------------------------------------------------------------

int run_check(const ExperimentConfig& cfg, OutputSink& sink, std::ostream& log) {
    std::vector<std::pair<std::string, ConditionReport>> results;
    if (cfg.spec.g_differentiable()) {
        results.emplace_back("recurrence_drift", check_recurrence_drift(cfg.coeffs, cfg.spec));
    } else {
        results.emplace_back("recurrence_sqrt", check_recurrence_sqrt({cfg.coeffs}, 0.0));
    }
    ConditionReport feller;
    feller.holds = check_feller(cfg.coeffs);
    feller.detail = feller.holds ? "2 kappa theta >= xi^2" : "2 kappa theta < xi^2";
    results.emplace_back("feller", feller);

    CsvTable t;
    t.metadata = base_metadata(cfg);
    t.header = {"condition", "holds", "detail"};
    bool all_hold = true;
    for (const auto& [name, rep] : results) {
        t.rows.push_back({name, rep.holds ? "1" : "0", rep.detail});
        log << name << ": " << (rep.holds ? "holds" : "FAILS") << " — " << rep.detail << "\n";
        all_hold = all_hold && rep.holds;
    }
    sink.write_csv("checks.csv", t);
    return all_hold ? kExitOk : kExitBand;
}

// ---- stationary ---------------------------------------------------------

int run_stationary(const ExperimentConfig& cfg, bool deep, OutputSink& sink, std::ostream& log) {
    ErgodicConfig ec;
    ec.coeffs = cfg.coeffs;
    ec.spec = cfg.spec;
    ec.horizon = cfg.numerics.T;
    ec.burn_in = cfg.numerics.burn_in;
    ec.dt = cfg.numerics.dt;
    ec.seed = cfg.seed;
    ec.n_replicas = deep ? 8 : 1;
    const StationaryMoments m = estimate_stationary_moments(ec);
    const LimitCorrelations lc = derive_limit_correlations(m, cfg.coeffs.rho1);

    CsvTable t;
    t.metadata = base_metadata(cfg);
    t.metadata.push_back("horizon=" + csv_format(m.horizon));
    t.metadata.push_back("burn_in=" + csv_format(m.burn_in));
    t.header = {"quantity", "estimate", "std_error", "T", "burn_in", "seed"};
    auto add = [&](const std::string& name, const Estimate& e) {
        t.rows.push_back({name, csv_format(e.value), csv_format(e.std_error),
                          csv_format(m.horizon), csv_format(m.burn_in),
                          std::to_string(cfg.seed)});
        log << name << " = " << e.value << " (se " << e.std_error << ")\n";
    };
    add("sigma11", m.sigma11);
    add("sigma21", m.sigma21);
    add("sigma_tilde", m.sigma_tilde);
    add("rho_tilde", lc.rho_tilde);
    add("rho_prime", lc.rho_prime);
    sink.write_csv("stationary.csv", t);
    return kExitOk;
}

// ---- spde ---------------------------------------------------------------

int run_spde(const ExperimentConfig& cfg, bool deep, OutputSink& sink, std::ostream& log) {
    const double T = cfg.market.horizon;
    const double dt = cfg.numerics.dt;
    const auto n_steps = static_cast<std::size_t>(std::llround(T / dt));
    if (std::abs(dt * static_cast<double>(n_steps) - T) > 1e-9)
        throw std::invalid_argument("market.T must be a multiple of numerics.dt");

    const NoiseBundle bundle(cfg.seed, dt, n_steps, cfg.market.rho3);
    RandomStream init = bundle.init_stream(0);
    const CoefficientVector scaled = cfg.regime.apply(cfg.coeffs);
    const double sigma0 = cfg.market.stationary_vol_init
                              ? sample_stationary_vol(scaled, cfg.spec, init)
                              : cfg.coeffs.theta;
    const VolPath vp =
        simulate_vol(cfg.coeffs, cfg.spec, cfg.regime, bundle, 0, pick_scheme(cfg.spec), sigma0);
    std::vector<double> h_values(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) h_values[k] = cfg.spec.h(vp.values[k]);

    SpdeParams sp;
    sp.grid = {cfg.numerics.dx, cfg.numerics.x_max};
    sp.dt = dt;
    sp.r = cfg.coeffs.r;
    sp.rho1 = cfg.coeffs.rho1;
    const SpdeField u = solve_density(rayleigh_u0(sp.grid, cfg.market.beta), h_values,
                                      bundle.systemic_w0(), sp);
    const SpdeField v = solve_survival(rayleigh_v0(sp.grid, cfg.market.beta), h_values,
                                       bundle.systemic_w0(), sp);
    const std::vector<double> resid = energy_residual(u);
    const std::vector<double> loss_u = u.loss_curve();
    const std::vector<double> loss_v = v.loss_curve();

    // thin the per-step diagnostics to ~1000 rows
    const std::size_t stride = std::max<std::size_t>(1, n_steps / 1000);
    CsvTable t;
    t.metadata = base_metadata(cfg);
    t.header = {"t", "mass", "norm2", "grad_norm2", "energy_residual", "loss_density",
                "loss_survival"};
    double max_resid = 0.0;
    for (std::size_t k = 0; k <= n_steps; ++k) {
        max_resid = std::max(max_resid, std::abs(resid[k]));
        if (k % stride == 0 || k == n_steps)
            t.add_row({u.t_grid[k], u.mass[k], u.norm2[k], u.grad_norm2[k], resid[k], loss_u[k],
                       loss_v[k]});
    }
    sink.write_csv("spde.csv", t);
    log << "max energy residual " << max_resid << ", final loss (density) " << loss_u.back()
        << ", final loss (survival) " << loss_v.back() << "\n";
    if (deep) {
        const auto dump = (sink.dir / "vol_path.bin").string();
        write_path_dump(dump, cfg.seed, dt, vp.values);
        sink.manifest.file_checksums["vol_path.bin"] = file_checksum(dump);
    }
    return kExitOk;
}

// ---- portfolio ------------------------------------------------------------

int run_portfolio(const ExperimentConfig& cfg, OutputSink& sink, std::ostream& log) {
    const double T = cfg.market.horizon;
    const double dt = cfg.numerics.dt;
    const auto n_steps = static_cast<std::size_t>(std::llround(T / dt));
    if (std::abs(dt * static_cast<double>(n_steps) - T) > 1e-9)
        throw std::invalid_argument("market.T must be a multiple of numerics.dt");

    const std::size_t stride = std::max<std::size_t>(1, n_steps / 50);
    std::vector<double> t_grid;
    for (std::size_t k = stride; k <= n_steps; k += stride)
        t_grid.push_back(dt * static_cast<double>(k));

    PortfolioParams pp;
    pp.coeffs = cfg.coeffs;
    pp.spec = cfg.spec;
    pp.regime = cfg.regime;
    pp.market = cfg.market;
    pp.n_inner = cfg.numerics.n_inner;

    std::vector<std::vector<LossSample>> curves(cfg.numerics.n_outer);
    parallel_for(cfg.numerics.n_outer, [&](std::size_t j) {
        const NoiseBundle bundle(mix_key(cfg.seed, 0x0F0ULL, j), dt, n_steps, cfg.market.rho3);
        curves[j] = simulate_portfolio_loss(pp, bundle, t_grid);
    });

    CsvTable t;
    t.metadata = base_metadata(cfg);
    t.metadata.push_back("n_inner=" + std::to_string(pp.n_inner));
    t.header = {"outer_id", "t", "loss"};
    double mean_final = 0.0;
    for (std::size_t j = 0; j < curves.size(); ++j) {
        for (const auto& s : curves[j])
            t.add_row({static_cast<double>(j), s.t, s.conditional_loss});
        mean_final += curves[j].back().conditional_loss;
    }
    sink.write_csv("portfolio.csv", t);
    log << "mean final conditional loss " << mean_final / static_cast<double>(curves.size())
        << " over " << curves.size() << " systemic draws\n";
    return kExitOk;
}

// ---- rates-small ------------------------------------------------------------

CsvTable rate_table(const ExperimentConfig& cfg, const RateReport& rep) {
    CsvTable t;
    t.metadata = base_metadata(cfg);
    t.metadata.push_back("slope=" + csv_format(rep.fit.slope));
    t.metadata.push_back("intercept=" + csv_format(rep.fit.intercept));
    t.metadata.push_back("r2=" + csv_format(rep.fit.r2));
    t.metadata.push_back(std::string("coupling=") + rep.coupling);
    t.header = {"eps", "error", "std_error"};
    for (const auto& p : rep.points) t.add_row({p.eps, p.error, p.std_error});
    return t;
}

int run_rates_small(const ExperimentConfig& cfg, bool deep, OutputSink& sink, std::ostream& log) {
    VolRateConfig vc;
    vc.coeffs = cfg.coeffs;
    vc.spec = cfg.spec;
    vc.eps_grid = cfg.numerics.eps_grid;
    vc.t = cfg.numerics.T;
    vc.n_paths = cfg.numerics.n_outer;
    vc.seed = cfg.seed;
    const RateReport vol_rate = small_volvol_vol_rate(vc);
    sink.write_csv("rates_small_vol.csv", rate_table(cfg, vol_rate));
    log << "vol-rate slope " << vol_rate.fit.slope << " (target O(eps): [0.8, 1.2])\n";
    sink.mark("vol_rate");

    int code = (vol_rate.fit.slope >= 0.8 && vol_rate.fit.slope <= 1.2) ? kExitOk : kExitBand;
    if (!deep) return code;

    FieldStudyConfig fc;
    fc.coeffs = cfg.coeffs;
    fc.spec = cfg.spec;
    fc.market = cfg.market;
    fc.grid = {cfg.numerics.dx, cfg.numerics.x_max};
    fc.eps_grid = cfg.numerics.eps_grid;
    fc.T = cfg.numerics.T;
    fc.n_outer = cfg.numerics.n_outer;
    fc.seed = cfg.seed;
    const FieldStudyResult study = small_volvol_field_study(fc);
    sink.write_csv("rates_small_field.csv", rate_table(cfg, study.h1_rate));
    sink.mark("field_rate");

    const double x_level = median_limit_survival(study);
    const RateReport loss_rate = loss_probability_error(study, x_level);
    CsvTable lt = rate_table(cfg, loss_rate);
    lt.metadata.push_back("x_level=" + csv_format(x_level));
    sink.write_csv("rates_small_loss.csv", lt);
    log << "field H1 slope " << study.h1_rate.fit.slope << " (target >= 0.4), loss-probability "
        << "decay " << loss_rate.fit.slope << " (target >= 0.3) at level " << x_level << "\n";
    if (study.h1_rate.fit.slope < 0.4 || !study.h1_rate.monotone_ok ||
        loss_rate.fit.slope < 0.3)
        code = kExitBand;
    return code;
}

// ---- weak-large ------------------------------------------------------------

int run_weak_large(const ExperimentConfig& cfg, bool deep, OutputSink& sink, std::ostream& log) {
    if (cfg.market.rho3 != 0.0)
        throw std::invalid_argument("weak-large requires market.rho3 = 0");

    ErgodicConfig ec;
    ec.coeffs = cfg.coeffs;
    ec.spec = cfg.spec;
    ec.horizon = 200.0;
    ec.dt = 0.005;
    ec.seed = mix_key(cfg.seed, 0xE60ULL);
    ec.n_replicas = 4;
    const StationaryMoments moments = estimate_stationary_moments(ec);
    sink.mark("moments");

    LargeStudyConfig lc;
    lc.coeffs = cfg.coeffs;
    lc.spec = cfg.spec;
    lc.market = cfg.market;
    lc.eps_grid = cfg.numerics.eps_grid;
    lc.n_outer = cfg.numerics.n_outer;
    lc.n_inner = cfg.numerics.n_inner;
    lc.t = cfg.numerics.T;
    lc.seed = cfg.seed;
    lc.moments = moments;

    const WeakStudyResult weak = weak_convergence_study(lc);
    CsvTable t;
    t.metadata = base_metadata(cfg);
    t.metadata.push_back("floor_ks=" + csv_format(weak.floor.statistic));
    t.metadata.push_back("sigma21=" + csv_format(moments.sigma21.value));
    t.metadata.push_back("rho_tilde=" +
                         csv_format(cfg.coeffs.rho1 * moments.sigma_tilde.value /
                                    moments.sigma21.value));
    t.header = {"eps", "error", "std_error"};
    for (const auto& p : weak.points)
        t.add_row({p.eps, p.ks.statistic, 0.25 * (p.ks.band_hi - p.ks.band_lo)});
    sink.write_csv("weak_large.csv", t);
    CsvTable bands;
    bands.metadata = base_metadata(cfg);
    bands.header = {"eps", "ks", "band_lo", "band_hi"};
    for (const auto& p : weak.points)
        bands.add_row({p.eps, p.ks.statistic, p.ks.band_lo, p.ks.band_hi});
    sink.write_csv("weak_large_bands.csv", bands);
    sink.mark("weak_study");

    const double last = weak.points.back().ks.statistic;
    const double floor = weak.floor.statistic;
    log << "KS at smallest eps " << last << ", null floor " << floor << ", nonincreasing "
        << (weak.nonincreasing_within_bands ? "yes" : "NO") << "\n";
    int code = (weak.nonincreasing_within_bands && last < 2.0 * floor) ? kExitOk : kExitBand;

    if (deep) {
        const PlateauResult plateau = strong_failure_study(lc);
        CsvTable pt;
        pt.metadata = base_metadata(cfg);
        pt.metadata.push_back("floor_rms=" + csv_format(plateau.floor));
        pt.metadata.push_back("ratio_at_smallest=" + csv_format(plateau.ratio_at_smallest));
        pt.header = {"eps", "error", "std_error"};
        for (const auto& p : plateau.distances) pt.add_row({p.eps, p.error, p.std_error});
        sink.write_csv("strong_plateau.csv", pt);
        log << "strong-coupling distance at smallest eps = " << plateau.ratio_at_smallest
            << "x the noise floor\n";
        sink.mark("plateau_study");
    }
    return code;
}

// ---- report ------------------------------------------------------------

int run_report(const ExperimentConfig& cfg, bool deep, OutputSink& sink, std::ostream& log) {
    std::ostringstream body;
    body << "fastmr run report (tool " << kToolVersion << ")\n\n";
    body << "configuration\n-------------\n" << cfg.canonical_text() << "\n";

    body << "conditions\n----------\n";
    bool all_hold = true;
    if (cfg.spec.g_differentiable()) {
        const auto rep = check_recurrence_drift(cfg.coeffs, cfg.spec);
        body << "recurrence (drift): " << (rep.holds ? "holds" : "FAILS") << " — " << rep.detail
             << "\n";
        all_hold = all_hold && rep.holds;
    } else {
        const auto rep = check_recurrence_sqrt({cfg.coeffs}, 0.0);
        body << "recurrence (sqrt): " << (rep.holds ? "holds" : "FAILS") << " — " << rep.detail
             << "\n";
        all_hold = all_hold && rep.holds;
    }
    const bool feller = check_feller(cfg.coeffs);
    body << "Feller: " << (feller ? "holds" : "FAILS") << "\n\n";

    ErgodicConfig ec;
    ec.coeffs = cfg.coeffs;
    ec.spec = cfg.spec;
    ec.horizon = deep ? cfg.numerics.T : std::min(cfg.numerics.T, 100.0);
    ec.dt = std::min(cfg.numerics.dt, 0.01);
    ec.seed = cfg.seed;
    ec.skip_recurrence_check = !all_hold;
    const StationaryMoments m = estimate_stationary_moments(ec);
    const LimitCorrelations lcorr = derive_limit_correlations(m, cfg.coeffs.rho1);
    body << "stationary moments (horizon " << ec.horizon << ")\n------------------\n";
    body << "sigma11     = " << m.sigma11.value << " (se " << m.sigma11.std_error << ")\n";
    body << "sigma21     = " << m.sigma21.value << " (se " << m.sigma21.std_error << ")\n";
    body << "sigma_tilde = " << m.sigma_tilde.value << " (se " << m.sigma_tilde.std_error << ")\n";
    body << "rho_tilde   = " << lcorr.rho_tilde.value << " (weak-limit correlation)\n";
    body << "rho_prime   = " << lcorr.rho_prime.value << " (strong-coupling plateau)\n";

    const std::string text = body.str();
    write_text_file((sink.dir / "report.txt").string(), text);
    sink.manifest.file_checksums["report.txt"] = file_checksum((sink.dir / "report.txt").string());
    log << text;
    return all_hold && feller ? kExitOk : kExitBand;
}

} // namespace

int run_experiment(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log) {
    OutputSink sink;
    sink.dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(sink.dir, ec);
    sink.manifest.tool_version = kToolVersion;
    sink.manifest.subcommand = opts.subcommand;
    sink.manifest.seed = cfg.seed;
    sink.manifest.config_hash = fnv1a(cfg.canonical_text());

    int code = kExitOk;
    try {
        cfg.validate();
        if (opts.subcommand == "check") code = run_check(cfg, sink, log);
        else if (opts.subcommand == "stationary") code = run_stationary(cfg, opts.deep, sink, log);
        else if (opts.subcommand == "spde") code = run_spde(cfg, opts.deep, sink, log);
        else if (opts.subcommand == "portfolio") code = run_portfolio(cfg, sink, log);
        else if (opts.subcommand == "rates-small") code = run_rates_small(cfg, opts.deep, sink, log);
        else if (opts.subcommand == "weak-large") code = run_weak_large(cfg, opts.deep, sink, log);
        else if (opts.subcommand == "report") code = run_report(cfg, opts.deep, sink, log);
        else throw std::invalid_argument("unknown subcommand: " + opts.subcommand);
    } catch (const CflError& e) {
        log << "numerical failure: " << e.what() << " (suggested dt " << e.suggested_dt << ")\n";
        sink.mark("total");
        sink.finish(false);
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        log << "validation failure: " << e.what() << "\n";
        sink.mark("total");
        sink.finish(false);
        return kExitValidation;
    } catch (const std::exception& e) {
        log << "numerical failure: " << e.what() << "\n";
        sink.mark("total");
        sink.finish(false);
        return kExitNumerical;
    }
    sink.mark("total");
    sink.finish(true);
    return code;
}

} // namespace fastmr
