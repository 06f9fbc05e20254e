#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fastmr/asymptotics.hpp"
#include "fastmr/config.hpp"
#include "fastmr/ergodic.hpp"
#include "fastmr/parallel.hpp"
#include "fastmr/runner.hpp"
#include "fastmr/spde.hpp"

namespace py = pybind11;
using namespace fastmr;

PYBIND11_MODULE(_fastmr, m) {
    m.doc() = "fast mean-reverting stochastic volatility portfolio models";
    m.attr("__version__") = kToolVersion;

    py::enum_<GKind>(m, "GKind")
        .value("constant_one", GKind::ConstantOne)
        .value("cir_sqrt", GKind::CirSqrt)
        .value("damped_sqrt", GKind::DampedSqrt)
        .value("tanh_shifted", GKind::TanhShifted);
    py::enum_<HKind>(m, "HKind")
        .value("identity", HKind::Identity)
        .value("sqrt_abs", HKind::SqrtAbs)
        .value("bounded_sigmoid", HKind::BoundedSigmoid)
        .value("constant", HKind::Constant);
    py::enum_<RegimeKind>(m, "RegimeKind")
        .value("unscaled", RegimeKind::Unscaled)
        .value("large_vol_of_vol", RegimeKind::LargeVolOfVol)
        .value("small_vol_of_vol", RegimeKind::SmallVolOfVol);
    py::enum_<VolScheme>(m, "VolScheme")
        .value("euler", VolScheme::Euler)
        .value("full_truncation_euler", VolScheme::FullTruncationEuler)
        .value("exact_ou", VolScheme::ExactOu);

    py::class_<CoefficientVector>(m, "CoefficientVector")
        .def(py::init<>())
        .def_readwrite("r", &CoefficientVector::r)
        .def_readwrite("rho1", &CoefficientVector::rho1)
        .def_readwrite("rho2", &CoefficientVector::rho2)
        .def_readwrite("kappa", &CoefficientVector::kappa)
        .def_readwrite("theta", &CoefficientVector::theta)
        .def_readwrite("xi", &CoefficientVector::xi)
        .def("validate", &CoefficientVector::validate);

    py::class_<VolFunctionSpec>(m, "VolFunctionSpec")
        .def(py::init<>())
        .def_readwrite("g_kind", &VolFunctionSpec::g_kind)
        .def_readwrite("g_cg", &VolFunctionSpec::g_cg)
        .def_readwrite("g_steepness", &VolFunctionSpec::g_steepness)
        .def_readwrite("g_base", &VolFunctionSpec::g_base)
        .def_readwrite("g_amplitude", &VolFunctionSpec::g_amplitude)
        .def_readwrite("h_kind", &VolFunctionSpec::h_kind)
        .def_readwrite("h_min", &VolFunctionSpec::h_min)
        .def_readwrite("h_max", &VolFunctionSpec::h_max)
        .def_readwrite("h_const", &VolFunctionSpec::h_const)
        .def("validate", &VolFunctionSpec::validate)
        .def("g", &VolFunctionSpec::g)
        .def("h", &VolFunctionSpec::h);

    py::class_<ScalingRegime>(m, "ScalingRegime")
        .def(py::init<>())
        .def_readwrite("kind", &ScalingRegime::kind)
        .def_readwrite("epsilon", &ScalingRegime::epsilon)
        .def_static("unscaled", &ScalingRegime::unscaled)
        .def_static("large", &ScalingRegime::large)
        .def_static("small", &ScalingRegime::small)
        .def("apply", &ScalingRegime::apply);

    py::class_<MarketConfig>(m, "MarketConfig")
        .def(py::init<>())
        .def_readwrite("rho3", &MarketConfig::rho3)
        .def_readwrite("beta", &MarketConfig::beta)
        .def_readwrite("horizon", &MarketConfig::horizon)
        .def_readwrite("stationary_vol_init", &MarketConfig::stationary_vol_init);

    py::class_<ConditionReport>(m, "ConditionReport")
        .def_readonly("holds", &ConditionReport::holds)
        .def_readonly("detail", &ConditionReport::detail)
        .def_readonly("first_violation", &ConditionReport::first_violation);

    m.def("check_recurrence_drift",
          [](const CoefficientVector& c, const VolFunctionSpec& s) { return check_recurrence_drift(c, s); });
    m.def("check_recurrence_sqrt", &check_recurrence_sqrt, py::arg("coeffs_list"), py::arg("eta"));
    m.def("check_feller", &check_feller);

    py::class_<NoiseBundle>(m, "NoiseBundle")
        .def(py::init<std::uint64_t, double, std::size_t, double>(), py::arg("seed"),
             py::arg("dt"), py::arg("n_steps"), py::arg("rho3") = 0.0)
        .def_property_readonly("dt", &NoiseBundle::dt)
        .def_property_readonly("n_steps", &NoiseBundle::n_steps)
        .def("systemic_w0", &NoiseBundle::systemic_w0)
        .def("systemic_b0", &NoiseBundle::systemic_b0)
        .def("coarsen", &NoiseBundle::coarsen);

    py::class_<VolPath>(m, "VolPath")
        .def_readonly("times", &VolPath::times)
        .def_readonly("values", &VolPath::values);
    m.def("simulate_vol", &simulate_vol, py::arg("coeffs"), py::arg("spec"), py::arg("regime"),
          py::arg("bundle"), py::arg("asset_index"), py::arg("scheme"), py::arg("sigma_init"));

    py::class_<LossSample>(m, "LossSample")
        .def_readonly("t", &LossSample::t)
        .def_readonly("conditional_loss", &LossSample::conditional_loss)
        .def_readonly("n_inner", &LossSample::n_inner);
    py::class_<PortfolioParams>(m, "PortfolioParams")
        .def(py::init<>())
        .def_readwrite("coeffs", &PortfolioParams::coeffs)
        .def_readwrite("spec", &PortfolioParams::spec)
        .def_readwrite("regime", &PortfolioParams::regime)
        .def_readwrite("market", &PortfolioParams::market)
        .def_readwrite("n_inner", &PortfolioParams::n_inner)
        .def_readwrite("asset_offset", &PortfolioParams::asset_offset);
    m.def("simulate_portfolio_loss", &simulate_portfolio_loss, py::arg("params"),
          py::arg("bundle"), py::arg("t_grid"));

    py::class_<Estimate>(m, "Estimate")
        .def_readonly("value", &Estimate::value)
        .def_readonly("std_error", &Estimate::std_error);
    py::class_<StationaryMoments>(m, "StationaryMoments")
        .def(py::init<>())
        .def_readwrite("sigma11", &StationaryMoments::sigma11)
        .def_readwrite("sigma21", &StationaryMoments::sigma21)
        .def_readwrite("sigma_tilde", &StationaryMoments::sigma_tilde);
    py::class_<LimitCorrelations>(m, "LimitCorrelations")
        .def_readonly("rho_tilde", &LimitCorrelations::rho_tilde)
        .def_readonly("rho_prime", &LimitCorrelations::rho_prime);
    py::class_<ErgodicConfig>(m, "ErgodicConfig")
        .def(py::init<>())
        .def_readwrite("coeffs", &ErgodicConfig::coeffs)
        .def_readwrite("spec", &ErgodicConfig::spec)
        .def_readwrite("horizon", &ErgodicConfig::horizon)
        .def_readwrite("burn_in", &ErgodicConfig::burn_in)
        .def_readwrite("dt", &ErgodicConfig::dt)
        .def_readwrite("seed", &ErgodicConfig::seed)
        .def_readwrite("n_replicas", &ErgodicConfig::n_replicas);
    m.def("estimate_stationary_moments", &estimate_stationary_moments,
          py::call_guard<py::gil_scoped_release>());
    m.def("derive_limit_correlations", &derive_limit_correlations);

    py::class_<SpatialGrid>(m, "SpatialGrid")
        .def(py::init<>())
        .def_readwrite("dx", &SpatialGrid::dx)
        .def_readwrite("x_max", &SpatialGrid::x_max)
        .def("n_nodes", &SpatialGrid::n_nodes);
    py::class_<SpdeParams>(m, "SpdeParams")
        .def(py::init<>())
        .def_readwrite("grid", &SpdeParams::grid)
        .def_readwrite("dt", &SpdeParams::dt)
        .def_readwrite("r", &SpdeParams::r)
        .def_readwrite("rho1", &SpdeParams::rho1);
    py::class_<SpdeField>(m, "SpdeField")
        .def_readonly("t_grid", &SpdeField::t_grid)
        .def_readonly("mass", &SpdeField::mass)
        .def_readonly("norm2", &SpdeField::norm2)
        .def_readonly("grad_norm2", &SpdeField::grad_norm2)
        .def("loss_curve", &SpdeField::loss_curve);
    m.def("solve_density", &solve_density, py::arg("u0"), py::arg("h_values"),
          py::arg("w0_increments"), py::arg("params"), py::arg("snapshot_stride") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def("solve_survival", &solve_survival, py::arg("v0"), py::arg("h_values"),
          py::arg("w0_increments"), py::arg("params"), py::arg("snapshot_stride") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def("energy_residual", &energy_residual);
    m.def("rayleigh_u0", &rayleigh_u0);
    m.def("rayleigh_v0", &rayleigh_v0);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("slope", &FitResult::slope)
        .def_readonly("intercept", &FitResult::intercept)
        .def_readonly("r2", &FitResult::r2);
    m.def("fit_log_log", &fit_log_log);
    py::class_<KsResult>(m, "KsResult")
        .def_readonly("statistic", &KsResult::statistic)
        .def_readonly("band_lo", &KsResult::band_lo)
        .def_readonly("band_hi", &KsResult::band_hi);
    m.def("ks_two_sample", &ks_two_sample, py::arg("a"), py::arg("b"),
          py::arg("n_bootstrap") = 200, py::arg("seed") = 7);

    py::class_<RatePoint>(m, "RatePoint")
        .def_readonly("eps", &RatePoint::eps)
        .def_readonly("error", &RatePoint::error)
        .def_readonly("std_error", &RatePoint::std_error);
    py::class_<RateReport>(m, "RateReport")
        .def_readonly("points", &RateReport::points)
        .def_readonly("fit", &RateReport::fit)
        .def_readonly("monotone_ok", &RateReport::monotone_ok);
    py::class_<VolRateConfig>(m, "VolRateConfig")
        .def(py::init<>())
        .def_readwrite("coeffs", &VolRateConfig::coeffs)
        .def_readwrite("spec", &VolRateConfig::spec)
        .def_readwrite("p", &VolRateConfig::p)
        .def_readwrite("eps_grid", &VolRateConfig::eps_grid)
        .def_readwrite("t", &VolRateConfig::t)
        .def_readwrite("n_paths", &VolRateConfig::n_paths)
        .def_readwrite("seed", &VolRateConfig::seed);
    m.def("small_volvol_vol_rate", &small_volvol_vol_rate,
          py::call_guard<py::gil_scoped_release>());

    m.def("set_worker_threads", &set_worker_threads);
    m.def("load_config", &load_config);
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("coeffs", &ExperimentConfig::coeffs)
        .def_readwrite("spec", &ExperimentConfig::spec)
        .def_readwrite("market", &ExperimentConfig::market)
        .def_readwrite("regime", &ExperimentConfig::regime)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("out_dir", &ExperimentConfig::out_dir)
        .def("validate", &ExperimentConfig::validate)
        .def("canonical_text", &ExperimentConfig::canonical_text);
}
