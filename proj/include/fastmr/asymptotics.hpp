#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fastmr/ergodic.hpp"
#include "fastmr/sde.hpp"
#include "fastmr/spde.hpp"

namespace fastmr {

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares on (log eps, log error); >= 3 positive points.
FitResult fit_log_log(const std::vector<double>& eps_grid, const std::vector<double>& errors);

struct RatePoint {
    double eps = 0.0;
    double error = 0.0;
    double std_error = 0.0;
};

struct RateReport {
    std::vector<RatePoint> points; // eps strictly decreasing
    FitResult fit;
    std::string coupling; // "common-noise" or "independent"
    bool monotone_ok = false; // errors strictly decreasing up to 1 std error

    void finalize();
};

struct KsResult {
    double statistic = 0.0;
    double band_lo = 0.0; // bootstrap 2.5% percentile
    double band_hi = 0.0; // bootstrap 97.5% percentile
};

// Two-sample Kolmogorov-Smirnov distance with a bootstrap percentile band.
KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                       std::size_t n_bootstrap, std::uint64_t seed = 7);

// ---------------------------------------------------------------------
// large vol-of-vol studies

struct LargeStudyConfig {
    CoefficientVector coeffs;
    VolFunctionSpec spec;
    MarketConfig market;
    std::vector<double> eps_grid{0.5, 0.2, 0.1, 0.05}; // strictly decreasing
    std::size_t n_outer = 500;
    std::size_t n_inner = 500;
    double t = 1.0;
    std::uint64_t seed = 1;
    StationaryMoments moments; // precomputed limit constants
    std::size_t n_bootstrap = 200;
};

struct KsPoint {
    double eps = 0.0;
    KsResult ks;
};

struct WeakStudyResult {
    std::vector<KsPoint> points;
    KsResult floor; // KS of two independent limit-model samples
    bool nonincreasing_within_bands = false;
    std::vector<std::vector<double>> samples; // conditional losses per eps
    std::vector<double> limit_a, limit_b;     // limit-model loss samples
};

// Weak-limit check: distribution of the conditional loss under
// large_vol_of_vol(eps) against the constant-volatility limit
// (volatility sigma21, correlation rho_tilde) on matched outer seeds.
WeakStudyResult weak_convergence_study(const LargeStudyConfig& cfg);

struct PlateauResult {
    std::vector<RatePoint> distances; // coupled L2 loss distance per eps
    double floor = 0.0;               // RMS distance of two limit replicas
    double ratio_at_smallest = 0.0;   // distances.back() / floor
};

// Strong-failure check: pathwise L2 distance between the eps-model loss
// and the rho1'-limit loss on the same W0 plateaus above the noise
// floor when rho2 > 0.
PlateauResult strong_failure_study(const LargeStudyConfig& cfg);

// ---------------------------------------------------------------------
// small vol-of-vol studies

struct VolRateConfig {
    CoefficientVector coeffs;
    VolFunctionSpec spec;
    double p = 2.0;
    std::vector<double> eps_grid{0.2, 0.1, 0.05, 0.025};
    double t = 1.0;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    // fixed sigma_0 override; NaN = coupled stationary start (OU) or theta
    double sigma0 = std::numeric_limits<double>::quiet_NaN();
};

// Ergodic-rate check: || sigma^eps - theta ||_p^p over Omega x [0,t],
// common noise across the eps grid.
RateReport small_volvol_vol_rate(const VolRateConfig& cfg);

struct FieldStudyConfig {
    CoefficientVector coeffs;
    VolFunctionSpec spec;
    MarketConfig market;
    SpatialGrid grid{0.05, 10.0};
    std::vector<double> eps_grid{0.2, 0.1, 0.05, 0.025};
    double T = 1.0;
    std::size_t n_outer = 200;
    std::uint64_t seed = 1;
    std::size_t n_quad = 50; // time-quadrature points for E(x,T)
};

struct FieldStudyResult {
    RateReport h1_rate; // H^1-in-x, L^2-in-(t,Omega) field error
    std::vector<double> quad_times;
    // survival-at-zero samples, [eps][outer][quad]; the paired limit
    // solve shares the eps run's time step and W0 path
    std::vector<std::vector<std::vector<double>>> v_eps_boundary;
    std::vector<std::vector<std::vector<double>>> v_limit_boundary;
};

// Shared driver for the field-rate and loss-probability experiments: per
// outer draw solves v^{0,eps} (coefficients h(sigma^eps)) and v^0
// (coefficients h(theta)) on the same W0.
FieldStudyResult small_volvol_field_study(const FieldStudyConfig& cfg);

RateReport small_volvol_field_rate(const FieldStudyConfig& cfg);

// Time-integrated loss-probability error E(x,T) at a survival level x, from a completed
// field study. x must avoid the degenerate levels 0 and 1.
RateReport loss_probability_error(const FieldStudyResult& study, double x_level);

// Empirical median of the limit survival at time T/2 (the default
// level for the loss-probability experiment).
double median_limit_survival(const FieldStudyResult& study);

} // namespace fastmr
