#pragma once

#include <functional>

#include "fastmr/sde.hpp"

namespace fastmr {

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Long-horizon time-average limit constants of the volatility pair
// process, and the correlations they induce in the constant-volatility
// limit models.
struct StationaryMoments {
    Estimate sigma11;     // E[h(sigma*)]
    Estimate sigma21;     // sqrt(E[h^2(sigma*)])
    Estimate sigma_tilde; // sqrt(E[h(sigma^1*) h(sigma^2*)]), pair sharing B0
    double horizon = 0.0;
    double burn_in = 0.0;
};

struct LimitCorrelations {
    Estimate rho_tilde; // rho1 * sigma_tilde / sigma21
    Estimate rho_prime; // rho1 * sigma11 / sigma21
};

struct ErgodicConfig {
    CoefficientVector coeffs;
    VolFunctionSpec spec;
    double horizon = 500.0;
    double burn_in = -1.0; // < 0 means default 10/kappa
    double dt = 0.005;
    std::uint64_t seed = 1;
    std::size_t n_replicas = 1; // independent replicas averaged together
    bool skip_recurrence_check = false;
    std::size_t n_batches = 50; // batch-means standard error
};

// Time average of F(sigma^1_s, sigma^2_s) over a coupled pair sharing B0.
Estimate estimate_time_average(const std::function<double(double, double)>& F,
                               const ErgodicConfig& cfg);

// sigma_{1,1}, sigma_{2,1} and sigma_tilde from one coupled pair
// simulation per replica.
StationaryMoments estimate_stationary_moments(const ErgodicConfig& cfg);

// Delta-method propagation of the moment errors into the ratios.
LimitCorrelations derive_limit_correlations(const StationaryMoments& m, double rho1);

} // namespace fastmr
