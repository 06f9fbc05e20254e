#pragma once

#include <optional>
#include <vector>

#include "fastmr/model.hpp"
#include "fastmr/noise.hpp"

namespace fastmr {

enum class VolScheme { Euler, FullTruncationEuler, ExactOu };

struct VolPath {
    std::vector<double> times;
    std::vector<double> values; // length n_steps + 1, >= 0 for cir-like g
    ScalingRegime regime;
    VolScheme scheme = VolScheme::Euler;
};

struct AssetPathResult {
    std::vector<double> path; // distance-to-default, constant 0 after default
    bool defaulted = false;
    std::optional<double> default_time;
};

struct LossSample {
    double t = 0.0;
    double conditional_loss = 0.0; // in [0,1]
    std::size_t n_inner = 0;
};

// Stationary draw for sigma_0 when the law is known in closed form
// (OU: normal, CIR: gamma), otherwise theta.
double sample_stationary_vol(const CoefficientVector& coeffs, const VolFunctionSpec& spec,
                             RandomStream& rs);

// Largest admissible dt for the stiff scaled drift (dt <= eps/50).
double max_dt_for_regime(const ScalingRegime& regime);

// Volatility path driven by sqrt(1-rho2^2) B^i + rho2 B^0.
// sigma_init: starting level (caller decides point mass vs stationary draw).
VolPath simulate_vol(const CoefficientVector& coeffs, const VolFunctionSpec& spec,
                     const ScalingRegime& regime, const NoiseBundle& bundle,
                     std::uint64_t asset_index, VolScheme scheme, double sigma_init);

// Distance-to-default path with Euler stepping and a per-step
// Brownian-bridge barrier test. h(sigma) is read off vol_path.
AssetPathResult simulate_asset(const CoefficientVector& coeffs, const VolFunctionSpec& spec,
                               const VolPath& vol_path, const NoiseBundle& bundle,
                               std::uint64_t asset_index, double x0);

// Cheaper variant: only the default time matters (no stored path).
std::optional<double> simulate_default_time(const CoefficientVector& coeffs,
                                            const VolFunctionSpec& spec,
                                            const VolPath& vol_path, const NoiseBundle& bundle,
                                            std::uint64_t asset_index, double x0);

struct PortfolioParams {
    CoefficientVector coeffs;
    VolFunctionSpec spec;
    ScalingRegime regime;
    MarketConfig market;
    std::size_t n_inner = 100;
    // inner assets use stream indices asset_offset+1 .. asset_offset+n_inner;
    // a nonzero offset gives an independent replica on the same systemic draw
    std::uint64_t asset_offset = 0;
};

// Conditional loss curve for one systemic draw: n_inner assets share
// (W0, B0) from `bundle` and use idiosyncratic streams indexed 1..n_inner.
// t_grid values must lie on the bundle's time grid.
std::vector<LossSample> simulate_portfolio_loss(const PortfolioParams& params,
                                                const NoiseBundle& bundle,
                                                const std::vector<double>& t_grid);

} // namespace fastmr
