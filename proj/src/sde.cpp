#include "fastmr/sde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <limits>

namespace fastmr {

double sample_stationary_vol(const CoefficientVector& coeffs, const VolFunctionSpec& spec,
                             RandomStream& rs) {
    if (coeffs.xi == 0.0) return coeffs.theta;
    switch (spec.g_kind) {
        case GKind::ConstantOne: {
            const double sd = coeffs.xi / std::sqrt(2.0 * coeffs.kappa);
            return coeffs.theta + sd * rs.normal();
        }
        case GKind::CirSqrt: {
            const double shape = 2.0 * coeffs.kappa * coeffs.theta / (coeffs.xi * coeffs.xi);
            const double scale = coeffs.xi * coeffs.xi / (2.0 * coeffs.kappa);
            return rs.gamma(shape, scale);
        }
        default:
            return coeffs.theta; // no closed form
    }
}

double max_dt_for_regime(const ScalingRegime& regime) {
    if (regime.kind == RegimeKind::Unscaled) return std::numeric_limits<double>::infinity();
    return regime.epsilon / 50.0;
}

VolPath simulate_vol(const CoefficientVector& coeffs, const VolFunctionSpec& spec,
                     const ScalingRegime& regime, const NoiseBundle& bundle,
                     std::uint64_t asset_index, VolScheme scheme, double sigma_init) {
    coeffs.validate();
    const double dt = bundle.dt();
    const double dt_max = max_dt_for_regime(regime);
    if (dt > dt_max * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "simulate_vol: dt=" << dt << " too coarse for epsilon=" << regime.epsilon
           << "; need dt <= " << dt_max;
        throw std::invalid_argument(os.str());
    }

    const CoefficientVector c = regime.apply(coeffs);
    const std::size_t n = bundle.n_steps();
    const std::vector<double>& db0 = bundle.systemic_b0();
    const std::vector<double> dbi = bundle.idio_b(asset_index);
    const double q1 = std::sqrt(1.0 - c.rho2 * c.rho2);
    const double q2 = c.rho2;

    VolPath out;
    out.regime = regime;
    out.scheme = scheme;
    out.times.resize(n + 1);
    out.values.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) out.times[k] = dt * static_cast<double>(k);

    const bool truncate = (scheme == VolScheme::FullTruncationEuler);
    double sigma = sigma_init; // internal state (may dip below 0 under full truncation)
    out.values[0] = truncate ? std::max(sigma, 0.0) : sigma;

    if (scheme == VolScheme::ExactOu) {
        if (spec.g_kind != GKind::ConstantOne)
            throw std::invalid_argument("exact_ou scheme requires g = constant_one");
        const double e = std::exp(-c.kappa * dt);
        const double sd = c.xi * std::sqrt((1.0 - e * e) / (2.0 * c.kappa));
        const double isdt = 1.0 / std::sqrt(dt);
        for (std::size_t k = 0; k < n; ++k) {
            const double z = (q1 * dbi[k] + q2 * db0[k]) * isdt;
            sigma = c.theta + (sigma - c.theta) * e + sd * z;
            out.values[k + 1] = sigma;
        }
        return out;
    }

    for (std::size_t k = 0; k < n; ++k) {
        const double db = q1 * dbi[k] + q2 * db0[k];
        const double arg = truncate ? std::max(sigma, 0.0) : sigma;
        sigma += c.kappa * (c.theta - arg) * dt + c.xi * spec.g(arg) * db;
        out.values[k + 1] = truncate ? std::max(sigma, 0.0) : sigma;
    }
    return out;
}

namespace {

struct AssetStepper {
    // returns default time (grid time of first detected crossing), or nullopt
    template <typename OnLevel>
    static std::optional<double> run(const CoefficientVector& coeffs, const VolFunctionSpec& spec,
                                     const VolPath& vol_path, const NoiseBundle& bundle,
                                     std::uint64_t asset_index, double x0, OnLevel&& on_level) {
        const double dt = bundle.dt();
        const std::size_t n = bundle.n_steps();
        if (vol_path.values.size() != n + 1)
            throw std::invalid_argument("simulate_asset: vol path and noise bundle grids differ");

        on_level(0, x0);
        if (x0 <= 0.0) {
            for (std::size_t k = 1; k <= n; ++k) on_level(k, 0.0);
            return 0.0;
        }

        const std::vector<double>& dw0 = bundle.systemic_w0();
        const std::vector<double> dwi = bundle.idio_w(asset_index);
        const std::vector<double> bridge = bundle.bridge_uniforms(asset_index);
        const double q1 = std::sqrt(1.0 - coeffs.rho1 * coeffs.rho1);
        const double q2 = coeffs.rho1;

        double x = x0;
        for (std::size_t k = 0; k < n; ++k) {
            const double hv = spec.h(vol_path.values[k]);
            const double xn = x + (coeffs.r - 0.5 * hv * hv) * dt + hv * (q1 * dwi[k] + q2 * dw0[k]);
            if (xn <= 0.0) {
                for (std::size_t j = k + 1; j <= n; ++j) on_level(j, 0.0);
                return dt * static_cast<double>(k + 1);
            }
            // Brownian-bridge interior-crossing probability between grid points
            const double var = hv * hv * dt;
            if (var > 0.0) {
                const double p = std::exp(-2.0 * x * xn / var);
                if (bridge[k] < p) {
                    for (std::size_t j = k + 1; j <= n; ++j) on_level(j, 0.0);
                    return dt * static_cast<double>(k + 1);
                }
            }
            x = xn;
            on_level(k + 1, x);
        }
        return std::nullopt;
    }
};

} // namespace

AssetPathResult simulate_asset(const CoefficientVector& coeffs, const VolFunctionSpec& spec,
                               const VolPath& vol_path, const NoiseBundle& bundle,
                               std::uint64_t asset_index, double x0) {
    AssetPathResult res;
    res.path.resize(bundle.n_steps() + 1);
    res.default_time = AssetStepper::run(coeffs, spec, vol_path, bundle, asset_index, x0,
                                         [&](std::size_t k, double v) { res.path[k] = v; });
    res.defaulted = res.default_time.has_value();
    return res;
}

std::optional<double> simulate_default_time(const CoefficientVector& coeffs,
                                            const VolFunctionSpec& spec,
                                            const VolPath& vol_path, const NoiseBundle& bundle,
                                            std::uint64_t asset_index, double x0) {
    return AssetStepper::run(coeffs, spec, vol_path, bundle, asset_index, x0,
                             [](std::size_t, double) {});
}

std::vector<LossSample> simulate_portfolio_loss(const PortfolioParams& params,
                                                const NoiseBundle& bundle,
                                                const std::vector<double>& t_grid) {
    if (params.n_inner < 1) throw std::invalid_argument("simulate_portfolio_loss: n_inner >= 1");
    params.market.validate();
    const double dt = bundle.dt();

    std::vector<std::size_t> defaults_by_step(bundle.n_steps() + 2, 0);
    VolScheme scheme = VolScheme::Euler;
    if (params.spec.g_kind == GKind::ConstantOne) scheme = VolScheme::ExactOu;
    else if (params.spec.g_cir_like()) scheme = VolScheme::FullTruncationEuler;

    for (std::size_t i = 1; i <= params.n_inner; ++i) {
        const std::uint64_t asset = params.asset_offset + i;
        RandomStream init = bundle.init_stream(asset);
        const double x0 = params.market.beta * std::sqrt(-2.0 * std::log(init.uniform()));
        double sigma0;
        if (params.market.stationary_vol_init) {
            // in the scaled regimes the stationary draw uses the scaled coefficients
            const CoefficientVector scaled = params.regime.apply(params.coeffs);
            sigma0 = sample_stationary_vol(scaled, params.spec, init);
        } else {
            sigma0 = params.coeffs.theta;
        }
        const VolPath vp = simulate_vol(params.coeffs, params.spec, params.regime, bundle, asset,
                                        scheme, sigma0);
        const auto td = simulate_default_time(params.coeffs, params.spec, vp, bundle, asset, x0);
        if (td) {
            const auto step = static_cast<std::size_t>(std::llround(*td / dt));
            ++defaults_by_step[std::min(step, defaults_by_step.size() - 1)];
        }
    }

    // cumulative defaults up to each requested time
    std::vector<LossSample> out;
    out.reserve(t_grid.size());
    std::size_t cum = 0, step = 0;
    for (double t : t_grid) {
        const auto target = static_cast<std::size_t>(std::llround(t / dt));
        if (std::abs(t - static_cast<double>(target) * dt) > 1e-9 * std::max(1.0, t))
            throw std::invalid_argument("simulate_portfolio_loss: t_grid point off the step grid");
        while (step <= target) cum += defaults_by_step[step++];
        LossSample s;
        s.t = t;
        s.conditional_loss = static_cast<double>(cum) / static_cast<double>(params.n_inner);
        s.n_inner = params.n_inner;
        out.push_back(s);
    }
    return out;
}

} // namespace fastmr
