#include "fastmr/ergodic.hpp"

#include <cmath>
#include <stdexcept>

namespace fastmr {

namespace {

void require_recurrence(const ErgodicConfig& cfg) {
    if (cfg.skip_recurrence_check) return;
    if (cfg.spec.g_differentiable()) {
        const auto rep = check_recurrence_drift(cfg.coeffs, cfg.spec);
        if (!rep.holds)
            throw std::runtime_error("ergodic: recurrence check (drift domination) failed: " +
                                     rep.detail);
    } else if (cfg.spec.g_cir_like()) {
        const auto rep = check_recurrence_sqrt({cfg.coeffs}, 1.0);
        if (!rep.holds)
            throw std::runtime_error("ergodic: recurrence check (square-root g) failed: " +
                                     rep.detail);
    }
}

// One coupled-pair simulation per replica; time-averages of each
// functional are accumulated per batch for the batch-means error.
std::vector<Estimate> batch_mean_averages(
    const std::vector<std::function<double(double, double)>>& fs, const ErgodicConfig& cfg) {
    cfg.coeffs.validate();
    cfg.spec.validate();
    require_recurrence(cfg);
    const double burn_in = cfg.burn_in >= 0.0 ? cfg.burn_in : 10.0 / cfg.coeffs.kappa;
    if (cfg.horizon <= burn_in)
        throw std::invalid_argument("ergodic: horizon must exceed burn-in");

    const auto n_steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
    const auto burn_steps = static_cast<std::size_t>(std::llround(burn_in / cfg.dt));
    const std::size_t keep = n_steps - burn_steps;
    const std::size_t n_batches = std::max<std::size_t>(cfg.n_batches, 2);

    VolScheme scheme = VolScheme::Euler;
    if (cfg.spec.g_kind == GKind::ConstantOne) scheme = VolScheme::ExactOu;
    else if (cfg.spec.g_cir_like()) scheme = VolScheme::FullTruncationEuler;

    std::vector<std::vector<double>> batches(fs.size()); // batch means, all replicas pooled
    for (std::size_t rep = 0; rep < std::max<std::size_t>(cfg.n_replicas, 1); ++rep) {
        NoiseBundle bundle(mix_key(cfg.seed, 0xE7900D1CULL, rep), cfg.dt, n_steps, 0.0);
        RandomStream init1 = bundle.init_stream(1);
        RandomStream init2 = bundle.init_stream(2);
        const double s1_0 = sample_stationary_vol(cfg.coeffs, cfg.spec, init1);
        const double s2_0 = sample_stationary_vol(cfg.coeffs, cfg.spec, init2);
        const VolPath p1 = simulate_vol(cfg.coeffs, cfg.spec, ScalingRegime::unscaled(), bundle, 1,
                                        scheme, s1_0);
        const VolPath p2 = simulate_vol(cfg.coeffs, cfg.spec, ScalingRegime::unscaled(), bundle, 2,
                                        scheme, s2_0);

        const std::size_t batch_len = keep / n_batches;
        for (std::size_t b = 0; b < n_batches; ++b) {
            const std::size_t lo = burn_steps + b * batch_len;
            const std::size_t hi = (b + 1 == n_batches) ? n_steps : lo + batch_len;
            std::vector<double> acc(fs.size(), 0.0);
            for (std::size_t k = lo; k < hi; ++k)
                for (std::size_t f = 0; f < fs.size(); ++f)
                    acc[f] += fs[f](p1.values[k], p2.values[k]);
            for (std::size_t f = 0; f < fs.size(); ++f)
                batches[f].push_back(acc[f] / static_cast<double>(hi - lo));
        }
    }

    std::vector<Estimate> out(fs.size());
    for (std::size_t f = 0; f < fs.size(); ++f) {
        const auto& bs = batches[f];
        double mean = 0.0;
        for (double v : bs) mean += v;
        mean /= static_cast<double>(bs.size());
        double var = 0.0;
        for (double v : bs) var += (v - mean) * (v - mean);
        var /= static_cast<double>(bs.size() - 1);
        out[f].value = mean;
        out[f].std_error = std::sqrt(var / static_cast<double>(bs.size()));
    }
    return out;
}

Estimate sqrt_estimate(const Estimate& m) {
    if (m.value <= 0.0)
        throw std::runtime_error("ergodic: nonpositive second-moment estimate, cannot take sqrt");
    Estimate e;
    e.value = std::sqrt(m.value);
    e.std_error = m.std_error / (2.0 * e.value);
    return e;
}

} // namespace

Estimate estimate_time_average(const std::function<double(double, double)>& F,
                               const ErgodicConfig& cfg) {
    return batch_mean_averages({F}, cfg)[0];
}

StationaryMoments estimate_stationary_moments(const ErgodicConfig& cfg) {
    const auto& spec = cfg.spec;
    const auto ests = batch_mean_averages(
        {
            [&spec](double a, double) { return spec.h(a); },
            [&spec](double a, double) { const double v = spec.h(a); return v * v; },
            [&spec](double a, double b) { return spec.h(a) * spec.h(b); },
        },
        cfg);
    StationaryMoments m;
    m.sigma11 = ests[0];
    m.sigma21 = sqrt_estimate(ests[1]);
    m.sigma_tilde = sqrt_estimate(ests[2]);
    m.horizon = cfg.horizon;
    m.burn_in = cfg.burn_in >= 0.0 ? cfg.burn_in : 10.0 / cfg.coeffs.kappa;
    return m;
}

LimitCorrelations derive_limit_correlations(const StationaryMoments& m, double rho1) {
    if (!(m.sigma21.value > 0.0))
        throw std::invalid_argument("derive_limit_correlations: sigma21 must be positive");
    auto ratio = [&](const Estimate& num) {
        Estimate e;
        e.value = rho1 * num.value / m.sigma21.value;
        const double r1 = num.std_error / std::max(num.value, 1e-300);
        const double r2 = m.sigma21.std_error / m.sigma21.value;
        e.std_error = std::abs(e.value) * std::sqrt(r1 * r1 + r2 * r2);
        return e;
    };
    LimitCorrelations lc;
    lc.rho_tilde = ratio(m.sigma_tilde);
    lc.rho_prime = ratio(m.sigma11);
    return lc;
}

} // namespace fastmr
