#include "fastmr/noise.hpp"

#include <cmath>

namespace fastmr {

NoiseBundle::NoiseBundle(std::uint64_t seed, double dt, std::size_t n_steps, double rho3) {
    if (dt <= 0.0) throw std::invalid_argument("NoiseBundle: dt must be positive");
    if (n_steps < 1) throw std::invalid_argument("NoiseBundle: n_steps must be >= 1");
    if (rho3 < -1.0 || rho3 > 1.0) throw std::invalid_argument("NoiseBundle: rho3 must lie in [-1,1]");
    seed_ = seed;
    dt_ = dt;
    base_steps_ = n_steps;
    factor_ = 1;
    rho3_ = rho3;

    const double sdt = std::sqrt(dt);
    RandomStream sw(mix_key(seed, static_cast<std::uint64_t>(StreamKind::SystemicW0), 0));
    RandomStream sz(mix_key(seed, static_cast<std::uint64_t>(StreamKind::SystemicB0Z), 0));
    w0_.resize(n_steps);
    b0_.resize(n_steps);
    const double c = std::sqrt(1.0 - rho3 * rho3);
    for (std::size_t k = 0; k < n_steps; ++k) {
        w0_[k] = sdt * sw.normal();
        b0_[k] = rho3 * w0_[k] + c * sdt * sz.normal();
    }
}

std::vector<double> NoiseBundle::fine_increments(StreamKind kind, std::uint64_t asset) const {
    RandomStream s(mix_key(seed_, static_cast<std::uint64_t>(kind), asset));
    std::vector<double> inc(base_steps_);
    const double sdt = std::sqrt(dt_);
    for (auto& v : inc) v = sdt * s.normal();
    return inc;
}

std::vector<double> NoiseBundle::block_sum(std::vector<double> fine) const {
    if (factor_ == 1) return fine;
    const std::size_t n = base_steps_ / factor_;
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < factor_; ++j) out[k] += fine[k * factor_ + j];
    return out;
}

std::vector<double> NoiseBundle::idio_w(std::uint64_t asset) const {
    return block_sum(fine_increments(StreamKind::IdioW, asset));
}

std::vector<double> NoiseBundle::idio_b(std::uint64_t asset) const {
    return block_sum(fine_increments(StreamKind::IdioB, asset));
}

std::vector<double> NoiseBundle::bridge_uniforms(std::uint64_t asset) const {
    // uniforms are per-grid, not per-path: they key on the coarsening
    // factor so each resolution draws its own independent sequence
    RandomStream s(mix_key(mix_key(seed_, factor_),
                           static_cast<std::uint64_t>(StreamKind::BridgeUniform), asset));
    std::vector<double> u(n_steps());
    for (auto& v : u) v = s.uniform();
    return u;
}

RandomStream NoiseBundle::init_stream(std::uint64_t asset) const {
    return RandomStream(mix_key(seed_, static_cast<std::uint64_t>(StreamKind::InitialCondition), asset));
}

NoiseBundle NoiseBundle::coarsen(std::size_t factor) const {
    if (factor == 0 || base_steps_ % (factor_ * factor) != 0)
        throw std::invalid_argument("NoiseBundle::coarsen: factor must divide the step count");
    NoiseBundle out;
    out.seed_ = seed_;
    out.dt_ = dt_;
    out.base_steps_ = base_steps_;
    out.factor_ = factor_ * factor;
    out.rho3_ = rho3_;
    const std::size_t n = base_steps_ / out.factor_;
    out.w0_.assign(n, 0.0);
    out.b0_.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < factor; ++j) {
            out.w0_[k] += w0_[k * factor + j];
            out.b0_[k] += b0_[k * factor + j];
        }
    return out;
}

} // namespace fastmr
