#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fastmr/rng.hpp"

namespace fastmr {

// Stream kinds for counter-based sub-seeding. Distinct kinds give
// independent streams even for the same (seed, asset) pair.
enum class StreamKind : std::uint64_t {
    SystemicW0 = 1,
    SystemicB0Z = 2, // the Z in dB0 = rho3 dW0 + sqrt(1-rho3^2) dZ
    IdioW = 3,
    IdioB = 4,
    BridgeUniform = 5,
    InitialCondition = 6,
};

// Correlated systemic Brownian increments (W0, B0) plus on-demand
// idiosyncratic streams. Everything is a pure function of
// (seed, asset index, kind), so workers can generate disjoint slices
// concurrently and two bundles with the same seed are bit-identical.
//
// coarsen(factor) gives a view of the SAME Brownian paths on a grid
// factor times coarser (block sums of increments); this is what makes
// common-random-number coupling across epsilon values exact.
class NoiseBundle {
public:
    NoiseBundle(std::uint64_t seed, double dt, std::size_t n_steps, double rho3);

    std::uint64_t seed() const { return seed_; }
    double dt() const { return dt_ * static_cast<double>(factor_); }
    std::size_t n_steps() const { return base_steps_ / factor_; }
    double rho3() const { return rho3_; }
    double horizon() const { return dt_ * static_cast<double>(base_steps_); }

    const std::vector<double>& systemic_w0() const { return w0_; }
    const std::vector<double>& systemic_b0() const { return b0_; }

    // fresh idiosyncratic increment vectors for one asset, on this grid
    std::vector<double> idio_w(std::uint64_t asset) const;
    std::vector<double> idio_b(std::uint64_t asset) const;
    // uniforms for the barrier-crossing bridge test (one per step)
    std::vector<double> bridge_uniforms(std::uint64_t asset) const;
    // stream for initial conditions (x0, sigma0) of one asset
    RandomStream init_stream(std::uint64_t asset) const;

    NoiseBundle coarsen(std::size_t factor) const;

private:
    NoiseBundle() = default;
    std::vector<double> fine_increments(StreamKind kind, std::uint64_t asset) const;
    std::vector<double> block_sum(std::vector<double> fine) const;

    std::uint64_t seed_ = 0;
    double dt_ = 0.0;        // finest grid spacing
    std::size_t base_steps_ = 0;
    std::size_t factor_ = 1;
    double rho3_ = 0.0;
    std::vector<double> w0_, b0_; // on the coarsened grid
};

} // namespace fastmr
