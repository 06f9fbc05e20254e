#pragma once

#include <cstdint>
#include <cmath>

namespace fastmr {

// splitmix64: tiny, fast, passes BigCrush as a mixer. Used both as the
// stream generator and to derive sub-stream keys, so any (seed, index,
// kind) triple maps to a statistically independent stream.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t s) : state(s) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
    SplitMix64 sm(a ^ (0x8e9c1f2d3b4a5968ULL + b));
    sm.next();
    return sm.next();
}

inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_key(mix_key(a, b), c);
}

// Deterministic stream of uniforms / standard normals (Box-Muller).
// Bit-identical output for a given key on a given platform.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) : sm_(key) {}

    // uniform on (0, 1), never exactly 0 or 1
    double uniform() {
        const double u = (static_cast<double>(sm_.next() >> 11) + 0.5) * 0x1.0p-53;
        return u;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

    // Marsaglia-Tsang; shape > 0, scale > 0
    double gamma(double shape, double scale) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

private:
    SplitMix64 sm_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace fastmr
