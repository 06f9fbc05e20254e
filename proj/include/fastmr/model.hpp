#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastmr {

// Per-asset parameter tuple (r, rho1, rho2, kappa, theta, xi).
struct CoefficientVector {
    double r = 0.05;     // drift rate
    double rho1 = 0.5;   // asset-market correlation
    double rho2 = 0.5;   // vol-market correlation
    double kappa = 2.0;  // mean-reversion rate
    double theta = 0.3;  // long-run volatility level
    double xi = 0.5;     // vol-of-vol

    void validate() const; // throws on the first violation
    std::vector<std::string> violations() const;
    double inf_distance(const CoefficientVector& other) const;
};

enum class GKind { ConstantOne, CirSqrt, DampedSqrt, TanhShifted };
enum class HKind { Identity, SqrtAbs, BoundedSigmoid, Constant };

// Functional forms for g (vol diffusion shape) and h (vol-to-diffusion map).
struct VolFunctionSpec {
    GKind g_kind = GKind::ConstantOne;
    // damped_sqrt: g(x) = sqrt(|x|) * gt(x), gt increasing C^1 with range [c_g, 1]
    double g_cg = 0.5;
    double g_steepness = 1.0;
    // tanh_shifted: g(x) = g_base + g_amplitude * tanh(x), g_base - |g_amplitude| > 0
    double g_base = 1.0;
    double g_amplitude = 0.5;

    HKind h_kind = HKind::BoundedSigmoid;
    double h_min = 0.1; // bounded_sigmoid lower bound, > 0
    double h_max = 0.6; // bounded_sigmoid upper bound
    double h_const = 0.3; // constant h level (degenerate constant-volatility model)

    void validate() const;

    double g(double x) const;
    double g_prime(double x) const;       // throws for kinds singular at 0
    double g_second(double x) const;
    bool g_differentiable() const;
    bool g_cir_like() const { return g_kind == GKind::CirSqrt || g_kind == GKind::DampedSqrt; }

    double h(double x) const;
    // upper bound of |h| over the reachable range, used by CFL rules
    double h_bound() const;
    bool h_bounded() const { return h_kind == HKind::BoundedSigmoid || h_kind == HKind::Constant; }
};

enum class RegimeKind { Unscaled, LargeVolOfVol, SmallVolOfVol };

// Scaling regime: large maps (kappa, xi) -> (kappa/eps, xi/sqrt(eps)),
// small maps (kappa, xi) -> (kappa/eps, xi).
struct ScalingRegime {
    RegimeKind kind = RegimeKind::Unscaled;
    double epsilon = 1.0;

    static ScalingRegime unscaled() { return {RegimeKind::Unscaled, 1.0}; }
    static ScalingRegime large(double eps);
    static ScalingRegime small(double eps);

    CoefficientVector apply(const CoefficientVector& c) const;
};

struct MarketConfig {
    double rho3 = 0.0;         // correlation of W0 and B0
    double beta = 0.5;         // Rayleigh scale of the initial distance law
    double horizon = 1.0;      // T
    bool stationary_vol_init = true; // draw sigma_0 from the stationary law when available

    void validate() const;
};

// Result of one of the executable recurrence / Feller condition checks.
struct ConditionReport {
    bool holds = false;
    std::string detail;                    // human-readable explanation
    std::optional<double> first_violation; // probe point, when applicable
};

// Recurrence drift check: g'(x) kappa (theta - x) < kappa g(x) + (xi/2) g''(x) g(x)^2
// on a finite probe grid, plus the positive lower bound on g.
ConditionReport check_recurrence_drift(const CoefficientVector& coeffs, const VolFunctionSpec& spec,
                             const std::vector<double>& probe_grid);
// Default probe grid [theta - 10 xi, theta + 10 xi], 10^4 points.
ConditionReport check_recurrence_drift(const CoefficientVector& coeffs, const VolFunctionSpec& spec);

// Square-root-g recurrence check: kappa_i / xi_j^2 > 1/4 + 1/sqrt(2) for all
// pairs, and coefficient vectors within eta of each other in sup norm.
ConditionReport check_recurrence_sqrt(const std::vector<CoefficientVector>& coeffs_list, double eta);

// Feller condition 2 kappa theta >= xi^2 (non-strict; boundary flagged in detail).
bool check_feller(const CoefficientVector& coeffs);

} // namespace fastmr
