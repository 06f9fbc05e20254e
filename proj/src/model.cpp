#include "fastmr/model.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace fastmr {

std::vector<std::string> CoefficientVector::violations() const {
    std::vector<std::string> v;
    if (!(rho1 >= 0.0 && rho1 < 1.0)) v.emplace_back("rho1 must lie in [0,1)");
    if (!(rho2 >= 0.0 && rho2 < 1.0)) v.emplace_back("rho2 must lie in [0,1)");
    if (!(kappa > 0.0)) v.emplace_back("kappa must be positive");
    if (!(xi >= 0.0)) v.emplace_back("xi must be nonnegative");
    return v;
}

void CoefficientVector::validate() const {
    const auto v = violations();
    if (!v.empty()) throw std::invalid_argument(v.front());
}

double CoefficientVector::inf_distance(const CoefficientVector& o) const {
    double d = std::abs(r - o.r);
    d = std::max(d, std::abs(rho1 - o.rho1));
    d = std::max(d, std::abs(rho2 - o.rho2));
    d = std::max(d, std::abs(kappa - o.kappa));
    d = std::max(d, std::abs(theta - o.theta));
    d = std::max(d, std::abs(xi - o.xi));
    return d;
}

void VolFunctionSpec::validate() const {
    if (g_kind == GKind::DampedSqrt) {
        if (!(g_cg > 0.0 && g_cg <= 1.0)) throw std::invalid_argument("damped_sqrt: c_g must lie in (0,1]");
        if (!(g_steepness > 0.0)) throw std::invalid_argument("damped_sqrt: steepness must be positive");
    }
    if (g_kind == GKind::TanhShifted) {
        if (!(g_base - std::abs(g_amplitude) > 0.0))
            throw std::invalid_argument("tanh_shifted: g must stay positive (base > |amplitude|)");
    }
    if (h_kind == HKind::BoundedSigmoid) {
        if (!(h_min > 0.0 && h_max > h_min))
            throw std::invalid_argument("bounded_sigmoid: need 0 < h_min < h_max");
    }
    if (h_kind == HKind::Constant && !(h_const >= 0.0))
        throw std::invalid_argument("constant h must be nonnegative");
}

namespace {
// increasing C^1 map onto [c_g, 1]
double damped_gt(double x, double cg, double steep) {
    return cg + (1.0 - cg) * 0.5 * (1.0 + std::tanh(steep * x));
}
} // namespace

double VolFunctionSpec::g(double x) const {
    switch (g_kind) {
        case GKind::ConstantOne: return 1.0;
        case GKind::CirSqrt: return std::sqrt(std::abs(x));
        case GKind::DampedSqrt: return std::sqrt(std::abs(x)) * damped_gt(x, g_cg, g_steepness);
        case GKind::TanhShifted: return g_base + g_amplitude * std::tanh(x);
    }
    return 1.0;
}

bool VolFunctionSpec::g_differentiable() const {
    return g_kind == GKind::ConstantOne || g_kind == GKind::TanhShifted;
}

double VolFunctionSpec::g_prime(double x) const {
    switch (g_kind) {
        case GKind::ConstantOne: return 0.0;
        case GKind::TanhShifted: {
            const double t = std::tanh(x);
            return g_amplitude * (1.0 - t * t);
        }
        default:
            throw std::invalid_argument("g is not differentiable at 0 for square-root kinds");
    }
}

double VolFunctionSpec::g_second(double x) const {
    switch (g_kind) {
        case GKind::ConstantOne: return 0.0;
        case GKind::TanhShifted: {
            const double t = std::tanh(x);
            return -2.0 * g_amplitude * t * (1.0 - t * t);
        }
        default:
            throw std::invalid_argument("g is not twice differentiable for square-root kinds");
    }
}

double VolFunctionSpec::h(double x) const {
    switch (h_kind) {
        case HKind::Identity: return x;
        case HKind::SqrtAbs: return std::sqrt(std::max(x, 0.0));
        case HKind::BoundedSigmoid: return h_min + (h_max - h_min) / (1.0 + std::exp(-x));
        case HKind::Constant: return h_const;
    }
    return x;
}

double VolFunctionSpec::h_bound() const {
    switch (h_kind) {
        case HKind::BoundedSigmoid: return h_max;
        case HKind::Constant: return h_const;
        default: return 0.0; // unbounded kinds: callers supply their own bound
    }
}

ScalingRegime ScalingRegime::large(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("large_vol_of_vol: epsilon must be positive");
    return {RegimeKind::LargeVolOfVol, eps};
}

ScalingRegime ScalingRegime::small(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("small_vol_of_vol: epsilon must be positive");
    return {RegimeKind::SmallVolOfVol, eps};
}

CoefficientVector ScalingRegime::apply(const CoefficientVector& c) const {
    CoefficientVector out = c;
    switch (kind) {
        case RegimeKind::Unscaled: break;
        case RegimeKind::LargeVolOfVol:
            out.kappa = c.kappa / epsilon;
            out.xi = c.xi / std::sqrt(epsilon);
            break;
        case RegimeKind::SmallVolOfVol:
            out.kappa = c.kappa / epsilon;
            break;
    }
    return out;
}

void MarketConfig::validate() const {
    if (rho3 < -1.0 || rho3 > 1.0) throw std::invalid_argument("rho3 must lie in [-1,1]");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon T must be positive");
}

ConditionReport check_recurrence_drift(const CoefficientVector& coeffs, const VolFunctionSpec& spec,
                             const std::vector<double>& probe_grid) {
    coeffs.validate();
    if (!spec.g_differentiable()) {
        throw std::invalid_argument(
            "check_recurrence_drift: g must be twice differentiable on the probe grid "
            "(square-root kinds are singular at 0; use check_recurrence_sqrt)");
    }
    ConditionReport rep;
    // lower-bound check: g >= c_g > 0 over the probe range
    double gmin = std::numeric_limits<double>::infinity();
    for (double x : probe_grid) gmin = std::min(gmin, spec.g(x));
    if (!(gmin > 0.0)) {
        rep.holds = false;
        rep.detail = "g is not bounded below by a positive constant on the probe grid";
        return rep;
    }
    for (double x : probe_grid) {
        const double lhs = spec.g_prime(x) * coeffs.kappa * (coeffs.theta - x);
        const double gx = spec.g(x);
        const double rhs = coeffs.kappa * gx + 0.5 * coeffs.xi * spec.g_second(x) * gx * gx;
        if (!(lhs < rhs)) {
            rep.holds = false;
            rep.first_violation = x;
            std::ostringstream os;
            os << "inequality violated at x=" << x << " (lhs=" << lhs << ", rhs=" << rhs << ")";
            rep.detail = os.str();
            return rep;
        }
    }
    rep.holds = true;
    rep.detail = "drift-domination inequality holds at all probe points (g_min=" +
                 std::to_string(gmin) + ")";
    return rep;
}

ConditionReport check_recurrence_drift(const CoefficientVector& coeffs, const VolFunctionSpec& spec) {
    const double half_width = 10.0 * std::max(coeffs.xi, 0.1);
    const std::size_t n = 10000;
    std::vector<double> grid(n);
    const double lo = coeffs.theta - half_width, hi = coeffs.theta + half_width;
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return check_recurrence_drift(coeffs, spec, grid);
}

ConditionReport check_recurrence_sqrt(const std::vector<CoefficientVector>& coeffs_list, double eta) {
    if (coeffs_list.empty()) throw std::invalid_argument("check_recurrence_sqrt: empty coefficient list");
    const double threshold = 0.25 + 1.0 / std::sqrt(2.0);
    ConditionReport rep;
    for (std::size_t i = 0; i < coeffs_list.size(); ++i) {
        for (std::size_t j = 0; j < coeffs_list.size(); ++j) {
            const double ratio = coeffs_list[i].kappa / (coeffs_list[j].xi * coeffs_list[j].xi);
            if (!(ratio > threshold)) {
                rep.holds = false;
                std::ostringstream os;
                os << "kappa_" << i << "/xi_" << j << "^2 = " << ratio
                   << " fails the bound 1/4 + 1/sqrt(2) = " << threshold;
                rep.detail = os.str();
                return rep;
            }
            if (i < j && !(coeffs_list[i].inf_distance(coeffs_list[j]) < eta)) {
                rep.holds = false;
                std::ostringstream os;
                os << "coefficient vectors " << i << " and " << j
                   << " differ by >= eta = " << eta << " in sup norm";
                rep.detail = os.str();
                return rep;
            }
        }
    }
    rep.holds = true;
    std::ostringstream os;
    os << "all pairs pass kappa/xi^2 > " << threshold << " and sup-norm closeness eta=" << eta
       << " (eta is user-supplied, not derived)";
    rep.detail = os.str();
    return rep;
}

bool check_feller(const CoefficientVector& coeffs) {
    return 2.0 * coeffs.kappa * coeffs.theta >= coeffs.xi * coeffs.xi;
}

} // namespace fastmr
