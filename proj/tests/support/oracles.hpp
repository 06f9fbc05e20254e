// Closed-form reference values used to validate the simulators. Each
// oracle is implemented directly from textbook formulas, independent of
// the library code under test.
#pragma once

#include <cmath>
#include <vector>

namespace oracles {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// P[ min_{s<=T} (x + mu s + s_vol W_s) > 0 ] via the reflection principle
// (method of images) for drifted Brownian motion with absorbing barrier 0.
inline double images_survival(double x, double mu, double s_vol, double T) {
    if (x <= 0.0) return 0.0;
    const double sd = s_vol * std::sqrt(T);
    return normal_cdf((x + mu * T) / sd) -
           std::exp(-2.0 * mu * x / (s_vol * s_vol)) * normal_cdf((-x + mu * T) / sd);
}

inline double rayleigh_density(double x, double beta) {
    return x / (beta * beta) * std::exp(-x * x / (2.0 * beta * beta));
}

// Survival probability for x0 ~ Rayleigh(beta), by Simpson quadrature of
// the images formula against the initial density.
inline double rayleigh_images_survival(double beta, double mu, double s_vol, double T,
                                       double x_hi = 12.0, int n = 4000) {
    auto f = [&](double x) { return rayleigh_density(x, beta) * images_survival(x, mu, s_vol, T); };
    const double h = x_hi / n;
    double acc = f(0.0) + f(x_hi);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(h * i);
    return acc * h / 3.0;
}

// Ornstein-Uhlenbeck stationary law N(theta, xi^2/(2 kappa)) moments of
// the identity map.
inline double ou_sigma11(double theta) { return theta; }
inline double ou_sigma21(double theta, double kappa, double xi) {
    return std::sqrt(theta * theta + xi * xi / (2.0 * kappa));
}

inline double mean(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return m / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

} // namespace oracles
