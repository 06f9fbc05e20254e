#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastmr/model.hpp"

namespace fastmr {

// Numerical knobs shared by the experiment drivers. T is the horizon of
// whatever the subcommand runs (ergodic window, SPDE horizon, study
// horizon); burn_in < 0 means the 10/kappa default.
struct NumericsConfig {
    double dx = 0.02;
    double dt = 1e-4;
    double x_max = 10.0;
    std::size_t n_outer = 500;
    std::size_t n_inner = 500;
    std::vector<double> eps_grid{0.5, 0.2, 0.1, 0.05}; // strictly decreasing
    double T = 1.0;
    double burn_in = -1.0;
};

struct ExperimentConfig {
    CoefficientVector coeffs;
    VolFunctionSpec spec;
    MarketConfig market;
    ScalingRegime regime = ScalingRegime::unscaled();
    NumericsConfig numerics;
    std::uint64_t seed = 1;
    std::string out_dir = ".";

    // Aggregates every violation instead of stopping at the first.
    std::vector<std::string> violations() const;
    void validate() const; // throws ConfigError listing all violations

    // Canonical key=value rendering; hashing this pins the run identity.
    std::string canonical_text() const;
};

class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& msg, std::vector<std::string> violations)
        : std::invalid_argument(msg), violations(std::move(violations)) {}
    std::vector<std::string> violations;
};

// Strict key=value parser ('#' comments, blank lines ignored). Unknown
// keys are errors; all parse and invariant violations are reported in
// one ConfigError.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

} // namespace fastmr
