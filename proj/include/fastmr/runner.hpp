#pragma once

#include <ostream>
#include <string>

#include "fastmr/config.hpp"
#include "fastmr/io.hpp"

namespace fastmr {

inline constexpr const char* kToolVersion = "0.1.0";

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitBand = 3;

struct RunOptions {
    std::string subcommand;
    bool deep = false; // run the slower, higher-resolution variants
};

// Dispatches one subcommand, writes its CSVs plus manifest.json into
// cfg.out_dir, and returns the process exit code. All module errors are
// mapped here: validation -> 1, numerical -> 2, out-of-band result -> 3.
int run_experiment(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log);

} // namespace fastmr
