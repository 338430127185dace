#pragma once

#include <string>

#include "optrf/config.hpp"

namespace optrf {

/// One pipeline run per configured seed. Writes into the output directory:
/// manifest.ini, metrics.csv, features.csv, distribution.csv, ledger.csv.
void run_experiment(const ExperimentConfig& config, const std::string& output_dir,
                    std::size_t cap = kDefaultDimCap);

/// Full (sampler x M x seed) grid over the configured tier and the baseline
/// P-law sampler; writes comparison.csv (one row per run) and summary rows
/// with the median M needed to reach the error threshold.
void compare_m_requirements(const ExperimentConfig& config, const std::string& output_dir,
                            std::size_t cap = kDefaultDimCap);

/// Compact invariant suite; prints one line per check, returns true when all
/// checks pass.
bool selftest();

/// CLI entry point (subcommands run / compare / selftest). Exit codes:
/// 0 success, 2 config error, 1 anything else.
int cli_main(int argc, char** argv);

}  // namespace optrf
