#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "optrf/grid.hpp"
#include "optrf/kernels.hpp"
#include "optrf/learn.hpp"

namespace optrf {

/// Config parse/validation failure with the offending line.
struct ConfigError : std::runtime_error {
    ConfigError(int line_number, const std::string& message)
        : std::runtime_error("line " + std::to_string(line_number) + ": " + message),
          line(line_number) {}
    int line;
};

/// Fully resolved experiment description, parsed from an INI-style file
/// ([section] headers, key = value pairs, # or ; comments).
struct ExperimentConfig {
    // [domain]
    int domain_d = 1;
    int domain_g = 8;
    // [kernel]
    std::string kernel_family = "laplacian";  // gaussian | laplacian | flat
    double gamma = 1.0;
    int theta_terms = 64;
    // [dataset]
    std::string density_spec = "uniform";  // uniform | point:I | support:I,... | cosine:K,A
    std::string target_spec;               // planted:V,...@A,... | rkhs:C,...@W,...
    long long n_samples = 1000;
    std::uint64_t data_seed = 0;
    // [sampler]
    std::string tier = "exact";  // exact | oracle-sim | circuit-sim | baseline
    double eps = 0.1;
    double delta = 0.01;
    // [learner]
    int m = 4;
    std::vector<int> m_sweep;  // defaults to {m}
    long long sgd_t = 1000;
    double radius_c = 4.0;
    std::vector<std::uint64_t> seeds = {0};  // "a..b" ranges or comma lists
    std::string schedule = "constant";       // constant | invsqrt
    double error_threshold = 0.05;
    double ridge_lambda = 0.0;
    // [output]
    std::string output_directory = "out";

    std::string to_ini() const;  // resolved form; reparsing reproduces the config

    // resolved objects (validated against `cap`, the G^D dense-operator limit)
    GridDomain make_domain(std::size_t cap = kDefaultDimCap) const;
    KernelSpec make_kernel() const;
    Eigen::VectorXd make_density(const GridDomain& domain) const;
    RkhsFunction make_target(const GridDomain& domain, const KernelSpec& kernel) const;
    DatasetSpec make_dataset_spec(std::size_t cap = kDefaultDimCap) const;
    SamplerTier make_tier() const;
    SgdSchedule make_schedule() const;

    bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace optrf
