#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "optrf/kernels.hpp"
#include "optrf/rng.hpp"

namespace optrf {

inline constexpr std::size_t kDefaultDimCap = 4096;

/// Discretized data domain {0..G-1}^D and the matching feature lattice
/// {0, 1/G, ..., 1-1/G}^D. Both are enumerated by one global row-major
/// bijection with {0..G^D-1}; the first axis is the most significant digit.
struct GridDomain {
    int dim = 1;         // D
    int side = 2;        // G
    std::size_t size = 2;  // G^D

    static GridDomain make(int dim, int side, std::size_t cap = kDefaultDimCap);

    std::size_t index_of(std::span<const int> point) const;
    std::vector<int> point_at(std::size_t index) const;
    /// Feature lattice point v = point_at(index) / G, componentwise in [0,1).
    std::vector<double> lattice_point(std::size_t index) const;

    bool operator==(const GridDomain&) const = default;
};

/// Empirical data distribution q^(rho)(x) = n(x)/N over the grid.
struct EmpiricalDist {
    Eigen::VectorXd weights;   // length G^D, sums to 1
    long long count = 0;       // N
};

EmpiricalDist ingest_samples(const GridDomain& domain, std::span<const std::size_t> points);

/// Target function living in the RKHS of a translation-invariant kernel on the
/// grid: f = sum_j weights[j] * k(., centers[j]). `values` caches f on the
/// whole grid; `rkhs_norm` is sqrt(<f| k^{-1} |f>), which equals
/// sqrt(w^T K w) for kernel-synthesized targets.
struct RkhsFunction {
    GridDomain domain;
    KernelSpec kernel;
    std::vector<std::size_t> centers;           // kernel centers (synth_target form)
    std::vector<std::size_t> planted_features;  // lattice indices (planted_target form)
    Eigen::VectorXd weights;                    // kernel weights or planted amplitudes
    double rkhs_norm = 0.0;
    Eigen::VectorXd values;

    double operator()(std::size_t index) const { return values[static_cast<Eigen::Index>(index)]; }
};

RkhsFunction synth_target(const GridDomain& domain, const KernelSpec& kernel,
                          std::span<const std::size_t> centers, std::span<const double> raw_weights);

/// Target built directly from feature-map components
/// f(x) = sum_j amps[j] * exp(-2 pi i v_j . x); the feature multiset must be
/// conjugation-closed so that f is real. Unlike synth_target the weights are
/// taken as given (no normalization); rkhs_norm is still reported.
RkhsFunction planted_target(const GridDomain& domain, const KernelSpec& kernel,
                            std::span<const std::size_t> feature_indices,
                            std::span<const double> amplitudes);

/// Generating description of a synthetic dataset.
struct DatasetSpec {
    GridDomain domain;
    Eigen::VectorXd density;   // true p^(rho) over the grid, sums to 1
    RkhsFunction target;
    double lipschitz_f = 0.0;
    double lipschitz_q = 0.0;
    std::uint64_t seed = 0;
};

/// Rescale the spec by r > 1 (Table-1 bookkeeping): G -> rG, kernel bandwidth
/// and Lipschitz constants adjusted, density and target re-indexed so that
/// f_r(rx) = f(x). r*G must be integral within 1e-6.
DatasetSpec rescale(const DatasetSpec& spec, double r, std::size_t cap = kDefaultDimCap);

struct Dataset {
    std::vector<std::size_t> xs;  // grid indices
    Eigen::VectorXd ys;           // y_n = f(x_n), noiseless
    DatasetSpec spec;
};

/// N IID draws from spec.density; pure function of (spec, n, seed).
Dataset sample_dataset(const DatasetSpec& spec, long long n, std::uint64_t seed);

/// CSV with header x_0,...,x_{D-1},y; integer coordinates, decimal y.
void write_dataset_csv(const std::string& path, const Dataset& dataset);
std::vector<std::pair<std::vector<int>, double>> read_dataset_csv(const std::string& path);

}  // namespace optrf
