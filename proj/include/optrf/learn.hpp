#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "optrf/grid.hpp"
#include "optrf/oracle.hpp"
#include "optrf/qsim.hpp"

namespace optrf {

/// Fitted random-feature model f_hat = sum_m alpha_m exp(-2 pi i v_m . x).
struct Model {
    GridDomain domain;
    std::vector<std::size_t> features;  // lattice indices of v_m
    Eigen::VectorXd coefficients;       // alpha, real
    Eigen::VectorXd q_values;           // sampled-law density weights Q(v_m)
};

enum class SgdSchedule { ConstantHorizon, InvSqrtT };

struct SgdConfig {
    long long iterations = 1000;          // T
    double radius = 1.0;                  // projection ball, c / sqrt(M Q_min)
    SgdSchedule schedule = SgdSchedule::ConstantHorizon;
    std::uint64_t seed = 0;
    double delta_fail = 0.05;             // failure probability bookkeeping
    double ridge_lambda = 0.0;            // optional L2 term, off by default
};

/// phi(v, x) = exp(-2 pi i v . x) for lattice/grid indices.
std::complex<double> feature_map(const GridDomain& domain, std::size_t v_index,
                                 std::size_t x_index);

/// Unbiased stochastic gradient of I(alpha) at one sample (x_t, y_t) and one
/// uniformly drawn term index m:
///   g_j = -2 Re[ phi(v_j, x_t) (y_t - M alpha_m conj(phi(v_m, x_t))) ].
Eigen::VectorXd gradient_estimate(const Eigen::VectorXd& alpha, std::size_t x_index, double y,
                                  int m, std::span<const std::size_t> features,
                                  const GridDomain& domain);

/// Exact gradient of I by full enumeration over the grid (the oracle the
/// stochastic estimate is checked against).
Eigen::VectorXd gradient_full(const Eigen::VectorXd& alpha, const Eigen::VectorXd& density,
                              const Eigen::VectorXd& f_values,
                              std::span<const std::size_t> features, const GridDomain& domain);

Eigen::VectorXd project_ball(Eigen::VectorXd alpha, double radius);

/// Projected SGD (Algorithm-3 shape): alpha^(1) = 0, one fresh sample and one
/// uniform m per step, eta^(t) = d/(L sqrt(T)) or d/(L sqrt(t)) with
/// d = 2 radius and L = 2 sqrt(M) (y_max + M radius). Returns alpha^(T+1).
/// `observer`, when set, sees every iterate.
Eigen::VectorXd sgd(std::span<const std::size_t> xs, std::span<const double> ys,
                    std::span<const std::size_t> features, const GridDomain& domain,
                    const SgdConfig& config,
                    const std::function<void(const Eigen::VectorXd&)>& observer = {});

/// Exact generalization error sum_x p(x) |f(x) - f_hat(x)|^2 on the grid.
double generalization_error(const Eigen::VectorXd& f_values, const Model& model,
                            const Eigen::VectorXd& density);
double generalization_error(const RkhsFunction& f, const Model& model,
                            const Eigen::VectorXd& density);

/// M IID draws from the data-independent law P(v).
std::vector<std::size_t> baseline_features(const KernelSpec& kernel, const GridDomain& domain,
                                           int m, RandomStream& rng);

enum class SamplerTier { Exact, OracleSim, CircuitSim, Baseline };

struct PipelineConfig {
    KernelSpec kernel;
    GridDomain domain;
    DatasetSpec data_spec;
    long long n_samples = 1000;
    SamplerTier tier = SamplerTier::Exact;
    double eps = 0.1;
    double delta = 0.01;
    int m_features = 4;
    long long sgd_iterations = 1000;
    double radius_c = 4.0;
    SgdSchedule schedule = SgdSchedule::InvSqrtT;
    double ridge_lambda = 0.0;
    std::uint64_t seed = 0;
};

struct PipelineResult {
    Model model;
    double final_error = 0.0;
    double q_min = 0.0;
    double d_eps = 0.0;
    CostLedger ledger_total;       // summed over the M feature draws
    CostLedger ledger_per_sample;  // one prepare-and-measure cycle (zeros off-circuit)
    OptimizedDist exact_dist;      // exact law used for Q* bookkeeping
    Eigen::VectorXd feature_law;   // law the configured tier actually samples from
    Dataset dataset;
};

/// Algorithm-2 pipeline: synthesize data, ingest, sample M features by the
/// configured tier, run SGD on the dataset stream, evaluate the exact
/// generalization error against the true density.
PipelineResult learn_pipeline(const PipelineConfig& config);

}  // namespace optrf
