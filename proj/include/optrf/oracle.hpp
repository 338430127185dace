#pragma once

#include <Eigen/Dense>

#include "optrf/grid.hpp"
#include "optrf/kernels.hpp"
#include "optrf/rng.hpp"

namespace optrf {

/// Regularized, normalized empirical operator
/// Sigma_eps = (1/Qmax) sqrt(q) k sqrt(q) + (eps/Qmax) I.
/// Spectrum of Sigma_eps / (1 + eps/Qmax) lies in [(eps/Qmax)/(1+eps/Qmax), 1],
/// so kappa = 1 + Qmax/eps bounds its condition number.
struct SigmaEps {
    Eigen::MatrixXd matrix;
    double epsilon = 0.0;
    double q_max = 1.0;
    double kappa = 1.0;
};

enum class Provenance { Exact, SimulatedOracleTier, SimulatedCircuitTier };

/// Data-optimized feature law Q*_eps(v) P(v) over the lattice.
struct OptimizedDist {
    Eigen::VectorXd probs;
    double epsilon = 0.0;
    Provenance provenance = Provenance::Exact;
};

/// Sigma = k diag(q); trace equals k(0,0).
Eigen::MatrixXd sigma_hat(const Eigen::MatrixXd& k, const EmpiricalDist& qhat);

/// Hermitian PSD symmetrization sqrt(q) k sqrt(q).
Eigen::MatrixXd sigma_symmetrized(const Eigen::MatrixXd& k, const EmpiricalDist& qhat);

SigmaEps sigma_eps(const Eigen::MatrixXd& k, const EmpiricalDist& qhat, double eps, double q_max);

/// Exact optimized distribution by matrix inversion:
/// probs(v) proportional to
///   <v| sqrt(Q/Qmax) F^dag sqrt(q) Sigma_eps^{-1} sqrt(q) F sqrt(Q/Qmax) |v>,
/// computed with a Hermitian factorization of Sigma_eps.
OptimizedDist optimized_distribution(const KernelSpec& kernel, const GridDomain& domain,
                                     const EmpiricalDist& qhat, double eps);

/// Degree of freedom d(eps) = sum_i lambda_i / (lambda_i + eps) for the
/// eigenvalues of a Hermitian PSD sigma (pass sigma_symmetrized output).
/// Eigenvalues in [-1e-10, 0) are clipped to 0; below that is an error.
double degree_of_freedom(const Eigen::MatrixXd& sigma, double eps);

/// Inverse-CDF draw of a lattice index from the exact distribution.
std::size_t reference_sample(const OptimizedDist& dist, RandomStream& rng);

/// CSV columns: v_index, v_0..v_{D-1}, prob, p_tau, q_star.
void write_distribution_csv(const std::string& path, const GridDomain& domain,
                            const OptimizedDist& dist, const Eigen::VectorXd& p_tau_probs,
                            const Eigen::VectorXd* empirical = nullptr);

}  // namespace optrf
