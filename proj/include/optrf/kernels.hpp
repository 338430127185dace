#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <span>

namespace optrf {

struct GridDomain;

enum class KernelFamily { Gaussian, Laplacian, CustomWeight };

/// Translation-invariant kernel described by its lattice Fourier weight
/// Q(v) (Gaussian: product of theta functions; Laplacian: product of
/// sinh(g)/(cosh(g)-cos(2 pi v_d)) factors). CustomWeight supplies Q directly
/// and is meant for tests (e.g. Q == 1 gives the delta kernel).
struct KernelSpec {
    KernelFamily family = KernelFamily::Laplacian;
    double gamma = 1.0;
    int theta_terms = 64;
    std::function<double(std::span<const double>)> custom;

    static KernelSpec gaussian(double gamma, int theta_terms = 64);
    static KernelSpec laplacian(double gamma);
    static KernelSpec custom_weight(std::function<double(std::span<const double>)> weight);
};

/// Q(v) at one lattice point; strictly positive for the closed-form families.
double q_tau_weight(const KernelSpec& kernel, std::span<const double> v);

/// Q(v) for every lattice index of the domain.
Eigen::VectorXd q_tau_vector(const KernelSpec& kernel, const GridDomain& domain);

/// max Q over the lattice: Q(0) for Gaussian/Laplacian, full scan for
/// CustomWeight. Checks the k(0,0) lower bound.
double q_tau_max(const KernelSpec& kernel, const GridDomain& domain);

/// Unitary DFT, <v|F|x> = G^{-D/2} exp(-2 pi i v.x / G). Symmetric.
Eigen::MatrixXcd dft_matrix(const GridDomain& domain);

/// Gram operator via perfect reconstruction, k = F diag(Q) F^dag.
/// Real symmetric with constant diagonal sum_v Q(v)/G^D.
Eigen::MatrixXd gram_reconstructed(const KernelSpec& kernel, const GridDomain& domain);

/// Brute-force oracle: k(x',x) = sum_{|n|_inf <= n_max} k_closed(x', x + G n).
/// Gaussian and Laplacian only.
Eigen::MatrixXd gram_periodized(const KernelSpec& kernel, const GridDomain& domain, int n_max = 8);

/// Data-independent feature law P(v) = Q(v) / sum Q.
Eigen::VectorXd p_tau(const KernelSpec& kernel, const GridDomain& domain);

/// k(0,0) = sum_v Q(v)/G^D (normalization identity).
double kernel_diagonal_value(const KernelSpec& kernel, const GridDomain& domain);

/// Translation-invariant profile t[d] = k(x + d, x), indexed by the grid
/// offset d (row-major, componentwise mod G). One row of the Gram matrix.
Eigen::VectorXd gram_profile(const KernelSpec& kernel, const GridDomain& domain);

bool is_unitary(const Eigen::MatrixXcd& m, double tol = 1e-12);
bool is_hermitian(const Eigen::MatrixXcd& m, double tol = 1e-12);

}  // namespace optrf
