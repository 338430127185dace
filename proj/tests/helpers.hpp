#pragma once

// Test-only oracles, independent of the implementation paths they check.

#include <Eigen/Dense>
#include <Eigen/LU>
#include <vector>

#include "optrf/grid.hpp"
#include "optrf/kernels.hpp"
#include "optrf/learn.hpp"
#include "optrf/oracle.hpp"

namespace optrf::testing {

inline double tv_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return 0.5 * (a - b).cwiseAbs().sum();
}

/// Second evaluation route for the optimized distribution: the non-symmetrized
/// form diag of sqrt(Q) F^dag qhat ((1/Qmax) k qhat + (eps/Qmax) I)^{-1} F sqrt(Q),
/// solved with a plain LU factorization of the non-Hermitian matrix.
inline Eigen::VectorXd optimized_distribution_unsymmetrized(const KernelSpec& kernel,
                                                            const GridDomain& domain,
                                                            const EmpiricalDist& qhat,
                                                            double eps) {
    const double q_max = q_tau_max(kernel, domain);
    const Eigen::MatrixXd k = gram_reconstructed(kernel, domain);
    const Eigen::MatrixXd m =
        k * qhat.weights.asDiagonal() / q_max +
        (eps / q_max) * Eigen::MatrixXd::Identity(k.rows(), k.cols());
    const Eigen::MatrixXcd f = dft_matrix(domain);
    const Eigen::VectorXd sq = (q_tau_vector(kernel, domain) / q_max).cwiseSqrt();
    const Eigen::MatrixXcd rhs =
        Eigen::MatrixXcd(f) * sq.cast<std::complex<double>>().asDiagonal();
    const Eigen::MatrixXcd solved = m.cast<std::complex<double>>().partialPivLu().solve(rhs);
    const Eigen::MatrixXcd left = sq.cast<std::complex<double>>().asDiagonal() * f.adjoint() *
                                  qhat.weights.cast<std::complex<double>>().asDiagonal() * solved;
    Eigen::VectorXd lev = left.diagonal().real();
    return lev / lev.sum();
}

/// Real-coefficient least squares for sum_x p(x) |f(x) - sum_m a_m phi_m(x)|^2.
inline double least_squares_error(const GridDomain& domain,
                                  const std::vector<std::size_t>& features,
                                  const Eigen::VectorXd& density, const Eigen::VectorXd& f_values) {
    const auto n = static_cast<Eigen::Index>(domain.size);
    const auto m = static_cast<Eigen::Index>(features.size());
    Eigen::MatrixXd a(2 * n, m);
    Eigen::VectorXd b(2 * n);
    for (Eigen::Index x = 0; x < n; ++x) {
        const double w = std::sqrt(density[x]);
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto phi =
                feature_map(domain, features[static_cast<std::size_t>(j)], static_cast<std::size_t>(x));
            a(x, j) = w * phi.real();
            a(n + x, j) = w * phi.imag();
        }
        b[x] = w * f_values[x];
        b[n + x] = 0.0;
    }
    const Eigen::VectorXd alpha = a.colPivHouseholderQr().solve(b);
    return (a * alpha - b).squaredNorm();
}

/// Empirical frequency vector from draws.
inline Eigen::VectorXd frequencies(const std::vector<std::size_t>& draws, std::size_t bins) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bins));
    for (std::size_t d : draws) f[static_cast<Eigen::Index>(d)] += 1.0;
    return f / static_cast<double>(draws.size());
}

inline EmpiricalDist random_empirical(const GridDomain& domain, int n_samples, std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<std::size_t> pts;
    pts.reserve(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) pts.push_back(rng.next_below(domain.size));
    return ingest_samples(domain, pts);
}

}  // namespace optrf::testing
