#include "optrf/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "optrf/csv.hpp"

namespace optrf {

Eigen::MatrixXd sigma_hat(const Eigen::MatrixXd& k, const EmpiricalDist& qhat) {
    if (k.rows() != k.cols() || k.cols() != qhat.weights.size())
        throw std::invalid_argument("sigma_hat: dimension mismatch");
    return k * qhat.weights.asDiagonal();
}

Eigen::MatrixXd sigma_symmetrized(const Eigen::MatrixXd& k, const EmpiricalDist& qhat) {
    if (k.rows() != k.cols() || k.cols() != qhat.weights.size())
        throw std::invalid_argument("sigma_symmetrized: dimension mismatch");
    const Eigen::VectorXd sq = qhat.weights.cwiseSqrt();
    return sq.asDiagonal() * k * sq.asDiagonal();
}

SigmaEps sigma_eps(const Eigen::MatrixXd& k, const EmpiricalDist& qhat, double eps, double q_max) {
    if (!(eps > 0.0)) throw std::invalid_argument("sigma_eps: eps must be positive");
    if (!(q_max > 0.0)) throw std::invalid_argument("sigma_eps: q_max must be positive");
    SigmaEps s;
    s.matrix = sigma_symmetrized(k, qhat) / q_max;
    s.matrix.diagonal().array() += eps / q_max;
    s.matrix = 0.5 * (s.matrix + s.matrix.transpose()).eval();
    s.epsilon = eps;
    s.q_max = q_max;
    s.kappa = 1.0 + q_max / eps;
    return s;
}

OptimizedDist optimized_distribution(const KernelSpec& kernel, const GridDomain& domain,
                                     const EmpiricalDist& qhat, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("optimized_distribution: eps must be positive");
    const Eigen::MatrixXd k = gram_reconstructed(kernel, domain);
    const double q_max = q_tau_max(kernel, domain);
    const SigmaEps se = sigma_eps(k, qhat, eps, q_max);

    const Eigen::MatrixXcd f = dft_matrix(domain);
    const Eigen::VectorXd sqrt_q_over_max = (q_tau_vector(kernel, domain) / q_max).cwiseSqrt();
    const Eigen::VectorXd sqrt_qhat = qhat.weights.cwiseSqrt();

    // columns b_v = sqrt(qhat) F sqrt(Q/Qmax) e_v; lev_v = b_v^dag Sigma_eps^{-1} b_v
    const Eigen::MatrixXcd b = sqrt_qhat.asDiagonal() * f * sqrt_q_over_max.asDiagonal();
    const Eigen::LDLT<Eigen::MatrixXd> fact(se.matrix);
    if (fact.info() != Eigen::Success)
        throw std::runtime_error("optimized_distribution: factorization failed");
    const Eigen::MatrixXd xr = fact.solve(b.real());
    const Eigen::MatrixXd xi = fact.solve(b.imag());

    Eigen::VectorXd lev(b.cols());
    for (Eigen::Index v = 0; v < b.cols(); ++v)
        lev[v] = b.col(v).real().dot(xr.col(v)) + b.col(v).imag().dot(xi.col(v));

    const double total = lev.sum();
    if (!(total > 0.0) || !std::isfinite(total))
        throw std::runtime_error("optimized_distribution: degenerate leverage vector");
    OptimizedDist out;
    out.probs = lev / total;
    out.epsilon = eps;
    out.provenance = Provenance::Exact;
    return out;
}

double degree_of_freedom(const Eigen::MatrixXd& sigma, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("degree_of_freedom: eps must be positive");
    if (sigma.rows() != sigma.cols())
        throw std::invalid_argument("degree_of_freedom: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("degree_of_freedom: eigendecomposition failed");
    double d = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        double lambda = es.eigenvalues()[i];
        if (lambda < -1e-10)
            throw std::runtime_error("degree_of_freedom: matrix has a negative eigenvalue");
        if (lambda < 0.0) lambda = 0.0;  // roundoff clip
        d += lambda / (lambda + eps);
    }
    return d;
}

std::size_t reference_sample(const OptimizedDist& dist, RandomStream& rng) {
    return rng.next_categorical(
        std::span<const double>(dist.probs.data(), static_cast<std::size_t>(dist.probs.size())));
}

void write_distribution_csv(const std::string& path, const GridDomain& domain,
                            const OptimizedDist& dist, const Eigen::VectorXd& p_tau_probs,
                            const Eigen::VectorXd* empirical) {
    CsvWriter csv(path);
    csv.field(std::string("v_index"));
    for (int d = 0; d < domain.dim; ++d) csv.field("v_" + std::to_string(d));
    csv.field(std::string("prob"));
    csv.field(std::string("p_tau"));
    csv.field(std::string("q_star"));
    if (empirical != nullptr) csv.field(std::string("empirical"));
    csv.endrow();
    for (std::size_t i = 0; i < domain.size; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        csv.field(i);
        for (double c : domain.lattice_point(i)) csv.field(c);
        csv.field(dist.probs[idx]);
        csv.field(p_tau_probs[idx]);
        csv.field(dist.probs[idx] / p_tau_probs[idx]);
        if (empirical != nullptr) csv.field((*empirical)[idx]);
        csv.endrow();
    }
}

}  // namespace optrf
