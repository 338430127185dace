#include "optrf/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "optrf/grid.hpp"

namespace optrf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double theta3(double u, double q, int terms) {
    // theta(u; q) = 1 + 2 sum_{n>=1} q^{n^2} cos(2 n u)
    double s = 1.0;
    for (int n = 1; n <= terms; ++n) {
        const double t = std::pow(q, static_cast<double>(n) * n);
        if (t < 1e-300) break;
        s += 2.0 * t * std::cos(2.0 * n * u);
    }
    return s;
}

void check_closed_form(const KernelSpec& kernel) {
    if (kernel.family == KernelFamily::CustomWeight) return;
    if (!(kernel.gamma > 0.0) || !std::isfinite(kernel.gamma))
        throw std::invalid_argument("kernel gamma must be positive and finite");
    if (kernel.theta_terms < 1) throw std::invalid_argument("theta_terms must be >= 1");
}

}  // namespace

KernelSpec KernelSpec::gaussian(double gamma, int theta_terms) {
    KernelSpec k;
    k.family = KernelFamily::Gaussian;
    k.gamma = gamma;
    k.theta_terms = theta_terms;
    check_closed_form(k);
    return k;
}

KernelSpec KernelSpec::laplacian(double gamma) {
    KernelSpec k;
    k.family = KernelFamily::Laplacian;
    k.gamma = gamma;
    check_closed_form(k);
    return k;
}

KernelSpec KernelSpec::custom_weight(std::function<double(std::span<const double>)> weight) {
    KernelSpec k;
    k.family = KernelFamily::CustomWeight;
    k.custom = std::move(weight);
    if (!k.custom) throw std::invalid_argument("custom weight function must be set");
    return k;
}

double q_tau_weight(const KernelSpec& kernel, std::span<const double> v) {
    check_closed_form(kernel);
    switch (kernel.family) {
        case KernelFamily::Gaussian: {
            const double q = std::exp(-kernel.gamma);
            double prod = 1.0;
            for (double vd : v) prod *= theta3(std::numbers::pi * vd, q, kernel.theta_terms);
            return prod;
        }
        case KernelFamily::Laplacian: {
            const double sh = std::sinh(kernel.gamma);
            const double ch = std::cosh(kernel.gamma);
            double prod = 1.0;
            for (double vd : v) prod *= sh / (ch - std::cos(kTwoPi * vd));
            return prod;
        }
        case KernelFamily::CustomWeight: {
            if (!kernel.custom) throw std::invalid_argument("custom weight function must be set");
            const double w = kernel.custom(v);
            if (!(w > 0.0) || !std::isfinite(w))
                throw std::domain_error("custom kernel weight must be strictly positive");
            return w;
        }
    }
    throw std::logic_error("unreachable kernel family");
}

Eigen::VectorXd q_tau_vector(const KernelSpec& kernel, const GridDomain& domain) {
    Eigen::VectorXd q(static_cast<Eigen::Index>(domain.size));
    for (std::size_t i = 0; i < domain.size; ++i) {
        const auto v = domain.lattice_point(i);
        q[static_cast<Eigen::Index>(i)] = q_tau_weight(kernel, v);
    }
    return q;
}

double kernel_diagonal_value(const KernelSpec& kernel, const GridDomain& domain) {
    return q_tau_vector(kernel, domain).mean();
}

double q_tau_max(const KernelSpec& kernel, const GridDomain& domain) {
    double qmax = 0.0;
    if (kernel.family == KernelFamily::CustomWeight) {
        qmax = q_tau_vector(kernel, domain).maxCoeff();
    } else {
        // both closed-form weights are maximized at the zero frequency
        const std::vector<double> origin(static_cast<std::size_t>(domain.dim), 0.0);
        qmax = q_tau_weight(kernel, origin);
    }
    // lower bound Qmax >= k(0,0): Qmax is at least the lattice mean of Q
    const double k00 = kernel_diagonal_value(kernel, domain);
    if (qmax < k00 - 1e-9 * std::abs(k00))
        throw std::domain_error("kernel violates Qmax >= k(0,0)");
    return qmax;
}

Eigen::MatrixXcd dft_matrix(const GridDomain& domain) {
    const auto n = static_cast<Eigen::Index>(domain.size);
    const double g = static_cast<double>(domain.side);
    const double norm = 1.0 / std::sqrt(static_cast<double>(domain.size));
    Eigen::MatrixXcd f(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        const auto va = domain.point_at(static_cast<std::size_t>(a));
        for (Eigen::Index b = 0; b < n; ++b) {
            const auto xb = domain.point_at(static_cast<std::size_t>(b));
            long long dot = 0;
            for (int d = 0; d < domain.dim; ++d) dot += static_cast<long long>(va[d]) * xb[d];
            const double phase = -kTwoPi * static_cast<double>(dot % domain.side) / g;
            f(a, b) = norm * std::complex<double>(std::cos(phase), std::sin(phase));
        }
    }
    return f;
}

Eigen::MatrixXd gram_reconstructed(const KernelSpec& kernel, const GridDomain& domain) {
    const Eigen::MatrixXcd f = dft_matrix(domain);
    const Eigen::VectorXd q = q_tau_vector(kernel, domain);
    const Eigen::MatrixXcd k = f * q.asDiagonal() * f.adjoint();
    if (k.imag().cwiseAbs().maxCoeff() > 1e-10)
        throw std::runtime_error("reconstructed Gram has non-real entries");
    Eigen::MatrixXd kr = k.real();
    kr = 0.5 * (kr + kr.transpose()).eval();  // absorb roundoff asymmetry
    return kr;
}

Eigen::VectorXd gram_profile(const KernelSpec& kernel, const GridDomain& domain) {
    // t[d] = (1/G^D) sum_v Q(v) cos(2 pi v . d); one row of the Gram matrix
    const Eigen::VectorXd q = q_tau_vector(kernel, domain);
    const double g = static_cast<double>(domain.side);
    Eigen::VectorXd t(static_cast<Eigen::Index>(domain.size));
    for (std::size_t d = 0; d < domain.size; ++d) {
        const auto delta = domain.point_at(d);
        double acc = 0.0;
        for (std::size_t vi = 0; vi < domain.size; ++vi) {
            const auto vv = domain.point_at(vi);
            long long dot = 0;
            for (int k = 0; k < domain.dim; ++k) dot += static_cast<long long>(vv[k]) * delta[k];
            acc += q[static_cast<Eigen::Index>(vi)] *
                   std::cos(kTwoPi * static_cast<double>(dot % domain.side) / g);
        }
        t[static_cast<Eigen::Index>(d)] = acc / static_cast<double>(domain.size);
    }
    return t;
}

Eigen::MatrixXd gram_periodized(const KernelSpec& kernel, const GridDomain& domain, int n_max) {
    check_closed_form(kernel);
    if (kernel.family == KernelFamily::CustomWeight)
        throw std::invalid_argument("gram_periodized: no closed-form kernel for CustomWeight");
    if (n_max < 1) throw std::invalid_argument("gram_periodized: n_max must be >= 1");

    const auto n = static_cast<Eigen::Index>(domain.size);
    const int g = domain.side;
    Eigen::MatrixXd k(n, n);
    std::vector<int> offset(static_cast<std::size_t>(domain.dim));
    for (Eigen::Index a = 0; a < n; ++a) {
        const auto xa = domain.point_at(static_cast<std::size_t>(a));
        for (Eigen::Index b = 0; b < n; ++b) {
            const auto xb = domain.point_at(static_cast<std::size_t>(b));
            double sum = 0.0;
            // odometer over n in {-n_max..n_max}^D
            std::fill(offset.begin(), offset.end(), -n_max);
            while (true) {
                double dist = 0.0;
                for (int d = 0; d < domain.dim; ++d) {
                    const double delta = static_cast<double>(xa[d] - xb[d] - g * offset[d]);
                    if (kernel.family == KernelFamily::Gaussian)
                        dist += delta * delta;
                    else
                        dist += std::abs(delta);
                }
                sum += std::exp(-kernel.gamma * dist);
                int d = domain.dim - 1;
                while (d >= 0 && ++offset[d] == n_max + 1) offset[d--] = -n_max;
                if (d < 0) break;
            }
            k(a, b) = sum;
        }
    }
    return k;
}

Eigen::VectorXd p_tau(const KernelSpec& kernel, const GridDomain& domain) {
    Eigen::VectorXd q = q_tau_vector(kernel, domain);
    return q / q.sum();
}

bool is_unitary(const Eigen::MatrixXcd& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m * m.adjoint() - Eigen::MatrixXcd::Identity(m.rows(), m.cols()))
               .cwiseAbs()
               .maxCoeff() <= tol;
}

bool is_hermitian(const Eigen::MatrixXcd& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace optrf
