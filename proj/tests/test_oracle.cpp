#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "optrf/oracle.hpp"

using namespace optrf;
using optrf::testing::tv_distance;

namespace {

EmpiricalDist uniform_dist(std::size_t n) {
    return EmpiricalDist{Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / n),
                         static_cast<long long>(n)};
}

const KernelSpec kFlat = KernelSpec::custom_weight([](std::span<const double>) { return 1.0; });

}  // namespace

TEST_CASE("sigma_hat structure") {
    const GridDomain domain = GridDomain::make(1, 8);
    const EmpiricalDist q = optrf::testing::random_empirical(domain, 50, 3);

    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(8, 8);
    CHECK((sigma_hat(identity, q) - Eigen::MatrixXd(q.weights.asDiagonal())).norm() <= 1e-15);

    const KernelSpec lap = KernelSpec::laplacian(1.0);
    const Eigen::MatrixXd k = gram_reconstructed(lap, domain);
    CHECK(sigma_hat(k, q).trace() ==
          doctest::Approx(kernel_diagonal_value(lap, domain)).epsilon(1e-12));

    EmpiricalDist point{Eigen::VectorXd::Zero(8), 1};
    point.weights[2] = 1.0;
    const Eigen::MatrixXd rank1 = sigma_hat(k, point);
    for (int j = 0; j < 8; ++j)
        if (j != 2) CHECK(rank1.col(j).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(rank1.col(2).cwiseAbs().maxCoeff() > 0.1);

    Eigen::MatrixXd wrong(4, 4);
    CHECK_THROWS_AS(sigma_hat(wrong, q), std::invalid_argument);
}

TEST_CASE("sigma_eps spectrum and limits") {
    const GridDomain domain = GridDomain::make(1, 8);
    const EmpiricalDist uniform = uniform_dist(8);
    const Eigen::MatrixXd k_flat = gram_reconstructed(kFlat, domain);

    // delta kernel with uniform data: (1/n) I + I
    const SigmaEps se = sigma_eps(k_flat, uniform, 1.0, 1.0);
    CHECK((se.matrix - (1.0 / 8.0 + 1.0) * Eigen::MatrixXd::Identity(8, 8)).norm() <= 1e-12);
    CHECK(se.kappa == doctest::Approx(2.0));

    // eigenvalues of Sigma_eps shift by eps/Qmax relative to the symmetrized core
    const KernelSpec lap = KernelSpec::laplacian(1.0);
    const Eigen::MatrixXd k = gram_reconstructed(lap, domain);
    const EmpiricalDist q = optrf::testing::random_empirical(domain, 200, 5);
    const double qmax = q_tau_max(lap, domain);
    const SigmaEps s2 = sigma_eps(k, q, 0.1, qmax);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> a(s2.matrix);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> b(sigma_symmetrized(k, q) / qmax);
    CHECK((a.eigenvalues() - (b.eigenvalues().array() + 0.1 / qmax).matrix()).cwiseAbs().maxCoeff() <=
          1e-12);
    CHECK(a.eigenvalues().minCoeff() >= 0.1 / qmax - 1e-12);
    // normalized spectrum lives in [(eps/Qmax)/(1+eps/Qmax), 1]
    const double norm = 1.0 + 0.1 / qmax;
    CHECK(a.eigenvalues().maxCoeff() / norm <= 1.0 + 1e-12);

    const SigmaEps dominated = sigma_eps(k, q, 1e8 * qmax, qmax);
    CHECK((dominated.matrix - 1e8 * Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() /
              1e8 <=
          1e-7);

    CHECK_THROWS_AS(sigma_eps(k, q, 0.0, qmax), std::invalid_argument);
    CHECK_THROWS_AS(sigma_eps(k, q, -1.0, qmax), std::invalid_argument);
}

TEST_CASE("optimized distribution: limits, normalization, dual route") {
    const GridDomain domain = GridDomain::make(1, 8);
    const KernelSpec lap = KernelSpec::laplacian(1.0);
    const EmpiricalDist q = optrf::testing::random_empirical(domain, 200, 11);

    // large-eps limit collapses to the data-independent law
    for (const auto& kernel : {lap, KernelSpec::gaussian(1.0)}) {
        const double qmax = q_tau_max(kernel, domain);
        const OptimizedDist flat_eps = optimized_distribution(kernel, domain, q, 1e8 * qmax);
        CHECK(tv_distance(flat_eps.probs, p_tau(kernel, domain)) <= 1e-6);
    }

    // point-mass data with the flat weight: |phi(v, x0)|^2 = 1 for every v
    EmpiricalDist point{Eigen::VectorXd::Zero(8), 1};
    point.weights[5] = 1.0;
    const OptimizedDist unif = optimized_distribution(kFlat, domain, point, 0.3);
    CHECK((unif.probs.array() - 0.125).abs().maxCoeff() <= 1e-10);

    for (const double eps : {0.01, 0.1, 1.0}) {
        const OptimizedDist dist = optimized_distribution(lap, domain, q, eps);
        CHECK(dist.probs.sum() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(dist.provenance == Provenance::Exact);
        const Eigen::VectorXd route2 =
            optrf::testing::optimized_distribution_unsymmetrized(lap, domain, q, eps);
        CHECK((dist.probs - route2).cwiseAbs().maxCoeff() <= 1e-9);

        // reweighting consistency: Q* = probs / P is positive and averages to 1 under P
        const Eigen::VectorXd p = p_tau(lap, domain);
        double total = 0.0;
        for (int v = 0; v < 8; ++v) {
            const double qstar = dist.probs[v] / p[v];
            CHECK(qstar > 0.0);
            CHECK(std::isfinite(qstar));
            total += qstar * p[v];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }

    // zero-density points are fine (full-space Sigma_eps stays invertible)
    EmpiricalDist gappy{Eigen::VectorXd::Zero(8), 10};
    gappy.weights[2] = 0.4;
    gappy.weights[3] = 0.6;
    const OptimizedDist dist = optimized_distribution(lap, domain, gappy, 0.05);
    const Eigen::VectorXd route2 =
        optrf::testing::optimized_distribution_unsymmetrized(lap, domain, gappy, 0.05);
    CHECK((dist.probs - route2).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("degree of freedom") {
    Eigen::MatrixXd sigma = Eigen::Vector2d(1.0, 0.1).asDiagonal();
    CHECK(degree_of_freedom(sigma, 0.1) == doctest::Approx(1.4090909090909092).epsilon(1e-12));
    CHECK(degree_of_freedom(sigma, 1e9) <= 2e-9);
    CHECK(degree_of_freedom(sigma, 1e-12) == doctest::Approx(2.0).epsilon(1e-9));

    // strictly decreasing in eps; matches an independent solver-trace oracle
    const GridDomain domain = GridDomain::make(1, 8);
    const KernelSpec lap = KernelSpec::laplacian(1.0);
    const EmpiricalDist q = optrf::testing::random_empirical(domain, 100, 17);
    const Eigen::MatrixXd sym = sigma_symmetrized(gram_reconstructed(lap, domain), q);
    double previous = std::numeric_limits<double>::infinity();
    for (double eps = 1e-3; eps <= 1e2 + 1e-9; eps *= 10.0) {
        const double d = degree_of_freedom(sym, eps);
        CHECK(d < previous);
        previous = d;
        const Eigen::MatrixXd solved =
            (sym + eps * Eigen::MatrixXd::Identity(8, 8)).ldlt().solve(sym);
        CHECK(d == doctest::Approx(solved.trace()).epsilon(1e-10));
    }

    Eigen::MatrixXd negative = Eigen::Vector2d(1.0, -0.5).asDiagonal();
    CHECK_THROWS_AS(degree_of_freedom(negative, 0.1), std::runtime_error);
}

TEST_CASE("reference sampling from the exact law") {
    OptimizedDist point;
    point.probs = Eigen::VectorXd::Zero(4);
    point.probs[2] = 1.0;
    RandomStream rng(1);
    for (int i = 0; i < 20; ++i) CHECK(reference_sample(point, rng) == 2);

    OptimizedDist uniform;
    uniform.probs = Eigen::VectorXd::Constant(4, 0.25);
    RandomStream r3(3);
    std::vector<std::size_t> draws;
    for (int i = 0; i < 100000; ++i) draws.push_back(reference_sample(uniform, r3));
    const Eigen::VectorXd freq = optrf::testing::frequencies(draws, 4);
    CHECK((freq.array() - 0.25).abs().maxCoeff() <= 0.01);

    RandomStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(reference_sample(uniform, a) == reference_sample(uniform, b));
}
