#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "helpers.hpp"
#include "optrf/grid.hpp"

using namespace optrf;

TEST_CASE("domain construction and the row-major bijection") {
    const GridDomain d14 = GridDomain::make(1, 4);
    CHECK(d14.size == 4);
    CHECK(d14.lattice_point(0) == std::vector<double>{0.0});
    CHECK(d14.lattice_point(1) == std::vector<double>{0.25});
    CHECK(d14.lattice_point(3) == std::vector<double>{0.75});

    const GridDomain d24 = GridDomain::make(2, 4);
    CHECK(d24.size == 16);
    const std::vector<int> p{1, 2};
    CHECK(d24.index_of(p) == 6);
    CHECK(d24.point_at(6) == p);

    CHECK(GridDomain::make(3, 16).size == 4096);  // exactly at the cap
    CHECK_THROWS_AS(GridDomain::make(3, 17), std::length_error);
    CHECK_THROWS_AS(GridDomain::make(1, 5000), std::length_error);
    CHECK_THROWS_AS(GridDomain::make(0, 4), std::invalid_argument);
    CHECK_THROWS_AS(GridDomain::make(1, 1), std::invalid_argument);
    CHECK(GridDomain::make(1, 5000, 8192).size == 5000);  // cap is configurable
}

TEST_CASE("ingest_samples counts and normalizes") {
    const GridDomain domain = GridDomain::make(1, 4);
    const std::vector<std::size_t> pts{0, 0, 1, 3};
    const EmpiricalDist q = ingest_samples(domain, pts);
    CHECK(q.count == 4);
    CHECK(q.weights[0] == doctest::Approx(0.5));
    CHECK(q.weights[1] == doctest::Approx(0.25));
    CHECK(q.weights[2] == 0.0);
    CHECK(q.weights[3] == doctest::Approx(0.25));

    const std::vector<std::size_t> one{2};
    const EmpiricalDist point = ingest_samples(domain, one);
    CHECK(point.weights[2] == 1.0);

    CHECK_THROWS_AS(ingest_samples(domain, std::vector<std::size_t>{}), std::invalid_argument);
    CHECK_THROWS_AS(ingest_samples(domain, std::vector<std::size_t>{7}), std::out_of_range);
}

TEST_CASE("ingest_samples recovers a known density from 10k draws") {
    const GridDomain domain = GridDomain::make(1, 8);
    Eigen::VectorXd density(8);
    density << 0.05, 0.1, 0.2, 0.25, 0.15, 0.1, 0.1, 0.05;
    RandomStream rng(7);
    std::vector<std::size_t> pts;
    for (int i = 0; i < 10000; ++i)
        pts.push_back(rng.next_categorical(std::span<const double>(density.data(), 8)));
    const EmpiricalDist q = ingest_samples(domain, pts);
    CHECK((q.weights - density).cwiseAbs().maxCoeff() <= 0.02);
    CHECK(q.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (Eigen::Index i = 0; i < 8; ++i) {
        const double n_i = q.weights[i] * static_cast<double>(q.count);
        CHECK(n_i == doctest::Approx(std::round(n_i)).epsilon(1e-12));  // multiples of 1/N
    }
}

namespace {

DatasetSpec demo_spec(int g = 4, double gamma = 1.0) {
    DatasetSpec spec;
    spec.domain = GridDomain::make(1, g);
    spec.density = Eigen::VectorXd::Constant(g, 1.0 / g);
    const std::vector<std::size_t> centers{1};
    const std::vector<double> weights{0.5};
    spec.target = synth_target(spec.domain, KernelSpec::laplacian(gamma), centers, weights);
    spec.lipschitz_f = 1.0;
    spec.lipschitz_q = 0.16;
    spec.seed = 3;
    return spec;
}

}  // namespace

TEST_CASE("rescale bookkeeping follows the r > 1 table") {
    const DatasetSpec spec = demo_spec();
    const DatasetSpec doubled = rescale(spec, 2.0);
    CHECK(doubled.domain.side == 8);
    CHECK(doubled.lipschitz_f == doctest::Approx(0.5));
    CHECK(doubled.lipschitz_q == doctest::Approx(0.04));

    const DatasetSpec by4 = rescale(spec, 4.0);
    CHECK(by4.lipschitz_q == doctest::Approx(0.01));

    CHECK_THROWS_AS(rescale(spec, 1.0 + 1e-12), std::invalid_argument);
    CHECK_THROWS_AS(rescale(spec, 0.5), std::invalid_argument);
}

TEST_CASE("rescale keeps the target invariant on image points") {
    const DatasetSpec spec = demo_spec(4);
    const DatasetSpec doubled = rescale(spec, 2.0);
    for (std::size_t x = 0; x < spec.domain.size; ++x)
        CHECK(doubled.target(2 * x) == doctest::Approx(spec.target(x)).epsilon(1e-12));
    // mass moved with the points
    for (std::size_t x = 0; x < spec.domain.size; ++x)
        CHECK(doubled.density[static_cast<Eigen::Index>(2 * x)] ==
              doctest::Approx(spec.density[static_cast<Eigen::Index>(x)]));
}

TEST_CASE("rescale composes for integer factors") {
    const DatasetSpec spec = demo_spec(4);
    const DatasetSpec twice = rescale(rescale(spec, 2.0), 3.0);
    const DatasetSpec once = rescale(spec, 6.0);
    CHECK(twice.domain == once.domain);
    CHECK(twice.lipschitz_f == doctest::Approx(once.lipschitz_f).epsilon(1e-12));
    CHECK(twice.lipschitz_q == doctest::Approx(once.lipschitz_q).epsilon(1e-12));
    CHECK((twice.density - once.density).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((twice.target.values - once.target.values).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("synth_target normalizes the RKHS norm to at most one") {
    const GridDomain domain = GridDomain::make(1, 8);
    const KernelSpec kernel = KernelSpec::gaussian(1.0);
    const std::vector<std::size_t> centers{3};
    const std::vector<double> weights{1.0};
    const RkhsFunction f = synth_target(domain, kernel, centers, weights);
    // raw norm is sqrt(k(c,c)) = sqrt(k(0,0)) >= 1, so it lands on the boundary
    const double k00 = kernel_diagonal_value(kernel, domain);
    CHECK(k00 >= 1.0);
    CHECK(f.rkhs_norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.weights[0] == doctest::Approx(1.0 / std::sqrt(k00)).epsilon(1e-12));

    const std::vector<double> zero{0.0};
    CHECK_THROWS_AS(synth_target(domain, kernel, centers, zero), std::invalid_argument);
    const std::vector<std::size_t> dup{2, 2};
    const std::vector<double> cancel{1.0, -1.0};
    CHECK_THROWS_AS(synth_target(domain, kernel, dup, cancel), std::invalid_argument);
}

TEST_CASE("synth_target norm stays within the unit ball on random instances") {
    const GridDomain domain = GridDomain::make(1, 8);
    const KernelSpec kernel = KernelSpec::laplacian(0.7);
    RandomStream rng(21);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<std::size_t> centers;
        std::vector<double> weights;
        for (int j = 0; j < 3; ++j) {
            centers.push_back(rng.next_below(8));
            weights.push_back(4.0 * (rng.next_unit() - 0.5));
        }
        if (std::abs(weights[0]) + std::abs(weights[1]) + std::abs(weights[2]) < 1e-6) continue;
        const RkhsFunction f = synth_target(domain, kernel, centers, weights);
        CHECK(f.rkhs_norm <= 1.0 + 1e-12);
    }
}

TEST_CASE("planted targets are real and carry their RKHS norm") {
    const GridDomain domain = GridDomain::make(1, 16);
    const KernelSpec kernel = KernelSpec::laplacian(1.0);
    const std::vector<std::size_t> feats{5, 11, 7, 9};
    const std::vector<double> amps{0.25, 0.25, 0.25, 0.25};
    const RkhsFunction f = planted_target(domain, kernel, feats, amps);
    for (std::size_t x = 0; x < 16; ++x) {
        const double expected = 0.5 * std::cos(2.0 * std::numbers::pi * 5.0 * x / 16.0) +
                                0.5 * std::cos(2.0 * std::numbers::pi * 7.0 * x / 16.0);
        CHECK(f(x) == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(f.rkhs_norm > 1.0);  // reported, not normalized

    const std::vector<std::size_t> open{5, 7};  // not conjugation-closed
    const std::vector<double> a2{0.5, 0.5};
    CHECK_THROWS_AS(planted_target(domain, kernel, open, a2), std::invalid_argument);
}

TEST_CASE("sample_dataset is seeded, IID, and noiseless") {
    DatasetSpec spec = demo_spec(4);
    spec.density = Eigen::VectorXd::Zero(4);
    spec.density[3] = 1.0;
    const Dataset five = sample_dataset(spec, 5, 0);
    CHECK(five.xs == std::vector<std::size_t>{3, 3, 3, 3, 3});
    for (int i = 0; i < 5; ++i) CHECK(five.ys[i] == spec.target(3));

    DatasetSpec uniform = demo_spec(4);
    const Dataset big = sample_dataset(uniform, 10000, 1);
    const Eigen::VectorXd freq = optrf::testing::frequencies(big.xs, 4);
    CHECK((freq.array() - 0.25).abs().maxCoeff() <= 0.02);

    const Dataset again = sample_dataset(uniform, 10000, 1);
    CHECK(big.xs == again.xs);
    CHECK(big.ys == again.ys);
}

TEST_CASE("dataset CSV round-trips coordinates and labels") {
    const DatasetSpec spec = demo_spec(4);
    const Dataset data = sample_dataset(spec, 20, 9);
    const auto path = std::filesystem::temp_directory_path() / "optrf_dataset_test.csv";
    write_dataset_csv(path.string(), data);
    const auto rows = read_dataset_csv(path.string());
    REQUIRE(rows.size() == 20);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].first == spec.domain.point_at(data.xs[i]));
        CHECK(rows[i].second == doctest::Approx(data.ys[static_cast<Eigen::Index>(i)]));
    }
    std::filesystem::remove(path);
}
