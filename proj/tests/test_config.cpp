#include <doctest.h>

#include "optrf/config.hpp"

using namespace optrf;

namespace {

const char* kMinimal = R"(
[domain]
d = 1
g = 8

[kernel]
family = laplacian
gamma = 1.0

[dataset]
density = uniform
target = rkhs:3@0.5
n = 500
seed = 2

[sampler]
tier = exact
eps = 0.1

[learner]
m = 2
t = 100
seeds = 0..3
)";

}  // namespace

TEST_CASE("minimal config parses with defaults") {
    const ExperimentConfig cfg = parse_config_text(kMinimal);
    CHECK(cfg.domain_d == 1);
    CHECK(cfg.domain_g == 8);
    CHECK(cfg.kernel_family == "laplacian");
    CHECK(cfg.n_samples == 500);
    CHECK(cfg.m == 2);
    CHECK(cfg.m_sweep == std::vector<int>{2});
    CHECK(cfg.seeds.size() == 4);
    CHECK(cfg.seeds.front() == 0);
    CHECK(cfg.seeds.back() == 3);
    CHECK(cfg.delta == 0.01);           // default
    CHECK(cfg.schedule == "constant");  // default
    CHECK(cfg.radius_c == 4.0);         // default

    const GridDomain domain = cfg.make_domain();
    CHECK(domain.size == 8);
    CHECK(cfg.make_density(domain).sum() == doctest::Approx(1.0));
    CHECK(cfg.make_target(domain, cfg.make_kernel()).values.size() == 8);
}

TEST_CASE("errors carry the line number and the key") {
    const std::string bad = "[learner]\nbogus = 3\n";
    try {
        parse_config_text(bad);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.line == 2);
        CHECK(std::string(e.what()).find("learner.bogus") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_config_text("[domain]\ng = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[nowhere]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("x = 1 = 2 y\n[domain]\n"), ConfigError);

    // semantic validation also reports through ConfigError
    std::string wrong_tier(kMinimal);
    wrong_tier += "\n[sampler]\ntier = warp\n";
    CHECK_THROWS_AS(parse_config_text(wrong_tier), ConfigError);
}

TEST_CASE("config round-trips through its serialized form") {
    ExperimentConfig cfg = parse_config_text(kMinimal);
    cfg.m_sweep = {2, 4, 6};
    cfg.tier = "circuit-sim";
    cfg.schedule = "invsqrt";
    cfg.error_threshold = 0.07;
    const ExperimentConfig back = parse_config_text(cfg.to_ini());
    CHECK(back == cfg);
}

TEST_CASE("density and target grammars") {
    const ExperimentConfig cfg = parse_config_text(kMinimal);
    const GridDomain domain = cfg.make_domain();

    ExperimentConfig support = cfg;
    support.density_spec = "support:2,3,4";
    const Eigen::VectorXd d = support.make_density(domain);
    CHECK(d[2] == doctest::Approx(1.0 / 3));
    CHECK(d[0] == 0.0);

    ExperimentConfig point = cfg;
    point.density_spec = "point:5";
    CHECK(point.make_density(domain)[5] == 1.0);

    ExperimentConfig cosine = cfg;
    cosine.density_spec = "cosine:2,0.5";
    const Eigen::VectorXd dc = cosine.make_density(domain);
    CHECK(dc.sum() == doctest::Approx(1.0));
    CHECK(dc.minCoeff() > 0.0);

    ExperimentConfig bad = cfg;
    bad.density_spec = "support:99";
    CHECK_THROWS_AS(bad.make_density(domain), ConfigError);

    ExperimentConfig planted = cfg;
    planted.target_spec = "planted:2,6@0.3,0.3";
    const RkhsFunction f = planted.make_target(domain, cfg.make_kernel());
    CHECK(f.planted_features.size() == 2);

    ExperimentConfig broken = cfg;
    broken.target_spec = "planted:2,6";
    CHECK_THROWS_AS(broken.make_target(domain, cfg.make_kernel()), ConfigError);
}
