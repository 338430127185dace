#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "optrf/experiment.hpp"
#include "optrf/oracle.hpp"
#include "optrf/qsim.hpp"

namespace optrf {

namespace {

std::size_t dim_cap_from_env() {
    if (const char* env = std::getenv("OPTRF_MAX_DIM")) {
        const long long v = std::atoll(env);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return kDefaultDimCap;
}

bool check(const char* name, bool ok) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
    return ok;
}

double tv_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return 0.5 * (a - b).cwiseAbs().sum();
}

}  // namespace

bool selftest() {
    bool ok = true;
    const GridDomain domain = GridDomain::make(1, 8);
    const KernelSpec kernel = KernelSpec::laplacian(1.0);

    ok &= check("perfect reconstruction (Laplacian gamma=1, G=8, n_max=8)",
                (gram_reconstructed(kernel, domain) - gram_periodized(kernel, domain, 8))
                        .cwiseAbs()
                        .maxCoeff() < 1e-8);

    RandomStream rng(7);
    std::vector<std::size_t> points;
    for (int i = 0; i < 200; ++i) points.push_back(rng.next_below(domain.size));
    const EmpiricalDist qhat = ingest_samples(domain, points);

    const OptimizedDist exact = optimized_distribution(kernel, domain, qhat, 0.1);
    const auto [psi, ledger] = prepare_psi(kernel, domain, qhat, 0.1, SimTier::Oracle, 0.01);
    ok &= check("oracle-tier measurement marginal matches the exact law (TV <= 1e-10)",
                tv_distance(psi.marginal(1), exact.probs) <= 1e-10);

    const BlockEncoding be_q = be_sqrt_qtau(kernel, domain, 1e-3);
    const Eigen::VectorXd sq =
        (q_tau_vector(kernel, domain) / q_tau_max(kernel, domain)).cwiseSqrt();
    ok &= check("sqrt(Q/Qmax) block encoding residual <= 1e-3",
                (be_q.encoded_block() - Eigen::MatrixXcd(sq.cast<std::complex<double>>().asDiagonal()))
                        .cwiseAbs()
                        .maxCoeff() <= 1e-3);

    const BlockEncoding be_s = be_sigma_eps(kernel, domain, qhat, 0.1, 1e-3);
    const SigmaEps se =
        sigma_eps(gram_reconstructed(kernel, domain), qhat, 0.1, q_tau_max(kernel, domain));
    const double scale = 1.0 + 0.1 / q_tau_max(kernel, domain);
    ok &= check("Sigma_eps block encoding residual <= 1e-3",
                (be_s.encoded_block() -
                 (se.matrix / scale).cast<std::complex<double>>())
                        .cwiseAbs()
                        .maxCoeff() <= 1e-3);

    const double qmax = q_tau_max(kernel, domain);
    const OptimizedDist flat = optimized_distribution(kernel, domain, qhat, 1e8 * qmax);
    ok &= check("large-eps optimized law collapses to P (TV <= 1e-6)",
                tv_distance(flat.probs, p_tau(kernel, domain)) <= 1e-6);

    // gradient estimator unbiasedness by full enumeration
    RandomStream grng(11);
    bool grad_ok = true;
    for (int rep = 0; rep < 3 && grad_ok; ++rep) {
        std::vector<std::size_t> features;
        for (int j = 0; j < 4; ++j) features.push_back(grng.next_below(domain.size));
        Eigen::VectorXd alpha(4), density(8), fvals(8);
        for (int j = 0; j < 4; ++j) alpha[j] = grng.next_unit() - 0.5;
        for (int x = 0; x < 8; ++x) {
            density[x] = grng.next_unit() + 0.1;
            fvals[x] = grng.next_unit() - 0.5;
        }
        density /= density.sum();
        Eigen::VectorXd avg = Eigen::VectorXd::Zero(4);
        for (std::size_t x = 0; x < domain.size; ++x)
            for (int m = 0; m < 4; ++m)
                avg += density[static_cast<Eigen::Index>(x)] / 4.0 *
                       gradient_estimate(alpha, x, fvals[static_cast<Eigen::Index>(x)], m,
                                         features, domain);
        grad_ok = (avg - gradient_full(alpha, density, fvals, features, domain)).cwiseAbs()
                      .maxCoeff() <= 1e-12;
    }
    ok &= check("stochastic gradient is unbiased against full enumeration (1e-12)", grad_ok);

    std::vector<double> w{0.3};
    std::vector<std::size_t> c{3};
    DatasetSpec spec;
    spec.domain = domain;
    spec.density = Eigen::VectorXd::Constant(8, 0.125);
    spec.target = synth_target(domain, kernel, c, w);
    const Dataset d1 = sample_dataset(spec, 100, 5);
    const Dataset d2 = sample_dataset(spec, 100, 5);
    ok &= check("seeded dataset synthesis is reproducible", d1.xs == d2.xs && d1.ys == d2.ys);

    return ok;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"optimized random features: exact oracle, statevector simulator, learner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::string tier_override;
    long long seed_override = -1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "experiment config file")->required();
        sub->add_option("--output-dir", output_dir, "output directory override");
        sub->add_option("--seed-override", seed_override, "replace the seed list with one seed");
        sub->add_option("--tier-override", tier_override,
                        "exact | oracle-sim | circuit-sim | baseline");
    };
    CLI::App* run_cmd = app.add_subcommand("run", "run the learning pipeline per seed");
    add_common(run_cmd);
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "M-sweep comparison against baseline sampling");
    add_common(compare_cmd);
    CLI::App* selftest_cmd = app.add_subcommand("selftest", "run the invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (selftest_cmd->parsed()) return selftest() ? 0 : 1;

        ExperimentConfig cfg = parse_config_file(config_path);
        if (seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
        if (!tier_override.empty()) {
            cfg.tier = tier_override;
            if (cfg.tier != "exact" && cfg.tier != "oracle-sim" && cfg.tier != "circuit-sim" &&
                cfg.tier != "baseline")
                throw ConfigError(0, "invalid --tier-override '" + tier_override + "'");
        }
        const std::string dir = output_dir.empty() ? cfg.output_directory : output_dir;
        const std::size_t cap = dim_cap_from_env();
        if (run_cmd->parsed()) {
            run_experiment(cfg, dir, cap);
            std::cout << "wrote " << dir << "\n";
        } else {
            compare_m_requirements(cfg, dir, cap);
            std::cout << "wrote " << dir << "/comparison.csv\n";
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace optrf
