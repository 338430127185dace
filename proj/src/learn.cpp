#include "optrf/learn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace optrf {

std::complex<double> feature_map(const GridDomain& domain, std::size_t v_index,
                                 std::size_t x_index) {
    const auto v = domain.point_at(v_index);
    const auto x = domain.point_at(x_index);
    long long dot = 0;
    for (int d = 0; d < domain.dim; ++d) dot += static_cast<long long>(v[d]) * x[d];
    const double phase =
        -2.0 * std::numbers::pi * static_cast<double>(dot % domain.side) / domain.side;
    return {std::cos(phase), std::sin(phase)};
}

Eigen::VectorXd gradient_estimate(const Eigen::VectorXd& alpha, std::size_t x_index, double y,
                                  int m, std::span<const std::size_t> features,
                                  const GridDomain& domain) {
    const auto big_m = static_cast<Eigen::Index>(features.size());
    if (m < 0 || m >= big_m) throw std::out_of_range("gradient_estimate: m out of range");
    if (alpha.size() != big_m)
        throw std::invalid_argument("gradient_estimate: alpha does not match features");
    const std::complex<double> resid =
        y - static_cast<double>(big_m) * alpha[m] *
                std::conj(feature_map(domain, features[static_cast<std::size_t>(m)], x_index));
    Eigen::VectorXd g(big_m);
    for (Eigen::Index j = 0; j < big_m; ++j)
        g[j] = -2.0 *
               std::real(feature_map(domain, features[static_cast<std::size_t>(j)], x_index) *
                         resid);
    return g;
}

Eigen::VectorXd gradient_full(const Eigen::VectorXd& alpha, const Eigen::VectorXd& density,
                              const Eigen::VectorXd& f_values,
                              std::span<const std::size_t> features, const GridDomain& domain) {
    const auto big_m = static_cast<Eigen::Index>(features.size());
    Eigen::VectorXd g = Eigen::VectorXd::Zero(big_m);
    for (std::size_t x = 0; x < domain.size; ++x) {
        const double p = density[static_cast<Eigen::Index>(x)];
        if (p == 0.0) continue;
        std::complex<double> fhat = 0.0;
        for (Eigen::Index j = 0; j < big_m; ++j)
            fhat += alpha[j] * feature_map(domain, features[static_cast<std::size_t>(j)], x);
        const std::complex<double> resid_conj =
            f_values[static_cast<Eigen::Index>(x)] - std::conj(fhat);
        for (Eigen::Index j = 0; j < big_m; ++j)
            g[j] += p * -2.0 *
                    std::real(feature_map(domain, features[static_cast<std::size_t>(j)], x) *
                              resid_conj);
    }
    return g;
}

Eigen::VectorXd project_ball(Eigen::VectorXd alpha, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("project_ball: radius must be positive");
    const double norm = alpha.norm();
    if (norm > radius) alpha *= radius / norm;
    return alpha;
}

Eigen::VectorXd sgd(std::span<const std::size_t> xs, std::span<const double> ys,
                    std::span<const std::size_t> features, const GridDomain& domain,
                    const SgdConfig& config,
                    const std::function<void(const Eigen::VectorXd&)>& observer) {
    const auto big_m = static_cast<Eigen::Index>(features.size());
    if (big_m == 0) throw std::invalid_argument("sgd: feature list is empty");
    if (config.iterations < 1) throw std::invalid_argument("sgd: iterations must be >= 1");
    if (static_cast<long long>(xs.size()) < config.iterations || xs.size() != ys.size())
        throw std::runtime_error("sgd: data stream exhausted before T iterations");

    double y_max = 0.0;
    for (double y : ys) y_max = std::max(y_max, std::abs(y));
    const double diameter = 2.0 * config.radius;
    const double grad_bound =
        2.0 * std::sqrt(static_cast<double>(big_m)) *
        (y_max + static_cast<double>(big_m) * config.radius);

    // phase table phi(v_j, x) over the grid; the loop is the gradient_estimate
    // formula evaluated through it
    Eigen::MatrixXcd phi(static_cast<Eigen::Index>(domain.size), big_m);
    for (Eigen::Index j = 0; j < big_m; ++j)
        for (std::size_t x = 0; x < domain.size; ++x)
            phi(static_cast<Eigen::Index>(x), j) =
                feature_map(domain, features[static_cast<std::size_t>(j)], x);

    RandomStream rng(config.seed);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(big_m);
    Eigen::VectorXd g(big_m);
    for (long long t = 1; t <= config.iterations; ++t) {
        const auto i = static_cast<std::size_t>(t - 1);
        const int m = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(big_m)));
        const auto x = static_cast<Eigen::Index>(xs[i]);
        const std::complex<double> resid =
            ys[i] - static_cast<double>(big_m) * alpha[m] * std::conj(phi(x, m));
        for (Eigen::Index j = 0; j < big_m; ++j) g[j] = -2.0 * std::real(phi(x, j) * resid);
        if (config.ridge_lambda > 0.0) g += 2.0 * config.ridge_lambda * alpha;
        const double denom = (config.schedule == SgdSchedule::ConstantHorizon)
                                 ? std::sqrt(static_cast<double>(config.iterations))
                                 : std::sqrt(static_cast<double>(t));
        const double eta = diameter / (grad_bound * denom);
        alpha = project_ball(alpha - eta * g, config.radius);
        if (observer) observer(alpha);
    }
    return alpha;
}

double generalization_error(const Eigen::VectorXd& f_values, const Model& model,
                            const Eigen::VectorXd& density) {
    if (f_values.size() != density.size() ||
        f_values.size() != static_cast<Eigen::Index>(model.domain.size))
        throw std::invalid_argument("generalization_error: dimension mismatch");
    double err = 0.0;
    for (std::size_t x = 0; x < model.domain.size; ++x) {
        const double p = density[static_cast<Eigen::Index>(x)];
        if (p == 0.0) continue;
        std::complex<double> fhat = 0.0;
        for (std::size_t j = 0; j < model.features.size(); ++j)
            fhat += model.coefficients[static_cast<Eigen::Index>(j)] *
                    feature_map(model.domain, model.features[j], x);
        err += p * std::norm(f_values[static_cast<Eigen::Index>(x)] - fhat);
    }
    return err;
}

double generalization_error(const RkhsFunction& f, const Model& model,
                            const Eigen::VectorXd& density) {
    return generalization_error(f.values, model, density);
}

std::vector<std::size_t> baseline_features(const KernelSpec& kernel, const GridDomain& domain,
                                           int m, RandomStream& rng) {
    if (m < 1) throw std::invalid_argument("baseline_features: M must be >= 1");
    const Eigen::VectorXd probs = p_tau(kernel, domain);
    std::vector<std::size_t> out(static_cast<std::size_t>(m));
    for (auto& v : out)
        v = rng.next_categorical(
            std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())));
    return out;
}

PipelineResult learn_pipeline(const PipelineConfig& config) {
    if (config.m_features < 1) throw std::invalid_argument("learn_pipeline: M must be >= 1");

    PipelineResult result;
    result.dataset =
        sample_dataset(config.data_spec, config.n_samples, derive_seed(config.seed, 0xda7a));
    const EmpiricalDist qhat = ingest_samples(config.domain, result.dataset.xs);

    // exact optimized law (ground truth for Q* bookkeeping, and the Exact tier)
    result.exact_dist = optimized_distribution(config.kernel, config.domain, qhat, config.eps);
    const Eigen::VectorXd base_law = p_tau(config.kernel, config.domain);

    RandomStream feature_rng(derive_seed(config.seed, 0xfea7));
    Model model;
    model.domain = config.domain;
    model.features.reserve(static_cast<std::size_t>(config.m_features));
    switch (config.tier) {
        case SamplerTier::Exact: {
            for (int i = 0; i < config.m_features; ++i)
                model.features.push_back(reference_sample(result.exact_dist, feature_rng));
            result.feature_law = result.exact_dist.probs;
            break;
        }
        case SamplerTier::OracleSim:
        case SamplerTier::CircuitSim: {
            const SimTier tier =
                config.tier == SamplerTier::OracleSim ? SimTier::Oracle : SimTier::Circuit;
            const FeatureSampler sampler(config.kernel, config.domain, qhat, config.eps, tier,
                                         config.delta);
            result.feature_law = sampler.feature_law();
            result.ledger_per_sample = sampler.ledger_per_sample();
            for (int i = 0; i < config.m_features; ++i) {
                model.features.push_back(sampler.sample(feature_rng));
                const CostLedger& per = sampler.ledger_per_sample();
                result.ledger_total.oracle_rho_queries += per.oracle_rho_queries;
                result.ledger_total.oracle_tau_queries += per.oracle_tau_queries;
                result.ledger_total.qft_applications += per.qft_applications;
                result.ledger_total.qsvt_repetitions += per.qsvt_repetitions;
                result.ledger_total.amp_success_prob = per.amp_success_prob;
                result.ledger_total.amp_repetition_estimate = per.amp_repetition_estimate;
            }
            break;
        }
        case SamplerTier::Baseline: {
            model.features =
                baseline_features(config.kernel, config.domain, config.m_features, feature_rng);
            result.feature_law = base_law;
            break;
        }
    }

    // Q values of the sampled law: Q*_eps for optimized tiers, 1 for baseline
    model.q_values.resize(config.m_features);
    for (int i = 0; i < config.m_features; ++i) {
        const auto v = static_cast<Eigen::Index>(model.features[static_cast<std::size_t>(i)]);
        model.q_values[i] = (config.tier == SamplerTier::Baseline)
                                ? 1.0
                                : result.exact_dist.probs[v] / base_law[v];
    }
    result.q_min = model.q_values.minCoeff();

    SgdConfig sgd_config;
    sgd_config.iterations = config.sgd_iterations;
    sgd_config.radius =
        config.radius_c / std::sqrt(static_cast<double>(config.m_features) *
                                    std::max(result.q_min, 1e-12));
    sgd_config.schedule = config.schedule;
    sgd_config.seed = derive_seed(config.seed, 0x59d0);
    sgd_config.ridge_lambda = config.ridge_lambda;
    std::vector<double> ys(result.dataset.ys.data(),
                           result.dataset.ys.data() + result.dataset.ys.size());
    model.coefficients =
        sgd(result.dataset.xs, ys, model.features, config.domain, sgd_config);

    result.final_error =
        generalization_error(config.data_spec.target, model, config.data_spec.density);
    const Eigen::MatrixXd k = gram_reconstructed(config.kernel, config.domain);
    result.d_eps = degree_of_freedom(sigma_symmetrized(k, qhat), config.eps);
    result.model = std::move(model);
    return result;
}

}  // namespace optrf
