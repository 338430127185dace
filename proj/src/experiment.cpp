#include "optrf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "optrf/csv.hpp"
#include "optrf/oracle.hpp"
#include "optrf/qsim.hpp"

namespace optrf {

namespace {

PipelineConfig make_pipeline_config(const ExperimentConfig& cfg, SamplerTier tier, int m,
                                    std::uint64_t seed, std::size_t cap) {
    PipelineConfig pc;
    pc.kernel = cfg.make_kernel();
    pc.domain = cfg.make_domain(cap);
    pc.data_spec = cfg.make_dataset_spec(cap);
    pc.n_samples = cfg.n_samples;
    pc.tier = tier;
    pc.eps = cfg.eps;
    pc.delta = cfg.delta;
    pc.m_features = m;
    pc.sgd_iterations = cfg.sgd_t;
    pc.radius_c = cfg.radius_c;
    pc.schedule = cfg.make_schedule();
    pc.ridge_lambda = cfg.ridge_lambda;
    // one independent stream per (data seed, run seed, M, tier) cell
    pc.seed = derive_seed(derive_seed(cfg.data_seed, seed),
                          derive_seed(static_cast<std::uint64_t>(m),
                                      static_cast<std::uint64_t>(tier) + 101));
    return pc;
}

struct RunRow {
    std::uint64_t seed = 0;
    int m = 0;
    PipelineResult result;
};

/// Evaluate jobs on a small worker pool; results land in deterministic slots.
template <typename Job, typename Fn>
void run_pool(const std::vector<Job>& jobs, Fn&& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>({jobs.size(), hw, 8});
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

void write_manifest(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    std::ofstream out(dir / "manifest.ini", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest");
    out << cfg.to_ini();
}

}  // namespace

void run_experiment(const ExperimentConfig& config, const std::string& output_dir,
                    std::size_t cap) {
    namespace fs = std::filesystem;
    const fs::path dir(output_dir);
    fs::create_directories(dir);
    write_manifest(config, dir);

    const SamplerTier tier = config.make_tier();
    std::vector<std::uint64_t> jobs = config.seeds;
    std::vector<RunRow> rows(jobs.size());
    run_pool(jobs, [&](std::size_t i) {
        rows[i].seed = jobs[i];
        rows[i].m = config.m;
        rows[i].result = learn_pipeline(make_pipeline_config(config, tier, config.m, jobs[i], cap));
    });

    const GridDomain domain = config.make_domain(cap);
    const KernelSpec kernel = config.make_kernel();
    const Eigen::VectorXd base_law = p_tau(kernel, domain);

    {
        CsvWriter csv((dir / "metrics.csv").string());
        for (const char* h : {"seed", "M", "eps", "tier", "T", "final_error", "q_min", "d_eps",
                              "rho_queries_total"})
            csv.field(std::string(h));
        csv.endrow();
        for (const auto& row : rows) {
            csv.field(static_cast<long long>(row.seed));
            csv.field(row.m);
            csv.field(config.eps);
            csv.field(config.tier);
            csv.field(config.sgd_t);
            csv.field(row.result.final_error);
            csv.field(row.result.q_min);
            csv.field(row.result.d_eps);
            csv.field(row.result.ledger_total.oracle_rho_queries);
            csv.endrow();
        }
    }
    {
        CsvWriter csv((dir / "features.csv").string());
        csv.field(std::string("seed"));
        csv.field(std::string("m"));
        csv.field(std::string("v_index"));
        for (int d = 0; d < domain.dim; ++d) csv.field("v_" + std::to_string(d));
        csv.field(std::string("alpha"));
        csv.field(std::string("q_star"));
        csv.endrow();
        for (const auto& row : rows) {
            for (std::size_t j = 0; j < row.result.model.features.size(); ++j) {
                csv.field(static_cast<long long>(row.seed));
                csv.field(j);
                csv.field(row.result.model.features[j]);
                for (double c : domain.lattice_point(row.result.model.features[j])) csv.field(c);
                csv.field(row.result.model.coefficients[static_cast<Eigen::Index>(j)]);
                csv.field(row.result.model.q_values[static_cast<Eigen::Index>(j)]);
                csv.endrow();
            }
        }
    }
    {
        // tier feature law vs pooled empirical draw frequencies
        Eigen::VectorXd empirical = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.size));
        long long total = 0;
        for (const auto& row : rows)
            for (std::size_t v : row.result.model.features) {
                empirical[static_cast<Eigen::Index>(v)] += 1.0;
                ++total;
            }
        if (total > 0) empirical /= static_cast<double>(total);
        OptimizedDist law = rows.front().result.exact_dist;
        law.probs = rows.front().result.feature_law;
        write_distribution_csv((dir / "distribution.csv").string(), domain, law, base_law,
                               &empirical);
    }
    {
        CsvWriter csv((dir / "ledger.csv").string());
        for (const char* h :
             {"seed", "sample", "rho_queries", "tau_queries", "qft_apps", "qsvt_degree", "amp_p",
              "amp_reps"})
            csv.field(std::string(h));
        csv.endrow();
        for (const auto& row : rows) {
            for (int j = 0; j < config.m; ++j) {
                csv.field(static_cast<long long>(row.seed));
                csv.field(j);
                const CostLedger& per = row.result.ledger_per_sample;
                csv.field(per.oracle_rho_queries);
                csv.field(per.oracle_tau_queries);
                csv.field(per.qft_applications);
                csv.field(per.qsvt_repetitions);
                csv.field(per.amp_success_prob);
                csv.field(per.amp_repetition_estimate);
                csv.endrow();
            }
        }
    }
}

void compare_m_requirements(const ExperimentConfig& config, const std::string& output_dir,
                            std::size_t cap) {
    namespace fs = std::filesystem;
    if (config.m_sweep.empty()) throw ConfigError(0, "learner.m_sweep must be nonempty");
    const fs::path dir(output_dir);
    fs::create_directories(dir);
    write_manifest(config, dir);

    const SamplerTier main_tier = config.make_tier();
    struct Job {
        SamplerTier tier;
        const char* name;
        int m;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& [tier, name] :
         std::vector<std::pair<SamplerTier, const char*>>{{main_tier, config.tier.c_str()},
                                                          {SamplerTier::Baseline, "baseline"}}) {
        if (tier == SamplerTier::Baseline && main_tier == SamplerTier::Baseline) continue;
        for (int m : config.m_sweep)
            for (std::uint64_t s : config.seeds) jobs.push_back({tier, name, m, s});
    }
    std::vector<double> errors(jobs.size());
    run_pool(jobs, [&](std::size_t i) {
        const auto& job = jobs[i];
        errors[i] =
            learn_pipeline(make_pipeline_config(config, job.tier, job.m, job.seed, cap))
                .final_error;
    });

    CsvWriter csv((dir / "comparison.csv").string());
    for (const char* h : {"sampler", "M", "seed", "final_error", "reached"})
        csv.field(std::string(h));
    csv.endrow();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        csv.field(std::string(jobs[i].name));
        csv.field(jobs[i].m);
        csv.field(static_cast<long long>(jobs[i].seed));
        csv.field(errors[i]);
        csv.field(static_cast<long long>(errors[i] <= config.error_threshold ? 1 : 0));
        csv.endrow();
    }

    // summary: median over seeds of the smallest sweep M reaching the threshold
    const int unreached = *std::max_element(config.m_sweep.begin(), config.m_sweep.end()) + 1;
    for (const auto& [tier, name] :
         std::vector<std::pair<SamplerTier, std::string>>{{main_tier, config.tier},
                                                          {SamplerTier::Baseline, "baseline"}}) {
        if (tier == SamplerTier::Baseline && main_tier == SamplerTier::Baseline) continue;
        std::vector<int> min_m;
        for (std::uint64_t s : config.seeds) {
            int best = unreached;
            for (std::size_t i = 0; i < jobs.size(); ++i)
                if (jobs[i].tier == tier && jobs[i].seed == s &&
                    errors[i] <= config.error_threshold)
                    best = std::min(best, jobs[i].m);
            min_m.push_back(best);
        }
        std::sort(min_m.begin(), min_m.end());
        const std::size_t n = min_m.size();
        const double median = (n % 2 == 1)
                                  ? min_m[n / 2]
                                  : 0.5 * (min_m[n / 2 - 1] + min_m[n / 2]);
        csv.field(std::string("summary_") + name);
        csv.field(std::string("median_m_to_threshold"));
        csv.field(static_cast<long long>(-1));
        csv.field(median >= unreached ? std::string("unreached") : format_double(median));
        csv.field(static_cast<long long>(median >= unreached ? 0 : 1));
        csv.endrow();
    }
}

}  // namespace optrf
