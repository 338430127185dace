#include "optrf/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "optrf/csv.hpp"

namespace optrf {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

double parse_double(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(line, "key '" + key + "': expected a number, got '" + v + "'");
    }
}

long long parse_int(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(line, "key '" + key + "': expected an integer, got '" + v + "'");
    }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& v, int line, const std::string& key) {
    std::vector<std::uint64_t> out;
    const auto range_pos = v.find("..");
    if (range_pos != std::string::npos) {
        const auto lo = parse_int(trim(v.substr(0, range_pos)), line, key);
        const auto hi = parse_int(trim(v.substr(range_pos + 2)), line, key);
        if (lo > hi) throw ConfigError(line, "key '" + key + "': empty range");
        for (long long s = lo; s <= hi; ++s) out.push_back(static_cast<std::uint64_t>(s));
        return out;
    }
    for (const auto& item : split(v, ','))
        if (!item.empty()) out.push_back(static_cast<std::uint64_t>(parse_int(item, line, key)));
    if (out.empty()) throw ConfigError(line, "key '" + key + "': empty list");
    return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    cfg.m_sweep.clear();

    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    bool m_set = false;

    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find_first_of("#;");
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "domain" && section != "kernel" && section != "dataset" &&
                section != "sampler" && section != "learner" && section != "output")
                throw ConfigError(line, "unknown section '" + section + "'");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(line, "empty key");
        const std::string qual = section + "." + key;

        if (qual == "domain.d")
            cfg.domain_d = static_cast<int>(parse_int(value, line, qual));
        else if (qual == "domain.g")
            cfg.domain_g = static_cast<int>(parse_int(value, line, qual));
        else if (qual == "kernel.family")
            cfg.kernel_family = value;
        else if (qual == "kernel.gamma")
            cfg.gamma = parse_double(value, line, qual);
        else if (qual == "kernel.theta_terms")
            cfg.theta_terms = static_cast<int>(parse_int(value, line, qual));
        else if (qual == "dataset.density")
            cfg.density_spec = value;
        else if (qual == "dataset.target")
            cfg.target_spec = value;
        else if (qual == "dataset.n")
            cfg.n_samples = parse_int(value, line, qual);
        else if (qual == "dataset.seed")
            cfg.data_seed = static_cast<std::uint64_t>(parse_int(value, line, qual));
        else if (qual == "sampler.tier")
            cfg.tier = value;
        else if (qual == "sampler.eps")
            cfg.eps = parse_double(value, line, qual);
        else if (qual == "sampler.delta")
            cfg.delta = parse_double(value, line, qual);
        else if (qual == "learner.m") {
            cfg.m = static_cast<int>(parse_int(value, line, qual));
            m_set = true;
        } else if (qual == "learner.m_sweep") {
            for (const auto& item : split(value, ','))
                if (!item.empty())
                    cfg.m_sweep.push_back(static_cast<int>(parse_int(item, line, qual)));
            if (cfg.m_sweep.empty()) throw ConfigError(line, "key '" + qual + "': empty sweep");
        } else if (qual == "learner.t")
            cfg.sgd_t = parse_int(value, line, qual);
        else if (qual == "learner.radius_c")
            cfg.radius_c = parse_double(value, line, qual);
        else if (qual == "learner.seeds")
            cfg.seeds = parse_seed_list(value, line, qual);
        else if (qual == "learner.schedule")
            cfg.schedule = value;
        else if (qual == "learner.error_threshold")
            cfg.error_threshold = parse_double(value, line, qual);
        else if (qual == "learner.ridge_lambda")
            cfg.ridge_lambda = parse_double(value, line, qual);
        else if (qual == "output.directory")
            cfg.output_directory = value;
        else
            throw ConfigError(line, "unknown key '" + qual + "'");
    }

    if (cfg.m_sweep.empty()) cfg.m_sweep = {cfg.m};
    if (!m_set && cfg.m_sweep.size() == 1) cfg.m = cfg.m_sweep.front();

    // eager validation so errors carry the config context
    if (cfg.domain_d < 1) throw ConfigError(0, "domain.d must be >= 1");
    if (cfg.domain_g < 2) throw ConfigError(0, "domain.g must be >= 2");
    if (cfg.kernel_family != "gaussian" && cfg.kernel_family != "laplacian" &&
        cfg.kernel_family != "flat")
        throw ConfigError(0, "kernel.family must be gaussian, laplacian, or flat");
    if (cfg.tier != "exact" && cfg.tier != "oracle-sim" && cfg.tier != "circuit-sim" &&
        cfg.tier != "baseline")
        throw ConfigError(0, "sampler.tier must be exact, oracle-sim, circuit-sim, or baseline");
    if (cfg.schedule != "constant" && cfg.schedule != "invsqrt")
        throw ConfigError(0, "learner.schedule must be constant or invsqrt");
    if (!(cfg.eps > 0.0)) throw ConfigError(0, "sampler.eps must be positive");
    if (cfg.target_spec.empty()) throw ConfigError(0, "dataset.target is required");
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string ExperimentConfig::to_ini() const {
    std::ostringstream os;
    os << "[domain]\n";
    os << "d = " << domain_d << "\n";
    os << "g = " << domain_g << "\n\n";
    os << "[kernel]\n";
    os << "family = " << kernel_family << "\n";
    os << "gamma = " << format_double(gamma) << "\n";
    os << "theta_terms = " << theta_terms << "\n\n";
    os << "[dataset]\n";
    os << "density = " << density_spec << "\n";
    os << "target = " << target_spec << "\n";
    os << "n = " << n_samples << "\n";
    os << "seed = " << data_seed << "\n\n";
    os << "[sampler]\n";
    os << "tier = " << tier << "\n";
    os << "eps = " << format_double(eps) << "\n";
    os << "delta = " << format_double(delta) << "\n\n";
    os << "[learner]\n";
    os << "m = " << m << "\n";
    os << "m_sweep = ";
    for (std::size_t i = 0; i < m_sweep.size(); ++i) os << (i ? "," : "") << m_sweep[i];
    os << "\n";
    os << "t = " << sgd_t << "\n";
    os << "radius_c = " << format_double(radius_c) << "\n";
    os << "seeds = ";
    for (std::size_t i = 0; i < seeds.size(); ++i) os << (i ? "," : "") << seeds[i];
    os << "\n";
    os << "schedule = " << schedule << "\n";
    os << "error_threshold = " << format_double(error_threshold) << "\n";
    os << "ridge_lambda = " << format_double(ridge_lambda) << "\n\n";
    os << "[output]\n";
    os << "directory = " << output_directory << "\n";
    return os.str();
}

GridDomain ExperimentConfig::make_domain(std::size_t cap) const {
    return GridDomain::make(domain_d, domain_g, cap);
}

KernelSpec ExperimentConfig::make_kernel() const {
    if (kernel_family == "gaussian") return KernelSpec::gaussian(gamma, theta_terms);
    if (kernel_family == "laplacian") return KernelSpec::laplacian(gamma);
    return KernelSpec::custom_weight([](std::span<const double>) { return 1.0; });
}

Eigen::VectorXd ExperimentConfig::make_density(const GridDomain& domain) const {
    const auto n = static_cast<Eigen::Index>(domain.size);
    const auto colon = density_spec.find(':');
    const std::string kind = density_spec.substr(0, colon);
    const std::string args =
        colon == std::string::npos ? std::string() : density_spec.substr(colon + 1);

    Eigen::VectorXd density;
    if (kind == "uniform") {
        density = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    } else if (kind == "point") {
        const auto idx = parse_int(args, 0, "dataset.density point index");
        if (idx < 0 || idx >= static_cast<long long>(domain.size))
            throw ConfigError(0, "dataset.density: point index outside the grid");
        density = Eigen::VectorXd::Zero(n);
        density[static_cast<Eigen::Index>(idx)] = 1.0;
    } else if (kind == "support") {
        density = Eigen::VectorXd::Zero(n);
        const auto items = split(args, ',');
        if (items.empty()) throw ConfigError(0, "dataset.density: empty support list");
        for (const auto& item : items) {
            const auto idx = parse_int(item, 0, "dataset.density support index");
            if (idx < 0 || idx >= static_cast<long long>(domain.size))
                throw ConfigError(0, "dataset.density: support index outside the grid");
            density[static_cast<Eigen::Index>(idx)] = 1.0;
        }
        density /= density.sum();
    } else if (kind == "cosine") {
        const auto items = split(args, ',');
        if (items.size() != 2) throw ConfigError(0, "dataset.density: cosine needs K,A");
        const auto k = parse_int(items[0], 0, "dataset.density cosine K");
        const double a = parse_double(items[1], 0, "dataset.density cosine A");
        if (std::abs(a) > 1.0)
            throw ConfigError(0, "dataset.density: cosine amplitude must be in [-1, 1]");
        density.resize(n);
        for (std::size_t x = 0; x < domain.size; ++x) {
            const auto p = domain.point_at(x);
            double w = 1.0;
            for (int d = 0; d < domain.dim; ++d)
                w *= 1.0 + a * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) * p[d] /
                                        domain.side);
            density[static_cast<Eigen::Index>(x)] = w;
        }
        density /= density.sum();
    } else {
        throw ConfigError(0, "dataset.density: unknown kind '" + kind + "'");
    }
    return density;
}

RkhsFunction ExperimentConfig::make_target(const GridDomain& domain,
                                           const KernelSpec& kernel) const {
    const auto colon = target_spec.find(':');
    const std::string kind = target_spec.substr(0, colon);
    if (colon == std::string::npos)
        throw ConfigError(0, "dataset.target: expected 'kind:indices@weights'");
    const std::string rest = target_spec.substr(colon + 1);
    const auto at = rest.find('@');
    if (at == std::string::npos)
        throw ConfigError(0, "dataset.target: expected 'kind:indices@weights'");

    std::vector<std::size_t> indices;
    for (const auto& item : split(rest.substr(0, at), ','))
        indices.push_back(
            static_cast<std::size_t>(parse_int(item, 0, "dataset.target index")));
    std::vector<double> weights;
    for (const auto& item : split(rest.substr(at + 1), ','))
        weights.push_back(parse_double(item, 0, "dataset.target weight"));
    if (indices.size() != weights.size())
        throw ConfigError(0, "dataset.target: index and weight counts differ");

    if (kind == "planted") return planted_target(domain, kernel, indices, weights);
    if (kind == "rkhs") return synth_target(domain, kernel, indices, weights);
    throw ConfigError(0, "dataset.target: unknown kind '" + kind + "'");
}

DatasetSpec ExperimentConfig::make_dataset_spec(std::size_t cap) const {
    const GridDomain domain = make_domain(cap);
    const KernelSpec kernel = make_kernel();
    DatasetSpec spec;
    spec.domain = domain;
    spec.density = make_density(domain);
    spec.target = make_target(domain, kernel);
    spec.seed = data_seed;
    return spec;
}

SamplerTier ExperimentConfig::make_tier() const {
    if (tier == "exact") return SamplerTier::Exact;
    if (tier == "oracle-sim") return SamplerTier::OracleSim;
    if (tier == "circuit-sim") return SamplerTier::CircuitSim;
    return SamplerTier::Baseline;
}

SgdSchedule ExperimentConfig::make_schedule() const {
    return schedule == "invsqrt" ? SgdSchedule::InvSqrtT : SgdSchedule::ConstantHorizon;
}

}  // namespace optrf
