#include "optrf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "optrf/csv.hpp"

namespace optrf {

GridDomain GridDomain::make(int dim, int side, std::size_t cap) {
    if (dim < 1) throw std::invalid_argument("domain dimension D must be >= 1");
    if (side < 2) throw std::invalid_argument("grid side G must be >= 2");
    std::size_t size = 1;
    for (int d = 0; d < dim; ++d) {
        if (size > cap / static_cast<std::size_t>(side))
            throw std::length_error("G^D exceeds the dense-operator cap");
        size *= static_cast<std::size_t>(side);
    }
    if (size > cap) throw std::length_error("G^D exceeds the dense-operator cap");
    return GridDomain{dim, side, size};
}

std::size_t GridDomain::index_of(std::span<const int> point) const {
    if (point.size() != static_cast<std::size_t>(dim))
        throw std::invalid_argument("grid point has wrong dimension");
    std::size_t idx = 0;
    for (int d = 0; d < dim; ++d) {
        const int c = point[static_cast<std::size_t>(d)];
        if (c < 0 || c >= side) throw std::out_of_range("grid coordinate out of range");
        idx = idx * static_cast<std::size_t>(side) + static_cast<std::size_t>(c);
    }
    return idx;
}

std::vector<int> GridDomain::point_at(std::size_t index) const {
    if (index >= size) throw std::out_of_range("grid index out of range");
    std::vector<int> p(static_cast<std::size_t>(dim));
    for (int d = dim - 1; d >= 0; --d) {
        p[static_cast<std::size_t>(d)] = static_cast<int>(index % static_cast<std::size_t>(side));
        index /= static_cast<std::size_t>(side);
    }
    return p;
}

std::vector<double> GridDomain::lattice_point(std::size_t index) const {
    const auto p = point_at(index);
    std::vector<double> v(p.size());
    for (std::size_t d = 0; d < p.size(); ++d) v[d] = static_cast<double>(p[d]) / side;
    return v;
}

EmpiricalDist ingest_samples(const GridDomain& domain, std::span<const std::size_t> points) {
    if (points.empty()) throw std::invalid_argument("ingest_samples: empty sample list");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.size));
    for (std::size_t p : points) {
        if (p >= domain.size) throw std::out_of_range("ingest_samples: point outside the grid");
        w[static_cast<Eigen::Index>(p)] += 1.0;
    }
    w /= static_cast<double>(points.size());
    return EmpiricalDist{std::move(w), static_cast<long long>(points.size())};
}

namespace {

/// RKHS norm^2 of a grid function: <f| k^{-1} |f> = sum_v |(F f)(v)|^2 / Q(v).
double rkhs_norm_sq(const GridDomain& domain, const KernelSpec& kernel,
                    const Eigen::VectorXd& values) {
    const Eigen::MatrixXcd f = dft_matrix(domain);
    const Eigen::VectorXcd fhat = f * values.cast<std::complex<double>>();
    const Eigen::VectorXd q = q_tau_vector(kernel, domain);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < fhat.size(); ++i) acc += std::norm(fhat[i]) / q[i];
    return acc;
}

/// Nearest grid coordinate to a real value, ties toward the smaller index.
int round_half_down(double x) { return static_cast<int>(std::ceil(x - 0.5)); }

}  // namespace

RkhsFunction synth_target(const GridDomain& domain, const KernelSpec& kernel,
                          std::span<const std::size_t> centers,
                          std::span<const double> raw_weights) {
    if (centers.empty() || centers.size() != raw_weights.size())
        throw std::invalid_argument("synth_target: centers and weights must be nonempty and match");
    for (std::size_t c : centers)
        if (c >= domain.size) throw std::out_of_range("synth_target: center outside the grid");
    bool any_nonzero = false;
    for (double w : raw_weights) any_nonzero |= (w != 0.0);
    if (!any_nonzero) throw std::invalid_argument("synth_target: all weights are zero");

    const Eigen::VectorXd profile = gram_profile(kernel, domain);
    const auto m = static_cast<Eigen::Index>(centers.size());
    Eigen::MatrixXd gram(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            // offset (c_i - c_j) mod G per axis, re-encoded as a grid index
            const auto ci = domain.point_at(centers[static_cast<std::size_t>(i)]);
            const auto cj = domain.point_at(centers[static_cast<std::size_t>(j)]);
            std::size_t off = 0;
            for (int d = 0; d < domain.dim; ++d) {
                const int delta = ((ci[d] - cj[d]) % domain.side + domain.side) % domain.side;
                off = off * static_cast<std::size_t>(domain.side) + static_cast<std::size_t>(delta);
            }
            gram(i, j) = profile[static_cast<Eigen::Index>(off)];
        }

    Eigen::VectorXd beta(m);
    for (Eigen::Index i = 0; i < m; ++i) beta[i] = raw_weights[static_cast<std::size_t>(i)];
    double norm_sq = beta.dot(gram * beta);
    if (norm_sq <= 1e-14)
        throw std::invalid_argument("synth_target: weights synthesize the zero function");
    if (norm_sq > 1.0) beta /= std::sqrt(norm_sq);

    RkhsFunction f;
    f.domain = domain;
    f.kernel = kernel;
    f.centers.assign(centers.begin(), centers.end());
    f.weights = beta;
    f.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.size));
    for (std::size_t x = 0; x < domain.size; ++x) {
        const auto px = domain.point_at(x);
        double acc = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto cj = domain.point_at(f.centers[static_cast<std::size_t>(j)]);
            std::size_t off = 0;
            for (int d = 0; d < domain.dim; ++d) {
                const int delta = ((px[d] - cj[d]) % domain.side + domain.side) % domain.side;
                off = off * static_cast<std::size_t>(domain.side) + static_cast<std::size_t>(delta);
            }
            acc += beta[j] * profile[static_cast<Eigen::Index>(off)];
        }
        f.values[static_cast<Eigen::Index>(x)] = acc;
    }
    f.rkhs_norm = std::sqrt(beta.dot(gram * beta));
    return f;
}

RkhsFunction planted_target(const GridDomain& domain, const KernelSpec& kernel,
                            std::span<const std::size_t> feature_indices,
                            std::span<const double> amplitudes) {
    if (feature_indices.empty() || feature_indices.size() != amplitudes.size())
        throw std::invalid_argument("planted_target: features and amplitudes must match");
    const double g = static_cast<double>(domain.side);
    Eigen::VectorXd values(static_cast<Eigen::Index>(domain.size));
    for (std::size_t x = 0; x < domain.size; ++x) {
        const auto px = domain.point_at(x);
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < feature_indices.size(); ++j) {
            if (feature_indices[j] >= domain.size)
                throw std::out_of_range("planted_target: feature outside the lattice");
            const auto vj = domain.point_at(feature_indices[j]);
            long long dot = 0;
            for (int d = 0; d < domain.dim; ++d) dot += static_cast<long long>(vj[d]) * px[d];
            const double phase = -2.0 * std::numbers::pi * static_cast<double>(dot % domain.side) / g;
            acc += amplitudes[j] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        if (std::abs(acc.imag()) > 1e-9)
            throw std::invalid_argument(
                "planted_target: feature set is not conjugation-closed (target not real)");
        values[static_cast<Eigen::Index>(x)] = acc.real();
    }
    RkhsFunction f;
    f.domain = domain;
    f.kernel = kernel;
    f.planted_features.assign(feature_indices.begin(), feature_indices.end());
    f.weights = Eigen::Map<const Eigen::VectorXd>(amplitudes.data(),
                                                  static_cast<Eigen::Index>(amplitudes.size()));
    f.values = std::move(values);
    f.rkhs_norm = std::sqrt(rkhs_norm_sq(domain, kernel, f.values));
    return f;
}

DatasetSpec rescale(const DatasetSpec& spec, double r, std::size_t cap) {
    if (!(r > 1.0)) throw std::invalid_argument("rescale: r must be > 1");
    const double rg = r * spec.domain.side;
    const double nearest = std::round(rg);
    if (std::abs(rg - nearest) > 1e-6)
        throw std::invalid_argument("rescale: r*G is not integral");
    const int new_side = static_cast<int>(nearest);
    if (new_side <= spec.domain.side)
        throw std::invalid_argument("rescale: r*G must exceed G");
    const double r_eff = static_cast<double>(new_side) / spec.domain.side;

    const GridDomain new_domain = GridDomain::make(spec.domain.dim, new_side, cap);

    KernelSpec new_kernel = spec.target.kernel;
    switch (new_kernel.family) {
        case KernelFamily::Gaussian:
            new_kernel.gamma /= r_eff * r_eff;  // exp(-g|x'-x|_2^2) under x -> rx
            break;
        case KernelFamily::Laplacian:
            new_kernel.gamma /= r_eff;  // exp(-g|x'-x|_1) under x -> rx
            break;
        case KernelFamily::CustomWeight:
            throw std::invalid_argument("rescale: CustomWeight kernels have no bandwidth to rescale");
    }

    auto map_index = [&](std::size_t old_index) {
        const auto p = spec.domain.point_at(old_index);
        std::vector<int> q(p.size());
        for (std::size_t d = 0; d < p.size(); ++d) {
            int c = round_half_down(r_eff * p[d]);
            q[d] = std::clamp(c, 0, new_side - 1);
        }
        return new_domain.index_of(q);
    };

    Eigen::VectorXd new_density = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(new_domain.size));
    for (std::size_t i = 0; i < spec.domain.size; ++i) {
        const double mass = spec.density[static_cast<Eigen::Index>(i)];
        if (mass != 0.0) new_density[static_cast<Eigen::Index>(map_index(i))] += mass;
    }

    RkhsFunction new_target;
    if (!spec.target.centers.empty()) {
        std::vector<std::size_t> new_centers(spec.target.centers.size());
        for (std::size_t j = 0; j < new_centers.size(); ++j)
            new_centers[j] = map_index(spec.target.centers[j]);
        std::vector<double> w(spec.target.weights.data(),
                              spec.target.weights.data() + spec.target.weights.size());
        new_target = synth_target(new_domain, new_kernel, new_centers, w);
    } else if (!spec.target.planted_features.empty()) {
        // a planted signed frequency w/G becomes w/(rG): keep the signed integer
        // index, re-encoded on the finer lattice so conjugate pairs stay paired
        std::vector<std::size_t> new_features;
        for (std::size_t w : spec.target.planted_features) {
            const auto c = spec.domain.point_at(w);
            std::vector<int> nc(c.size());
            for (std::size_t d = 0; d < c.size(); ++d) {
                if (2 * c[d] == spec.domain.side)
                    throw std::invalid_argument(
                        "rescale: self-conjugate planted frequency G/2 cannot be re-indexed");
                const int signed_freq = (2 * c[d] < spec.domain.side) ? c[d] : c[d] - spec.domain.side;
                nc[d] = (signed_freq % new_side + new_side) % new_side;
            }
            new_features.push_back(new_domain.index_of(nc));
        }
        std::vector<double> amps(spec.target.weights.data(),
                                 spec.target.weights.data() + spec.target.weights.size());
        new_target = planted_target(new_domain, new_kernel, new_features, amps);
    } else {
        throw std::invalid_argument("rescale: target carries no centers or planted features");
    }

    DatasetSpec out;
    out.domain = new_domain;
    out.density = std::move(new_density);
    out.target = std::move(new_target);
    out.lipschitz_f = spec.lipschitz_f / r_eff;
    out.lipschitz_q = spec.lipschitz_q / (r_eff * r_eff);
    out.seed = spec.seed;
    return out;
}

Dataset sample_dataset(const DatasetSpec& spec, long long n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_dataset: N must be >= 1");
    if (spec.density.size() != static_cast<Eigen::Index>(spec.domain.size))
        throw std::invalid_argument("sample_dataset: density does not match the domain");
    RandomStream rng(seed);
    Dataset out;
    out.spec = spec;
    out.xs.resize(static_cast<std::size_t>(n));
    out.ys.resize(n);
    const std::span<const double> probs(spec.density.data(),
                                        static_cast<std::size_t>(spec.density.size()));
    for (long long i = 0; i < n; ++i) {
        const std::size_t x = rng.next_categorical(probs);
        out.xs[static_cast<std::size_t>(i)] = x;
        out.ys[i] = spec.target(x);
    }
    return out;
}

void write_dataset_csv(const std::string& path, const Dataset& dataset) {
    CsvWriter csv(path);
    for (int d = 0; d < dataset.spec.domain.dim; ++d) csv.field("x_" + std::to_string(d));
    csv.field(std::string("y"));
    csv.endrow();
    for (std::size_t i = 0; i < dataset.xs.size(); ++i) {
        const auto p = dataset.spec.domain.point_at(dataset.xs[i]);
        for (int c : p) csv.field(c);
        csv.field(dataset.ys[static_cast<Eigen::Index>(i)]);
        csv.endrow();
    }
}

std::vector<std::pair<std::vector<int>, double>> read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("dataset csv is empty: " + path);
    std::vector<std::pair<std::vector<int>, double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
        if (cells.size() < 2) throw std::runtime_error("malformed dataset row: " + line);
        std::vector<int> coords(cells.size() - 1);
        for (std::size_t i = 0; i + 1 < cells.size(); ++i) coords[i] = static_cast<int>(cells[i]);
        rows.emplace_back(std::move(coords), cells.back());
    }
    return rows;
}

}  // namespace optrf
