#include "optrf/qsim.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "optrf/csv.hpp"

namespace optrf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int ceil_log2(std::size_t n) {
    int b = 0;
    std::size_t v = 1;
    while (v < n) {
        v <<= 1;
        ++b;
    }
    return b;
}

void check_state(const Statevector& s) {
    std::size_t prod = 1;
    for (std::size_t d : s.register_shape) prod *= d;
    if (prod != static_cast<std::size_t>(s.amplitudes.size()))
        throw std::invalid_argument("statevector shape does not match amplitude length");
}

/// Apply a dim x dim operator to one register of a dense state.
Statevector apply_register_operator(const Statevector& state, std::size_t reg,
                                    const Eigen::MatrixXcd& op) {
    check_state(state);
    if (reg >= state.register_shape.size()) throw std::invalid_argument("register out of range");
    const std::size_t dim = state.register_shape[reg];
    if (op.rows() != static_cast<Eigen::Index>(dim) || op.cols() != op.rows())
        throw std::invalid_argument("operator does not match register dimension");
    std::size_t post = 1;
    for (std::size_t j = reg + 1; j < state.register_shape.size(); ++j)
        post *= state.register_shape[j];
    std::size_t pre = 1;
    for (std::size_t j = 0; j < reg; ++j) pre *= state.register_shape[j];

    Statevector out = state;
    Eigen::VectorXcd slice(static_cast<Eigen::Index>(dim));
    for (std::size_t p = 0; p < pre; ++p) {
        for (std::size_t q = 0; q < post; ++q) {
            const std::size_t base = p * dim * post + q;
            for (std::size_t i = 0; i < dim; ++i)
                slice[static_cast<Eigen::Index>(i)] =
                    state.amplitudes[static_cast<Eigen::Index>(base + i * post)];
            const Eigen::VectorXcd mapped = op * slice;
            for (std::size_t i = 0; i < dim; ++i)
                out.amplitudes[static_cast<Eigen::Index>(base + i * post)] =
                    mapped[static_cast<Eigen::Index>(i)];
        }
    }
    return out;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Eigen::Matrix2cd rotation(double theta) {
    Eigen::Matrix2cd r;
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

}  // namespace

Eigen::VectorXd Statevector::marginal(std::size_t reg) const {
    check_state(*this);
    if (reg >= register_shape.size()) throw std::invalid_argument("register out of range");
    const std::size_t dim = register_shape[reg];
    std::size_t post = 1;
    for (std::size_t j = reg + 1; j < register_shape.size(); ++j) post *= register_shape[j];
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    for (Eigen::Index flat = 0; flat < amplitudes.size(); ++flat) {
        const std::size_t i = (static_cast<std::size_t>(flat) / post) % dim;
        out[static_cast<Eigen::Index>(i)] += std::norm(amplitudes[flat]);
    }
    return out;
}

Eigen::MatrixXcd BlockEncoding::encoded_block() const {
    const auto n = static_cast<Eigen::Index>(target_dim);
    const auto anc = static_cast<Eigen::Index>(ancilla_dim);
    Eigen::MatrixXcd block(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) block(i, j) = alpha * unitary(i * anc, j * anc);
    return block;
}

std::string CostLedger::csv_row() const {
    std::ostringstream os;
    os << oracle_rho_queries << ',' << oracle_tau_queries << ',' << qft_applications << ','
       << qsvt_repetitions << ',' << format_double(amp_success_prob) << ','
       << amp_repetition_estimate;
    return os.str();
}

double InvSqrtPoly::operator()(double x) const {
    // Clenshaw on t in [-1,1] mapped from [domain_min, 1]
    const double t = 2.0 * (x - domain_min) / (1.0 - domain_min) - 1.0;
    double b1 = 0.0, b2 = 0.0;
    for (Eigen::Index k = coefficients.size() - 1; k >= 1; --k) {
        const double b0 = 2.0 * t * b1 - b2 + coefficients[k];
        b2 = b1;
        b1 = b0;
    }
    return t * b1 - b2 + coefficients[0];
}

InvSqrtPoly make_inv_sqrt_poly(double kappa, double target_sup_error, double scale) {
    if (!(kappa > 1.0)) throw std::invalid_argument("make_inv_sqrt_poly: kappa must exceed 1");
    if (!(target_sup_error > 0.0) || !(scale > 0.0))
        throw std::invalid_argument("make_inv_sqrt_poly: tolerance and scale must be positive");
    const double a = 1.0 / kappa;
    constexpr int kGridPoints = 10000;
    constexpr int kMaxDegree = 600;

    for (int deg = 2; deg <= kMaxDegree; ++deg) {
        const int m = deg + 1;  // interpolation nodes
        Eigen::VectorXd fx(m);
        Eigen::VectorXd theta(m);
        for (int j = 0; j < m; ++j) {
            theta[j] = std::numbers::pi * (j + 0.5) / m;
            const double t = std::cos(theta[j]);
            const double x = a + 0.5 * (t + 1.0) * (1.0 - a);
            fx[j] = scale / std::sqrt(x);
        }
        Eigen::VectorXd coeffs(deg + 1);
        for (int k = 0; k <= deg; ++k) {
            double acc = 0.0;
            for (int j = 0; j < m; ++j) acc += fx[j] * std::cos(k * theta[j]);
            coeffs[k] = 2.0 * acc / m;
        }
        coeffs[0] *= 0.5;

        InvSqrtPoly poly;
        poly.coefficients = coeffs;
        poly.degree = deg;
        poly.domain_min = a;
        poly.scale = scale;
        double sup = 0.0;
        for (int i = 0; i < kGridPoints; ++i) {
            const double x = a + (1.0 - a) * i / (kGridPoints - 1);
            sup = std::max(sup, std::abs(poly(x) - scale / std::sqrt(x)));
        }
        if (sup <= target_sup_error) {
            poly.sup_error = sup;
            return poly;
        }
    }
    throw std::runtime_error("make_inv_sqrt_poly: no polynomial met the tolerance");
}

Eigen::MatrixXcd state_prep_oracle(const EmpiricalDist& qhat) {
    const auto n = qhat.weights.size();
    if (std::abs(qhat.weights.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("state_prep_oracle: weights must sum to 1");
    Eigen::MatrixXd u(n, n);
    u.col(0) = qhat.weights.cwiseSqrt();
    // complete by Gram-Schmidt against the standard basis
    Eigen::Index filled = 1;
    for (Eigen::Index basis = 0; basis < n && filled < n; ++basis) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(n, basis);
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index j = 0; j < filled; ++j) v -= u.col(j).dot(v) * u.col(j);
        const double norm = v.norm();
        if (norm > 1e-9) u.col(filled++) = v / norm;
    }
    if (filled != n) throw std::runtime_error("state_prep_oracle: completion failed");
    return u.cast<std::complex<double>>();
}

Statevector qft_apply(const Statevector& state, std::size_t reg, bool inverse,
                      const GridDomain& domain) {
    if (reg >= state.register_shape.size()) throw std::invalid_argument("register out of range");
    if (state.register_shape[reg] != domain.size)
        throw std::invalid_argument("qft_apply: register dimension must equal G^D");
    Eigen::MatrixXcd f = dft_matrix(domain);
    if (inverse) f.adjointInPlace();
    return apply_register_operator(state, reg, f);
}

namespace detail {

Eigen::MatrixXcd povm_to_block_encoding(const Eigen::MatrixXcd& povm_circuit,
                                        std::size_t sys_dim) {
    // The POVM outcome bit is the least-significant bit of the circuit's
    // ancilla index. Append a flag qubit, copy the outcome into it, undo the
    // circuit: (W^dag (x) I_f) . CNOT_{b->f} . (W (x) I_f).
    const auto w_dim = povm_circuit.rows();
    if (w_dim % static_cast<Eigen::Index>(sys_dim) != 0)
        throw std::invalid_argument("povm_to_block_encoding: dimension mismatch");
    const Eigen::MatrixXcd wf = kron(povm_circuit, Eigen::MatrixXcd::Identity(2, 2));
    Eigen::MatrixXcd staged(wf.rows(), wf.cols());
    for (Eigen::Index row = 0; row < wf.rows(); ++row) {
        const Eigen::Index circuit_index = row / 2;
        const Eigen::Index flag = row % 2;
        const Eigen::Index outcome = circuit_index % 2;
        staged.row((circuit_index * 2) + (flag ^ outcome)) = wf.row(row);
    }
    return wf.adjoint() * staged;
}

Eigen::MatrixXcd build_sigma_povm_circuit(const Eigen::VectorXd& q_weights,
                                          const Eigen::VectorXd& qhat_diag,
                                          const GridDomain& domain, double eps, double q_max) {
    const auto n = static_cast<Eigen::Index>(domain.size);
    if (q_weights.size() != n || qhat_diag.size() != n)
        throw std::invalid_argument("build_sigma_povm_circuit: dimension mismatch");
    const double eps_ratio = eps / q_max;
    const auto dim = n * n * 4;  // X (x) X' (x) A (x) B

    // CNOT_{X->X'}: per-axis addition mod G on the copy register
    Eigen::MatrixXcd cn = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index x = 0; x < n; ++x) {
        const auto px = domain.point_at(static_cast<std::size_t>(x));
        for (Eigen::Index xp = 0; xp < n; ++xp) {
            const auto pp = domain.point_at(static_cast<std::size_t>(xp));
            std::vector<int> sum(px.size());
            for (std::size_t d = 0; d < px.size(); ++d)
                sum[d] = (pp[d] + px[d]) % domain.side;
            const auto tgt = static_cast<Eigen::Index>(domain.index_of(sum));
            for (Eigen::Index ab = 0; ab < 4; ++ab)
                cn((x * n + tgt) * 4 + ab, (x * n + xp) * 4 + ab) = 1.0;
        }
    }

    // F_D^dag on X, O_rho^dag on X', R_theta3 on A
    Eigen::MatrixXcd u_rho;
    if (qhat_diag.isZero(0.0)) {
        u_rho = Eigen::MatrixXcd::Identity(n, n);  // epsilon-branch probe
    } else {
        u_rho = state_prep_oracle(EmpiricalDist{qhat_diag, 0});
    }
    const double theta3 = std::acos(std::sqrt(eps_ratio / (1.0 + eps_ratio)));
    const Eigen::MatrixXcd m1 =
        kron(kron(kron(dft_matrix(domain).adjoint(), u_rho.adjoint()), rotation(theta3)),
             Eigen::MatrixXcd::Identity(2, 2));

    // collapsed arithmetic + U_R: on |v>^X, rotate B by theta2(Q(v)/Qmax) when
    // A=1 and X'=0, flip B when A=1 and X'!=0, do nothing when A=0
    Eigen::MatrixXcd cr = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index v = 0; v < n; ++v) {
        const double q = q_weights[v];
        if (q < -1e-12 || q > 1.0 + 1e-12)
            throw std::domain_error("build_sigma_povm_circuit: Q/Qmax outside [0, 1]");
        const double theta2 = std::acos(std::sqrt(std::clamp(q, 0.0, 1.0)));
        for (Eigen::Index xp = 0; xp < n; ++xp) {
            for (Eigen::Index a = 0; a < 2; ++a) {
                Eigen::Matrix2cd bop;
                if (a == 0)
                    bop = Eigen::Matrix2cd::Identity();
                else if (xp != 0)
                    bop << 0, 1, 1, 0;
                else
                    bop = rotation(theta2);
                const Eigen::Index base = ((v * n + xp) * 2 + a) * 2;
                for (int r = 0; r < 2; ++r)
                    for (int c = 0; c < 2; ++c) cr(base + r, base + c) = bop(r, c);
            }
        }
    }
    return cr * m1 * cn;
}

}  // namespace detail

BlockEncoding be_sqrt_qtau(const KernelSpec& kernel, const GridDomain& domain, double delta) {
    const auto n = static_cast<Eigen::Index>(domain.size);
    const double q_max = q_tau_max(kernel, domain);
    const Eigen::VectorXd q = q_tau_vector(kernel, domain) / q_max;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(q[i] > 0.0) || q[i] > 1.0 + 1e-12)
            throw std::domain_error("be_sqrt_qtau: Q/Qmax must lie in (0, 1]");

    // POVM circuit: rotate the outcome qubit by theta1(q) = arccos(q^{1/4})
    Eigen::MatrixXcd povm = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    for (Eigen::Index v = 0; v < n; ++v) {
        const double theta1 = std::acos(std::pow(std::min(q[v], 1.0), 0.25));
        const Eigen::Matrix2cd r = rotation(theta1);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) povm(v * 2 + a, v * 2 + b) = r(a, b);
    }
    BlockEncoding be;
    be.unitary = detail::povm_to_block_encoding(povm, static_cast<std::size_t>(n));
    be.alpha = 1.0;
    be.ancilla_dim = 4;
    be.ancilla_qubits = 2;
    be.delta = delta;
    be.target_dim = static_cast<std::size_t>(n);
    return be;
}

BlockEncoding be_sigma_eps(const KernelSpec& kernel, const GridDomain& domain,
                           const EmpiricalDist& qhat, double eps, double delta) {
    if (!(eps > 0.0)) throw std::invalid_argument("be_sigma_eps: eps must be positive");
    if (qhat.weights.size() != static_cast<Eigen::Index>(domain.size))
        throw std::invalid_argument("be_sigma_eps: empirical distribution does not match domain");
    const double q_max = q_tau_max(kernel, domain);
    const Eigen::VectorXd q = q_tau_vector(kernel, domain) / q_max;
    const Eigen::MatrixXcd w =
        detail::build_sigma_povm_circuit(q, qhat.weights, domain, eps, q_max);
    BlockEncoding be;
    be.unitary = detail::povm_to_block_encoding(w, domain.size);
    be.alpha = 1.0;
    be.ancilla_dim = domain.size * 8;  // X' register plus qubits A, B, flag
    be.ancilla_qubits = ceil_log2(be.ancilla_dim);
    be.delta = delta;
    be.target_dim = domain.size;
    return be;
}

BlockEncoding qsvt_inv_sqrt(const BlockEncoding& be, double kappa, double delta,
                            CostLedger* ledger) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("qsvt_inv_sqrt: delta must lie in (0, 1)");
    Eigen::MatrixXcd a = be.encoded_block();
    if (!is_hermitian(a, 1e-8))
        throw std::domain_error("qsvt_inv_sqrt: encoded block must be Hermitian");
    a = 0.5 * (a + a.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
    if (es.info() != Eigen::Success) throw std::runtime_error("qsvt_inv_sqrt: eigensolver failed");
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo < 1.0 / kappa - 1e-9 || hi > 1.0 + 1e-9)
        throw std::domain_error("qsvt_inv_sqrt: spectrum outside [1/kappa, 1]");

    const double scale = (1.0 - delta / 2.0) / std::sqrt(kappa);
    const InvSqrtPoly poly = make_inv_sqrt_poly(kappa, delta * scale / 4.0, scale);
    if (ledger != nullptr) ledger->qsvt_repetitions += poly.degree;

    const auto n = a.rows();
    Eigen::VectorXd p(n), s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lambda = std::clamp(es.eigenvalues()[i], 1.0 / kappa, 1.0);
        p[i] = std::clamp(poly(lambda), -1.0, 1.0);
        s[i] = std::sqrt(std::max(0.0, 1.0 - p[i] * p[i]));
    }
    const Eigen::MatrixXcd pa = es.eigenvectors() * p.asDiagonal() * es.eigenvectors().adjoint();
    const Eigen::MatrixXcd sa = es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();

    // unitary dilation [[P, S], [S, -P]] on one extra qubit
    BlockEncoding out;
    out.unitary = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            out.unitary(2 * i, 2 * j) = pa(i, j);
            out.unitary(2 * i, 2 * j + 1) = sa(i, j);
            out.unitary(2 * i + 1, 2 * j) = sa(i, j);
            out.unitary(2 * i + 1, 2 * j + 1) = -pa(i, j);
        }
    out.alpha = 1.0;
    out.ancilla_dim = 2;
    out.ancilla_qubits = 1;
    out.delta = delta;
    out.target_dim = static_cast<std::size_t>(n);
    return out;
}

std::pair<Statevector, CostLedger> prepare_psi(const KernelSpec& kernel, const GridDomain& domain,
                                               const EmpiricalDist& qhat, double eps, SimTier tier,
                                               double delta) {
    if (!(eps > 0.0)) throw std::invalid_argument("prepare_psi: eps must be positive");
    if (qhat.weights.size() != static_cast<Eigen::Index>(domain.size))
        throw std::invalid_argument("prepare_psi: empirical distribution does not match domain");
    const auto n = static_cast<Eigen::Index>(domain.size);
    const double q_max = q_tau_max(kernel, domain);
    CostLedger ledger;

    if (tier == SimTier::Oracle) {
        // |Psi> from the exact eigendecomposition of Sigma_eps
        const Eigen::MatrixXd k = gram_reconstructed(kernel, domain);
        const SigmaEps se = sigma_eps(k, qhat, eps, q_max);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(se.matrix);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("prepare_psi: eigendecomposition failed");
        const Eigen::MatrixXd inv_half = es.eigenvectors() *
                                         es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                                         es.eigenvectors().transpose();
        const Eigen::VectorXd sqrt_q = (q_tau_vector(kernel, domain) / q_max).cwiseSqrt();
        const Eigen::MatrixXcd b_op = sqrt_q.asDiagonal() * dft_matrix(domain).adjoint() *
                                      qhat.weights.cwiseSqrt().asDiagonal();
        Eigen::MatrixXcd psi = inv_half.cast<std::complex<double>>() * b_op.transpose();
        psi /= psi.norm();

        Statevector state;
        state.register_shape = {domain.size, domain.size};
        state.amplitudes.resize(n * n);
        for (Eigen::Index x = 0; x < n; ++x)
            for (Eigen::Index xp = 0; xp < n; ++xp) state.amplitudes[x * n + xp] = psi(x, xp);
        // reference-tier cost: one data load and the F_D^dag of Eq. (10)
        ledger.oracle_rho_queries = 1;
        ledger.oracle_tau_queries = 1;
        ledger.qft_applications = 1;
        return {std::move(state), ledger};
    }

    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("prepare_psi: circuit tier needs delta in (0, 1)");

    // Step 1: load data onto X', copy onto X
    Statevector state;
    state.register_shape = {domain.size, domain.size};
    state.amplitudes = Eigen::VectorXcd::Zero(n * n);
    state.amplitudes[0] = 1.0;
    state = apply_register_operator(state, 1, state_prep_oracle(qhat));
    ledger.oracle_rho_queries += 1;
    {
        // transversal CNOT X'->X (per-axis addition mod G)
        Statevector copied = state;
        copied.amplitudes.setZero();
        for (Eigen::Index x = 0; x < n; ++x) {
            const auto px = domain.point_at(static_cast<std::size_t>(x));
            for (Eigen::Index xp = 0; xp < n; ++xp) {
                const auto pp = domain.point_at(static_cast<std::size_t>(xp));
                std::vector<int> sum(px.size());
                for (std::size_t d = 0; d < px.size(); ++d)
                    sum[d] = (px[d] + pp[d]) % domain.side;
                const auto tgt = static_cast<Eigen::Index>(domain.index_of(sum));
                copied.amplitudes[tgt * n + xp] += state.amplitudes[x * n + xp];
            }
        }
        state = std::move(copied);
    }

    // Step 2: F_D^dag on X'
    state = qft_apply(state, 1, true, domain);
    ledger.qft_applications += 1;

    // Step 3: sqrt(Q/Qmax) block on X', post-selected
    const BlockEncoding be_q = be_sqrt_qtau(kernel, domain, delta);
    state = apply_register_operator(state, 1, be_q.encoded_block());
    const double p1 = state.amplitudes.squaredNorm();
    ledger.oracle_tau_queries += 2;  // O_tau inside U_povm and its inverse
    if (p1 < 1e-12) throw std::runtime_error("prepare_psi: degenerate post-selection (sqrt-Q)");
    state.amplitudes /= std::sqrt(p1);

    // Step 4: QSVT inverse square root of Sigma_eps on X, post-selected
    const double kappa = 1.0 + q_max / eps;
    const BlockEncoding be_s = be_sigma_eps(kernel, domain, qhat, eps, delta);
    const BlockEncoding be_inv = qsvt_inv_sqrt(be_s, kappa, delta, &ledger);
    state = apply_register_operator(state, 0, be_inv.encoded_block());
    const double p2 = state.amplitudes.squaredNorm();
    // each QSVT repetition applies the Lemma-2 circuit and its inverse once
    ledger.oracle_rho_queries += 2 * ledger.qsvt_repetitions;
    ledger.oracle_tau_queries += 2 * ledger.qsvt_repetitions;
    ledger.qft_applications += 2 * ledger.qsvt_repetitions;
    if (p2 < 1e-12) throw std::runtime_error("prepare_psi: degenerate post-selection (QSVT)");
    state.amplitudes /= std::sqrt(p2);

    ledger.amp_success_prob = p1 * p2;
    ledger.amp_repetition_estimate =
        static_cast<long long>(std::ceil(1.0 / std::sqrt(ledger.amp_success_prob)));
    return {std::move(state), ledger};
}

std::size_t measure_register(const Statevector& state, std::size_t reg, RandomStream& rng) {
    const Eigen::VectorXd probs = state.marginal(reg);
    return rng.next_categorical(
        std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())));
}

FeatureSample sample_feature(const KernelSpec& kernel, const GridDomain& domain,
                             const EmpiricalDist& qhat, double eps, SimTier tier, double delta,
                             RandomStream& rng) {
    auto [state, ledger] = prepare_psi(kernel, domain, qhat, eps, tier, delta);
    FeatureSample out;
    out.v_index = measure_register(state, 1, rng);
    out.ledger = ledger;
    return out;
}

FeatureSampler::FeatureSampler(const KernelSpec& kernel, const GridDomain& domain,
                               const EmpiricalDist& qhat, double eps, SimTier tier, double delta) {
    auto [state, ledger] = prepare_psi(kernel, domain, qhat, eps, tier, delta);
    marginal_ = state.marginal(1);
    ledger_ = ledger;
}

std::size_t FeatureSampler::sample(RandomStream& rng) const {
    return rng.next_categorical(
        std::span<const double>(marginal_.data(), static_cast<std::size_t>(marginal_.size())));
}

}  // namespace optrf
