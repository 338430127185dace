#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "optrf/grid.hpp"
#include "optrf/kernels.hpp"
#include "optrf/oracle.hpp"
#include "optrf/rng.hpp"

namespace optrf {

/// Dense statevector over a list of registers. Flat index is row-major over
/// register_shape (first register most significant).
struct Statevector {
    Eigen::VectorXcd amplitudes;
    std::vector<std::size_t> register_shape;

    std::size_t register_count() const { return register_shape.size(); }
    double norm() const { return amplitudes.norm(); }
    /// Probability marginal of one register (sum of |amp|^2 over the others).
    Eigen::VectorXd marginal(std::size_t reg) const;
};

/// Unitary on system (x) ancilla whose |0...0>-ancilla block encodes a target
/// operator: || A - alpha (I (x) <0|) U (I (x) |0>) ||_inf <= delta.
/// Flat index is sys * ancilla_dim + anc.
struct BlockEncoding {
    Eigen::MatrixXcd unitary;
    double alpha = 1.0;
    std::size_t ancilla_dim = 1;
    int ancilla_qubits = 0;  // ceil(log2(ancilla_dim))
    double delta = 0.0;
    std::size_t target_dim = 1;

    Eigen::MatrixXcd encoded_block() const;
};

/// Query/repetition accounting for one prepare-and-measure cycle. The
/// amplitude-amplification cost model is post-selection based: each
/// post-selection with success probability p would cost O(1/sqrt(p))
/// repetitions; amp_success_prob is the product over the cycle's
/// post-selections and amp_repetition_estimate = ceil(1/sqrt(p)).
struct CostLedger {
    long long oracle_rho_queries = 0;
    long long oracle_tau_queries = 0;
    long long qft_applications = 0;
    long long qsvt_repetitions = 0;
    double amp_success_prob = 1.0;
    long long amp_repetition_estimate = 1;

    std::string csv_row() const;  // rho,tau,qft,qsvt,amp_p,amp_reps
};

/// Chebyshev approximant of scale * x^{-1/2} on [domain_min, 1].
struct InvSqrtPoly {
    Eigen::VectorXd coefficients;  // Chebyshev basis on the mapped interval
    int degree = 0;
    double domain_min = 0.5;  // 1/kappa
    double scale = 1.0;
    double sup_error = 0.0;   // measured on a 10^4-point grid

    double operator()(double x) const;  // Clenshaw evaluation
};

/// Minimal-degree Chebyshev approximant with measured sup error <= target.
InvSqrtPoly make_inv_sqrt_poly(double kappa, double target_sup_error, double scale);

/// Data-loading oracle O_rho: unitary whose first column is (sqrt(q(x)))_x,
/// completed by Gram-Schmidt against the standard basis.
Eigen::MatrixXcd state_prep_oracle(const EmpiricalDist& qhat);

/// Apply F_D (or its inverse) to one register.
Statevector qft_apply(const Statevector& state, std::size_t reg, bool inverse,
                      const GridDomain& domain);

/// Block encoding of sqrt(Q/Qmax) (diagonal POVM operator): POVM circuit with
/// per-entry rotation theta_1(q) = arccos(q^{1/4}) on one ancilla qubit,
/// wrapped in the U^dag CNOT U sandwich with a flag qubit. Encoded block is
/// exactly diag((Q(v)/Qmax)^{1/2}); 2 ancilla qubits.
BlockEncoding be_sqrt_qtau(const KernelSpec& kernel, const GridDomain& domain, double delta);

/// Block encoding of Sigma_eps / (1 + eps/Qmax): the composite circuit
/// W = U_CR . (F_D^dag (x) O_rho^dag (x) R_theta3) . CNOT_{X->X'} on
/// X (x) X' (x) A (x) B, wrapped as (W^dag (x) I) CNOT_{B->F} (W (x) I).
/// Ancilla register: X' (dim G^D) plus qubits A, B, F.
BlockEncoding be_sigma_eps(const KernelSpec& kernel, const GridDomain& domain,
                           const EmpiricalDist& qhat, double eps, double delta);

/// QSVT semantics at desk scale: apply an InvSqrtPoly to the singular values
/// of the encoded Hermitian block. Result encodes scale * A^{-1/2} within
/// delta, with scale = (1 - delta/2)/sqrt(kappa) <= 1; the polynomial degree
/// is the QSVT repetition count. Requires spectrum(A) in [1/kappa, 1].
BlockEncoding qsvt_inv_sqrt(const BlockEncoding& be, double kappa, double delta,
                            CostLedger* ledger = nullptr);

enum class SimTier { Oracle, Circuit };

/// Algorithm-1 state |Psi> on X (x) X'.
/// Oracle tier: exact eigendecomposition of Sigma_eps.
/// Circuit tier: O_rho + transversal CNOT + F_D^dag + sqrt(Q/Qmax) block
/// + QSVT inverse square root, with post-selection and exact renormalization.
std::pair<Statevector, CostLedger> prepare_psi(const KernelSpec& kernel, const GridDomain& domain,
                                               const EmpiricalDist& qhat, double eps, SimTier tier,
                                               double delta);

/// One computational-basis measurement outcome of the named register. The
/// caller owns the collapse contract: one sample per prepared state.
std::size_t measure_register(const Statevector& state, std::size_t reg, RandomStream& rng);

struct FeatureSample {
    std::size_t v_index = 0;
    CostLedger ledger;
};

/// One full prepare-and-measure cycle of Algorithm 1.
FeatureSample sample_feature(const KernelSpec& kernel, const GridDomain& domain,
                             const EmpiricalDist& qhat, double eps, SimTier tier, double delta,
                             RandomStream& rng);

/// Repeated sampling with the preparation pipeline computed once. Each draw is
/// distributed exactly as a fresh prepare-and-measure cycle (the prepared
/// state is identical every cycle); the per-sample ledger is the cycle cost.
class FeatureSampler {
  public:
    FeatureSampler(const KernelSpec& kernel, const GridDomain& domain, const EmpiricalDist& qhat,
                   double eps, SimTier tier, double delta);

    std::size_t sample(RandomStream& rng) const;
    const CostLedger& ledger_per_sample() const { return ledger_; }
    const Eigen::VectorXd& feature_law() const { return marginal_; }

  private:
    Eigen::VectorXd marginal_;
    CostLedger ledger_;
};

namespace detail {
/// Raw builder for the Lemma-2 POVM circuit W (test harness hook: accepts any
/// nonnegative diagonal for q, including the all-zero epsilon-branch probe).
Eigen::MatrixXcd build_sigma_povm_circuit(const Eigen::VectorXd& q_weights,
                                          const Eigen::VectorXd& qhat_diag,
                                          const GridDomain& domain, double eps, double q_max);
Eigen::MatrixXcd povm_to_block_encoding(const Eigen::MatrixXcd& povm_circuit, std::size_t sys_dim);
}  // namespace detail

}  // namespace optrf
