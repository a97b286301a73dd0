// tomo.hpp
// Reconstruction engine: closed-form inversions for 1, 2 and 3 qubits,
// general n-qubit linear inversion by channel probing, outcome remapping,
// and physicality projection for noisy estimates.

#pragma once

#include <array>
#include <vector>

#include "teletomo/qla.hpp"
#include "teletomo/qstate.hpp"
#include "teletomo/teleportsim.hpp"

namespace teletomo::tomo {

// Hermiticity slack accepted on measured tilde data (sampled estimates).
inline constexpr double kDataHermTol = 1e-6;

enum class Method { ClosedForm1, ClosedForm2, ClosedForm3, LinearN };

std::string_view to_string(Method m);

struct ReconstructionReport {
    qstate::DensityMatrix rho_hat;
    qla::ComplexMatrix raw;  // pre-projection Hermitian estimate
    double residual = 0.0;   // linear-system residual, 0 for closed forms
    double condition = 0.0;  // sigma_max/sigma_min of the inversion map
    Method method = Method::LinearN;
    bool projected = false;
};

// Input-state substitution that turns data conditioned on `outcome` into
// PsiMinus-conditioned data: PsiMinus (a,b), PsiPlus (-a,b), PhiMinus (b,a),
// PhiPlus (-b,a). Applied wire by wire for multi-wire outcomes.
qstate::InputState outcome_remap(qstate::BellOutcome outcome, const qstate::InputState& input);

// Single-qubit closed form: entries a11 = 2Q(0,1), a22 = 2Q(1,0)
// and the a12 combination, from the PsiMinus probabilities of the four
// standard probes (indexed in standard_inputs order).
qla::ComplexMatrix one_qubit_raw(const std::array<double, 4>& q_psiminus_by_probe);

struct Projection {
    qstate::DensityMatrix state;
    bool projected;  // true iff clipping or renormalization exceeded 1e-9
};

// Hermitian part, eigenvalue clipping at zero, trace renormalization.
// Throws NumericalError when no positive eigenvalue remains.
Projection project_physical(const qla::ComplexMatrix& raw);

// Single-qubit state from exact or estimated PsiMinus probabilities of the
// four standard probes.
ReconstructionReport reconstruct_1q(const std::array<double, 4>& q_by_probe);

// Two-qubit closed form. tilde_by_input holds Bob's unnormalized 2x2
// matrices for the four standard inputs (standard order), all conditioned
// on `outcome`.
ReconstructionReport reconstruct_2q(const std::array<qla::ComplexMatrix, 4>& tilde_by_input,
                                    qstate::BellOutcome outcome);

// Three-qubit closed form. tilde_by_pair is indexed lexicographically over
// ordered standard-input pairs (wire 1 major), conditioned on `outcomes`.
ReconstructionReport reconstruct_3q(const std::array<qla::ComplexMatrix, 16>& tilde_by_pair,
                                    const teleportsim::OutcomeTuple& outcomes);

// General n-qubit linear inversion (2 <= n <= 5). tilde_by_arrangement is
// indexed lexicographically over input arrangements drawn from `input_set`;
// the design matrix is built by probing the exact channel with a Hermitian
// operator basis and the same outcomes.
ReconstructionReport reconstruct_nq(const std::vector<qla::ComplexMatrix>& tilde_by_arrangement,
                                    const teleportsim::OutcomeTuple& outcomes, std::size_t qubits,
                                    const std::array<qstate::InputState, 4>& input_set = qstate::standard_inputs());

enum class MethodChoice { Auto, Closed, Linear };

// Record-driven entry point: validates completeness of the record set and
// dispatches to the closed forms (n <= 3, standard inputs) or the linear
// inversion.
ReconstructionReport reconstruct_records(const std::vector<teleportsim::TildeRecord>& records,
                                         MethodChoice choice = MethodChoice::Auto,
                                         const std::array<qstate::InputState, 4>& input_set = qstate::standard_inputs());

}  // namespace teletomo::tomo
