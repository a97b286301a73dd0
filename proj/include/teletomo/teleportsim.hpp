// teleportsim.hpp
// Exact and sampled simulation of the teleportation protocol: joint states
// for n-1 input wires, multi-wire Bell projectors, outcome probabilities,
// Bob's conditional states, and finite-shot records including Bob's own
// Bell-measurement-only local tomography stage.
//
// Canonical qubit order of the joint state is [A1, 1, A2, 2, ..., A_{n-1},
// n-1, n]: wire k's input qubit sits next to shared qubit k, and Bob holds
// the shared state's last qubit.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "teletomo/qla.hpp"
#include "teletomo/qstate.hpp"

namespace teletomo::teleportsim {

// Outcomes with probability at or below this cannot be conditioned on.
inline constexpr double kProbFloor = 1e-12;

// Ordered list of n-1 input states; wire k carries the state teleported
// through shared qubit k.
struct InputArrangement {
    std::vector<qstate::InputState> inputs;

    // Arrangement with the given lexicographic index over the input set
    // (wire 1 most significant).
    static InputArrangement from_index(std::size_t index, std::size_t wires,
                                       const std::array<qstate::InputState, 4>& set = qstate::standard_inputs());

    // Lexicographic index of this arrangement in the given input set;
    // inputs are matched by label first, then by amplitudes.
    std::size_t index_in(const std::array<qstate::InputState, 4>& set = qstate::standard_inputs()) const;
};

// Ordered list of n-1 Bell outcomes, one per wire.
struct OutcomeTuple {
    std::vector<qstate::BellOutcome> outcomes;

    static OutcomeTuple all_psi_minus(std::size_t wires);
    static OutcomeTuple from_index(std::size_t index, std::size_t wires);
    std::size_t to_index() const;

    bool operator==(const OutcomeTuple& other) const { return outcomes == other.outcomes; }
};

// Probability-weighted unnormalized Bob state for one (arrangement, outcome).
struct TildeRecord {
    InputArrangement arrangement;
    OutcomeTuple outcome;
    double q = 0.0;
    qla::ComplexMatrix tilde;  // 2x2 Hermitian
    std::optional<std::uint64_t> shots;
};

// One finite-statistics run: Alice's outcome tuple plus Bob's probe result.
struct ShotRecord {
    std::uint32_t arrangement_index = 0;
    std::uint32_t alice_outcome = 0;  // lexicographic outcome-tuple code
    std::uint8_t probe_index = 0;     // index into the standard input set
    std::uint8_t bob_outcome = 0;     // BellOutcome code
    std::uint64_t shot_index = 0;
    std::uint64_t rng_stream = 0;
};

// Density matrix of all 2n-1 qubits in the canonical order.
qla::ComplexMatrix joint_state(const InputArrangement& arrangement, const qstate::DensityMatrix& shared);

// Projector applying outcome k's Bell projector to wire pair (A_k, k) and
// the identity to Bob's qubit, in the canonical order.
qla::ComplexMatrix bm_projector(const OutcomeTuple& outcomes, std::size_t qubits);

// Q = Tr[P rho], clamped to [0, 1].
double bm_probability(const qla::ComplexMatrix& joint, const OutcomeTuple& outcomes);

// Tr_{Alice}[P rho P]: Hermitian PSD 2x2 with trace bm_probability.
qla::ComplexMatrix bob_unnormalized(const qla::ComplexMatrix& joint, const OutcomeTuple& outcomes);

// bob_unnormalized / Q; throws NumericalError when Q <= kProbFloor.
qstate::DensityMatrix bob_normalized(const qla::ComplexMatrix& joint, const OutcomeTuple& outcomes);

// Per-wire Bell contraction kernel M = C^dag rho_in C, where C holds the
// coefficients of the wire's Bell state. The map shared -> tilde factorizes
// through these 2x2 kernels:
//   tilde(t,t') = sum_{s,s'} prod_w M_w[s_w,s'_w] * shared[(s,t),(s',t')].
qla::ComplexMatrix wire_contraction(qstate::BellOutcome outcome, const qstate::InputState& input);

// The same linear map shared -> tilde evaluated by per-wire Bell
// contraction. Accepts any Hermitian operator in place of the shared state,
// which is what the n-qubit reconstructor probes it with.
qla::ComplexMatrix exact_tilde(const qla::ComplexMatrix& shared, const InputArrangement& arrangement,
                               const OutcomeTuple& outcomes);

// Exact-mode records for every one of the 4^{n-1} outcome tuples.
std::vector<TildeRecord> outcome_table(const qstate::DensityMatrix& shared, const InputArrangement& arrangement);

// Probabilities of the four Bell outcomes when a known probe is measured
// jointly with a single-qubit state (the BM-only single-qubit protocol).
std::array<double, 4> probe_bm_probabilities(const qla::ComplexMatrix& state, const qstate::InputState& probe);

// Finite-shot simulation for one arrangement. Probes cycle deterministically
// Zero -> One -> Plus -> RightCircular; shot i derives its own random stream
// from (seed, arrangement_index, i), so results do not depend on evaluation
// order. Total shots = 4 * shots_per_probe.
std::vector<ShotRecord> sample_shots(const qstate::DensityMatrix& shared, const InputArrangement& arrangement,
                                     std::uint64_t shots_per_probe, std::uint64_t seed,
                                     std::uint32_t arrangement_index = 0);

// Plug-in estimate q_hat * rho_hat from the designated-outcome frequency and
// the per-probe PsiMinus frequencies of Bob's local Bell measurements.
qla::ComplexMatrix estimate_from_frequencies(double q_designated, const std::array<double, 4>& q_psiminus_by_probe);

// Per-arrangement TildeRecord estimates conditioned on the designated
// outcome tuple. Throws InsufficientDataError when a required
// (arrangement, designated, probe) cell has no shots.
std::vector<TildeRecord> estimate_records(const std::vector<ShotRecord>& shots, const OutcomeTuple& designated,
                                          const std::array<qstate::InputState, 4>& input_set = qstate::standard_inputs());

}  // namespace teletomo::teleportsim
