// teleportsim.cpp

#include "teletomo/teleportsim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "teletomo/errors.hpp"
#include "teletomo/rng.hpp"
#include "teletomo/tomo.hpp"

namespace teletomo::teleportsim {

namespace {

using qla::Complex;
using qla::ComplexMatrix;
using qstate::BellOutcome;

// Coefficient matrix C of a Bell state, |B> = sum_{a,s} C(a,s) |a>|s>.
ComplexMatrix bell_coefficients(BellOutcome o) {
    const double s = 1.0 / std::sqrt(2.0);
    ComplexMatrix c(2, 2);
    switch (o) {
        case BellOutcome::PsiMinus: c(0, 1) = s; c(1, 0) = -s; break;
        case BellOutcome::PsiPlus: c(0, 1) = s; c(1, 0) = s; break;
        case BellOutcome::PhiMinus: c(0, 0) = s; c(1, 1) = -s; break;
        case BellOutcome::PhiPlus: c(0, 0) = s; c(1, 1) = s; break;
    }
    return c;
}

// Number of shared qubits n for a joint state on 2n-1 qubits.
std::size_t shared_qubits_of_joint(const ComplexMatrix& joint) {
    if (!joint.is_square()) throw std::invalid_argument("joint state must be square");
    std::size_t k = 0, d = joint.rows();
    while (d > 1 && d % 2 == 0) {
        d /= 2;
        ++k;
    }
    if (d != 1 || k % 2 == 0) throw std::invalid_argument("joint state dimension is not 2^(2n-1)");
    return (k + 1) / 2;
}

double clamp01(double q) { return std::min(1.0, std::max(0.0, q)); }

}  // namespace

InputArrangement InputArrangement::from_index(std::size_t index, std::size_t wires,
                                              const std::array<qstate::InputState, 4>& set) {
    InputArrangement arr;
    arr.inputs.reserve(wires);
    for (std::size_t w = 0; w < wires; ++w) {
        arr.inputs.push_back(set[(index >> (2 * (wires - 1 - w))) & 3]);
    }
    return arr;
}

std::size_t InputArrangement::index_in(const std::array<qstate::InputState, 4>& set) const {
    std::size_t index = 0;
    for (const qstate::InputState& in : inputs) {
        std::size_t found = 4;
        for (std::size_t k = 0; k < 4; ++k) {
            if (in.label() && set[k].label() && *in.label() == *set[k].label()) {
                found = k;
                break;
            }
            if (std::abs(in.alpha() - set[k].alpha()) <= 1e-12 && std::abs(in.beta() - set[k].beta()) <= 1e-12) {
                found = k;
                break;
            }
        }
        if (found == 4) throw std::invalid_argument("arrangement input is not in the configured input set");
        index = index * 4 + found;
    }
    return index;
}

OutcomeTuple OutcomeTuple::all_psi_minus(std::size_t wires) {
    OutcomeTuple t;
    t.outcomes.assign(wires, BellOutcome::PsiMinus);
    return t;
}

OutcomeTuple OutcomeTuple::from_index(std::size_t index, std::size_t wires) {
    OutcomeTuple t;
    t.outcomes.reserve(wires);
    for (std::size_t w = 0; w < wires; ++w) {
        t.outcomes.push_back(static_cast<BellOutcome>((index >> (2 * (wires - 1 - w))) & 3));
    }
    return t;
}

std::size_t OutcomeTuple::to_index() const {
    std::size_t index = 0;
    for (BellOutcome o : outcomes) index = index * 4 + static_cast<std::size_t>(o);
    return index;
}

qla::ComplexMatrix joint_state(const InputArrangement& arrangement, const qstate::DensityMatrix& shared) {
    const std::size_t n = shared.qubits();
    if (arrangement.inputs.size() + 1 != n) {
        throw std::invalid_argument("arrangement length must be one less than the shared qubit count");
    }
    // Plain order [A1 ... A_{n-1}, 1 ... n], then interleave.
    ComplexMatrix acc = arrangement.inputs[0].density();
    for (std::size_t w = 1; w + 1 < n; ++w) acc = tensor(acc, arrangement.inputs[w].density());
    acc = tensor(acc, shared.mat());

    std::vector<std::size_t> perm(2 * n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        perm[2 * k] = k;              // A_{k+1}
        perm[2 * k + 1] = n - 1 + k;  // shared qubit k+1
    }
    perm[2 * n - 2] = 2 * n - 2;  // Bob's qubit
    return permute_subsystems(acc, std::vector<std::size_t>(2 * n - 1, 2), perm);
}

qla::ComplexMatrix bm_projector(const OutcomeTuple& outcomes, std::size_t qubits) {
    const std::size_t wires = outcomes.outcomes.size();
    if (wires + 1 != qubits) {
        throw std::invalid_argument("outcome tuple length must be one less than the qubit count");
    }
    ComplexMatrix p = qstate::bell_projector(outcomes.outcomes[0]);
    for (std::size_t w = 1; w < wires; ++w) p = tensor(p, qstate::bell_projector(outcomes.outcomes[w]));
    return tensor(p, ComplexMatrix::identity(2));
}

double bm_probability(const qla::ComplexMatrix& joint, const OutcomeTuple& outcomes) {
    const std::size_t n = shared_qubits_of_joint(joint);
    const ComplexMatrix p = bm_projector(outcomes, n);
    Complex tr{0.0, 0.0};
    for (std::size_t r = 0; r < p.rows(); ++r)
        for (std::size_t c = 0; c < p.cols(); ++c) tr += p(r, c) * joint(c, r);
    return clamp01(tr.real());
}

qla::ComplexMatrix bob_unnormalized(const qla::ComplexMatrix& joint, const OutcomeTuple& outcomes) {
    const std::size_t n = shared_qubits_of_joint(joint);
    const ComplexMatrix p = bm_projector(outcomes, n);
    const ComplexMatrix pinched = p * joint * p;
    return partial_trace(pinched, std::vector<std::size_t>(2 * n - 1, 2), {2 * n - 2});
}

qstate::DensityMatrix bob_normalized(const qla::ComplexMatrix& joint, const OutcomeTuple& outcomes) {
    const double q = bm_probability(joint, outcomes);
    if (q <= kProbFloor) {
        throw NumericalError("bob_normalized: conditioning on an outcome of probability " + std::to_string(q));
    }
    ComplexMatrix bob = bob_unnormalized(joint, outcomes);
    bob *= Complex{1.0 / q, 0.0};
    return qstate::DensityMatrix(1, bob);
}

qla::ComplexMatrix wire_contraction(qstate::BellOutcome outcome, const qstate::InputState& input) {
    const ComplexMatrix c = bell_coefficients(outcome);
    return c.adjoint() * input.density() * c;
}

qla::ComplexMatrix exact_tilde(const qla::ComplexMatrix& shared, const InputArrangement& arrangement,
                               const OutcomeTuple& outcomes) {
    if (!shared.is_square()) throw std::invalid_argument("exact_tilde: shared operator must be square");
    const std::size_t wires = arrangement.inputs.size();
    if (outcomes.outcomes.size() != wires) {
        throw std::invalid_argument("exact_tilde: arrangement and outcome lengths differ");
    }
    if (shared.rows() != (std::size_t{2} << wires)) {
        throw std::invalid_argument("exact_tilde: shared operator dimension does not match wire count");
    }

    // tilde = Tr_wires[(M_1^T x ... x M_{n-1}^T x I) shared].
    ComplexMatrix op(1, 1);
    op(0, 0) = 1.0;
    for (std::size_t w = 0; w < wires; ++w) {
        op = tensor(op, wire_contraction(outcomes.outcomes[w], arrangement.inputs[w]).transpose());
    }
    op = tensor(op, ComplexMatrix::identity(2));
    return partial_trace(op * shared, std::vector<std::size_t>(wires + 1, 2),
                         std::vector<std::size_t>{wires});
}

std::vector<TildeRecord> outcome_table(const qstate::DensityMatrix& shared, const InputArrangement& arrangement) {
    const std::size_t wires = shared.qubits() - 1;
    if (arrangement.inputs.size() != wires) {
        throw std::invalid_argument("outcome_table: arrangement length must be one less than the qubit count");
    }
    const std::size_t count = std::size_t{1} << (2 * wires);
    std::vector<TildeRecord> table;
    table.reserve(count);
    for (std::size_t code = 0; code < count; ++code) {
        TildeRecord rec;
        rec.arrangement = arrangement;
        rec.outcome = OutcomeTuple::from_index(code, wires);
        rec.tilde = exact_tilde(shared.mat(), arrangement, rec.outcome);
        rec.q = clamp01(rec.tilde.trace().real());
        table.push_back(std::move(rec));
    }
    return table;
}

std::array<double, 4> probe_bm_probabilities(const qla::ComplexMatrix& state, const qstate::InputState& probe) {
    if (!state.is_square() || state.rows() != 2) {
        throw std::invalid_argument("probe_bm_probabilities: state must be 2x2");
    }
    const ComplexMatrix pair = tensor(probe.density(), state);
    std::array<double, 4> q{};
    for (std::size_t j = 0; j < 4; ++j) {
        const ComplexMatrix p = qstate::bell_projector(static_cast<BellOutcome>(j));
        Complex tr{0.0, 0.0};
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 4; ++c) tr += p(r, c) * pair(c, r);
        q[j] = clamp01(tr.real());
    }
    return q;
}

namespace {

// First cell whose cumulative weight exceeds target = u * total mass.
std::size_t pick_from_cumulative(const std::vector<double>& cum, double u) {
    const double target = u * cum.back();
    for (std::size_t k = 0; k < cum.size(); ++k) {
        if (target < cum[k]) return k;
    }
    return cum.size() - 1;
}

}  // namespace

std::vector<ShotRecord> sample_shots(const qstate::DensityMatrix& shared, const InputArrangement& arrangement,
                                     std::uint64_t shots_per_probe, std::uint64_t seed,
                                     std::uint32_t arrangement_index) {
    if (shots_per_probe < 1) throw std::invalid_argument("sample_shots: shots_per_probe must be at least 1");

    const std::vector<TildeRecord> table = outcome_table(shared, arrangement);
    std::vector<double> alice_cum(table.size(), 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k) {
        acc += table[k].q;
        alice_cum[k] = acc;
    }

    // Bob's outcome distribution per (Alice outcome, probe), cumulative.
    const auto& probes = qstate::standard_inputs();
    std::vector<std::array<std::vector<double>, 4>> bob_cum(table.size());
    for (std::size_t k = 0; k < table.size(); ++k) {
        if (table[k].q <= kProbFloor) continue;
        ComplexMatrix bob = table[k].tilde;
        bob *= Complex{1.0 / table[k].q, 0.0};
        for (std::size_t p = 0; p < 4; ++p) {
            const std::array<double, 4> dist = probe_bm_probabilities(bob, probes[p]);
            std::vector<double> cum(4, 0.0);
            double a = 0.0;
            for (std::size_t j = 0; j < 4; ++j) {
                a += dist[j];
                cum[j] = a;
            }
            bob_cum[k][p] = std::move(cum);
        }
    }

    const std::uint64_t total = 4 * shots_per_probe;
    std::vector<ShotRecord> shots;
    shots.reserve(total);
    const std::uint64_t arr_key = rng::derive(seed, arrangement_index);
    for (std::uint64_t i = 0; i < total; ++i) {
        const std::uint64_t stream_id = rng::derive(arr_key, i);
        rng::Stream st(stream_id);
        const std::size_t probe = static_cast<std::size_t>(i % 4);
        const std::size_t alice = pick_from_cumulative(alice_cum, st.uniform());
        const std::size_t bob = pick_from_cumulative(bob_cum[alice][probe], st.uniform());
        ShotRecord rec;
        rec.arrangement_index = arrangement_index;
        rec.alice_outcome = static_cast<std::uint32_t>(alice);
        rec.probe_index = static_cast<std::uint8_t>(probe);
        rec.bob_outcome = static_cast<std::uint8_t>(bob);
        rec.shot_index = i;
        rec.rng_stream = stream_id;
        shots.push_back(rec);
    }
    return shots;
}

qla::ComplexMatrix estimate_from_frequencies(double q_designated, const std::array<double, 4>& q_psiminus_by_probe) {
    ComplexMatrix tilde = tomo::one_qubit_raw(q_psiminus_by_probe);
    tilde *= Complex{q_designated, 0.0};
    return tilde;
}

std::vector<TildeRecord> estimate_records(const std::vector<ShotRecord>& shots, const OutcomeTuple& designated,
                                          const std::array<qstate::InputState, 4>& input_set) {
    const std::size_t wires = designated.outcomes.size();
    const std::uint32_t designated_code = static_cast<std::uint32_t>(designated.to_index());

    struct Cell {
        std::uint64_t total = 0;
        std::uint64_t designated = 0;
        std::array<std::uint64_t, 4> probe_total{};
        std::array<std::uint64_t, 4> probe_psiminus{};
    };
    std::map<std::uint32_t, Cell> cells;
    for (const ShotRecord& s : shots) {
        Cell& c = cells[s.arrangement_index];
        ++c.total;
        if (s.alice_outcome == designated_code) {
            ++c.designated;
            ++c.probe_total[s.probe_index];
            if (s.bob_outcome == static_cast<std::uint8_t>(qstate::BellOutcome::PsiMinus)) {
                ++c.probe_psiminus[s.probe_index];
            }
        }
    }

    std::vector<TildeRecord> records;
    records.reserve(cells.size());
    for (const auto& [arr_index, cell] : cells) {
        std::array<double, 4> q_pm{};
        for (std::size_t p = 0; p < 4; ++p) {
            if (cell.probe_total[p] == 0) {
                throw InsufficientDataError("estimate_records: no shots for arrangement " +
                                            std::to_string(arr_index) + ", probe " + std::to_string(p) +
                                            " under the designated outcome");
            }
            q_pm[p] = static_cast<double>(cell.probe_psiminus[p]) / static_cast<double>(cell.probe_total[p]);
        }
        const double q_hat = static_cast<double>(cell.designated) / static_cast<double>(cell.total);
        TildeRecord rec;
        rec.arrangement = InputArrangement::from_index(arr_index, wires, input_set);
        rec.outcome = designated;
        rec.q = q_hat;
        rec.tilde = estimate_from_frequencies(q_hat, q_pm);
        rec.shots = cell.total;
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace teletomo::teleportsim
