// qstate.hpp
// Quantum-state domain layer: density matrices with physicality checks, the
// canonical teleportation input set, Bell projectors, random state generation
// and state distance metrics.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "teletomo/qla.hpp"

namespace teletomo::qstate {

inline constexpr double kTraceTol = 1e-9;   // |Tr(rho) - 1|
inline constexpr double kPsdTol = 1e-9;     // eigenvalues >= -kPsdTol
inline constexpr double kNormTol = 1e-12;   // input-state normalization

// The four Bell measurement outcomes, in the fixed order used everywhere
// (record files, outcome codes, sampling tables).
enum class BellOutcome : std::uint8_t { PsiMinus = 0, PsiPlus = 1, PhiMinus = 2, PhiPlus = 3 };

inline constexpr std::array<BellOutcome, 4> kBellOutcomes{
    BellOutcome::PsiMinus, BellOutcome::PsiPlus, BellOutcome::PhiMinus, BellOutcome::PhiPlus};

std::string_view to_string(BellOutcome o);
std::optional<BellOutcome> bell_outcome_from_string(std::string_view s);

// Single-qubit pure state alpha|0> + beta|1>, normalized within kNormTol.
class InputState {
public:
    InputState(qla::Complex alpha, qla::Complex beta, std::optional<std::string> label = std::nullopt);

    qla::Complex alpha() const { return alpha_; }
    qla::Complex beta() const { return beta_; }
    const std::optional<std::string>& label() const { return label_; }

    qla::ComplexMatrix density() const;  // 2x2 |psi><psi|

private:
    qla::Complex alpha_;
    qla::Complex beta_;
    std::optional<std::string> label_;
};

// The canonical probe set |0>, |1>, |+>, |R>, in the fixed order that the
// record format relies on.
const std::array<InputState, 4>& standard_inputs();

// Hermitian, unit-trace, positive-semidefinite matrix on n qubits.
// The constructor validates and rejects; it never repairs.
class DensityMatrix {
public:
    DensityMatrix(std::size_t qubits, qla::ComplexMatrix mat);

    std::size_t qubits() const { return qubits_; }
    std::size_t dim() const { return mat_.rows(); }
    const qla::ComplexMatrix& mat() const { return mat_; }

private:
    std::size_t qubits_;
    qla::ComplexMatrix mat_;
};

// Bell state as a 4x1 column vector in the computational basis 00,01,10,11.
qla::ComplexMatrix bell_state_vector(BellOutcome o);

// Rank-1 projector onto the Bell state of the given outcome.
qla::ComplexMatrix bell_projector(BellOutcome o);

// Ginibre-ensemble random state: rho = G G^dag / Tr(G G^dag) with G a
// 2^n x rank matrix of seeded standard complex Gaussians.
DensityMatrix random_density(std::size_t qubits, std::size_t rank, std::uint64_t seed);

// 1/2 sum |eigenvalues(a - b)|.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

double frobenius_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace teletomo::qstate
