// qstate.cpp

#include "teletomo/qstate.hpp"

#include <cmath>
#include <stdexcept>

#include "teletomo/rng.hpp"

namespace teletomo::qstate {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

std::string_view to_string(BellOutcome o) {
    switch (o) {
        case BellOutcome::PsiMinus: return "PsiMinus";
        case BellOutcome::PsiPlus: return "PsiPlus";
        case BellOutcome::PhiMinus: return "PhiMinus";
        case BellOutcome::PhiPlus: return "PhiPlus";
    }
    return "?";
}

std::optional<BellOutcome> bell_outcome_from_string(std::string_view s) {
    for (BellOutcome o : kBellOutcomes)
        if (s == to_string(o)) return o;
    return std::nullopt;
}

InputState::InputState(qla::Complex alpha, qla::Complex beta, std::optional<std::string> label)
    : alpha_(alpha), beta_(beta), label_(std::move(label)) {
    const double n = std::norm(alpha) + std::norm(beta);
    if (!std::isfinite(n) || std::abs(n - 1.0) > kNormTol) {
        throw std::invalid_argument("InputState: amplitudes are not normalized");
    }
}

qla::ComplexMatrix InputState::density() const {
    qla::ComplexMatrix m(2, 2);
    m(0, 0) = std::norm(alpha_);
    m(0, 1) = alpha_ * std::conj(beta_);
    m(1, 0) = std::conj(alpha_) * beta_;
    m(1, 1) = std::norm(beta_);
    return m;
}

const std::array<InputState, 4>& standard_inputs() {
    static const std::array<InputState, 4> inputs{
        InputState{1.0, 0.0, "Zero"},
        InputState{0.0, 1.0, "One"},
        InputState{kInvSqrt2, kInvSqrt2, "Plus"},
        InputState{kInvSqrt2, qla::Complex{0.0, kInvSqrt2}, "RightCircular"},
    };
    return inputs;
}

DensityMatrix::DensityMatrix(std::size_t qubits, qla::ComplexMatrix mat) : qubits_(qubits), mat_(std::move(mat)) {
    if (qubits_ == 0) throw std::invalid_argument("DensityMatrix: qubit count must be positive");
    const std::size_t d = std::size_t{1} << qubits_;
    if (!mat_.is_square() || mat_.rows() != d) {
        throw std::invalid_argument("DensityMatrix: matrix dimension does not match qubit count");
    }
    if (mat_.hermiticity_error() > qla::kHermTol) {
        throw std::invalid_argument("DensityMatrix: matrix is not Hermitian within tolerance");
    }
    if (std::abs(mat_.trace().real() - 1.0) > kTraceTol || std::abs(mat_.trace().imag()) > kTraceTol) {
        throw std::invalid_argument("DensityMatrix: trace differs from one beyond tolerance");
    }
    const qla::EigenSystem eig = qla::hermitian_eigen(mat_);
    if (eig.values.front() < -kPsdTol) {
        throw std::invalid_argument("DensityMatrix: matrix has a negative eigenvalue beyond tolerance");
    }
}

qla::ComplexMatrix bell_state_vector(BellOutcome o) {
    qla::ComplexMatrix v(4, 1);
    switch (o) {
        case BellOutcome::PsiMinus: v(1, 0) = kInvSqrt2; v(2, 0) = -kInvSqrt2; break;
        case BellOutcome::PsiPlus: v(1, 0) = kInvSqrt2; v(2, 0) = kInvSqrt2; break;
        case BellOutcome::PhiMinus: v(0, 0) = kInvSqrt2; v(3, 0) = -kInvSqrt2; break;
        case BellOutcome::PhiPlus: v(0, 0) = kInvSqrt2; v(3, 0) = kInvSqrt2; break;
    }
    return v;
}

qla::ComplexMatrix bell_projector(BellOutcome o) {
    const qla::ComplexMatrix v = bell_state_vector(o);
    return v * v.adjoint();
}

DensityMatrix random_density(std::size_t qubits, std::size_t rank, std::uint64_t seed) {
    if (qubits < 1 || qubits > 5) throw std::invalid_argument("random_density: qubits must be in [1, 5]");
    const std::size_t d = std::size_t{1} << qubits;
    if (rank < 1 || rank > d) throw std::invalid_argument("random_density: rank must be in [1, 2^qubits]");

    rng::Stream stream(seed);
    qla::ComplexMatrix g(d, rank);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < rank; ++c) g(r, c) = stream.complex_gaussian();

    qla::ComplexMatrix rho = g * g.adjoint();
    const double tr = rho.trace().real();
    rho *= qla::Complex{1.0 / tr, 0.0};
    return DensityMatrix(qubits, rho);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.qubits() != b.qubits()) throw std::invalid_argument("trace_distance: qubit counts differ");
    const qla::EigenSystem eig = qla::hermitian_eigen(a.mat() - b.mat());
    double s = 0.0;
    for (double lam : eig.values) s += std::abs(lam);
    return 0.5 * s;
}

double frobenius_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.qubits() != b.qubits()) throw std::invalid_argument("frobenius_distance: qubit counts differ");
    return (a.mat() - b.mat()).frobenius_norm();
}

}  // namespace teletomo::qstate
