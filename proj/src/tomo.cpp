// tomo.cpp

#include "teletomo/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>

#include "teletomo/errors.hpp"

namespace teletomo::tomo {

namespace {

using qla::Complex;
using qla::ComplexMatrix;
using qla::RealMatrix;
using qstate::BellOutcome;
using qstate::InputState;
using teleportsim::InputArrangement;
using teleportsim::OutcomeTuple;

constexpr std::size_t Z = 0, O = 1, P = 2, R = 3;  // standard input indices

const Complex kI{0.0, 1.0};

// --- Hermitian parametrization ---------------------------------------------
//
// Coordinates of a d x d Hermitian matrix in the fixed operator basis
// {E_kk}, {E_kl + E_lk}, {i(E_kl - E_lk)} with k < l in row-major order:
// first the d diagonals, then the real parts of the upper triangle, then the
// imaginary parts.

std::vector<double> vec_hermitian(const ComplexMatrix& m) {
    const std::size_t d = m.rows();
    std::vector<double> x;
    x.reserve(d * d);
    for (std::size_t k = 0; k < d; ++k) x.push_back(m(k, k).real());
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = k + 1; l < d; ++l) x.push_back(m(k, l).real());
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = k + 1; l < d; ++l) x.push_back(m(k, l).imag());
    return x;
}

ComplexMatrix unvec_hermitian(const std::vector<double>& x, std::size_t d) {
    ComplexMatrix m(d, d);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < d; ++k) m(k, k) = x[pos++];
    const std::size_t sym_base = pos;
    const std::size_t pairs = d * (d - 1) / 2;
    std::size_t pair = 0;
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = k + 1; l < d; ++l) {
            const Complex v{x[sym_base + pair], x[sym_base + pairs + pair]};
            m(k, l) = v;
            m(l, k) = std::conj(v);
            ++pair;
        }
    return m;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
    ComplexMatrix h(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) h(r, c) = 0.5 * (m(r, c) + std::conj(m(c, r)));
    return h;
}

void check_tilde(const ComplexMatrix& t, const char* who) {
    if (!t.is_square() || t.rows() != 2) throw std::invalid_argument(std::string(who) + ": tilde must be 2x2");
    if (t.hermiticity_error() > kDataHermTol) {
        throw std::invalid_argument(std::string(who) + ": tilde is not Hermitian within tolerance");
    }
}

// --- outcome standardization ------------------------------------------------
//
// Data conditioned on outcome o at input psi equals PsiMinus data at
// outcome_remap(o, psi). The remapped pure states still span the Hermitian
// 2x2 space, so PsiMinus data at the four standard points is an exact linear
// recombination of the measured values; the coefficients solve a 4x4 system.

std::array<double, 4> vec2(const ComplexMatrix& rho) {
    return {rho(0, 0).real(), rho(1, 1).real(), rho(0, 1).real(), rho(0, 1).imag()};
}

bool is_standard_set(const std::array<InputState, 4>& set) {
    const auto& std_set = qstate::standard_inputs();
    for (std::size_t k = 0; k < 4; ++k) {
        if (std::abs(set[k].alpha() - std_set[k].alpha()) > 1e-12 ||
            std::abs(set[k].beta() - std_set[k].beta()) > 1e-12) {
            return false;
        }
    }
    return true;
}

// coeff[j][k]: weight of the outcome-o datum at input_set[k] in the
// PsiMinus-equivalent datum at standard input j.
std::array<std::array<double, 4>, 4> standardize_coefficients(BellOutcome outcome,
                                                              const std::array<InputState, 4>& input_set) {
    std::array<std::array<double, 4>, 4> coeff{};
    if (outcome == BellOutcome::PsiMinus && is_standard_set(input_set)) {
        for (std::size_t j = 0; j < 4; ++j) coeff[j][j] = 1.0;
        return coeff;
    }
    RealMatrix basis(4, 4);
    for (std::size_t k = 0; k < 4; ++k) {
        const std::array<double, 4> col = vec2(outcome_remap(outcome, input_set[k]).density());
        for (std::size_t r = 0; r < 4; ++r) basis(r, k) = col[r];
    }
    const qla::QrFactorization qr(basis);
    for (std::size_t j = 0; j < 4; ++j) {
        const std::array<double, 4> target = vec2(qstate::standard_inputs()[j].density());
        const std::vector<double> c = qr.solve({target.begin(), target.end()});
        for (std::size_t k = 0; k < 4; ++k) coeff[j][k] = c[k];
    }
    return coeff;
}

// --- closed forms --------------------------------------------------------------

// Two-qubit solution from PsiMinus data at the standard inputs.
ComplexMatrix two_qubit_m_matrix(const std::array<ComplexMatrix, 4>& t) {
    const auto b11 = [&](std::size_t k) { return t[k](0, 0).real(); };
    const auto b22 = [&](std::size_t k) { return t[k](1, 1).real(); };
    const auto b12 = [&](std::size_t k) { return t[k](0, 1); };

    ComplexMatrix m(4, 4);
    m(0, 0) = 2.0 * b11(O);
    m(1, 1) = 2.0 * b22(O);
    m(2, 2) = 2.0 * b11(Z);
    m(3, 3) = 2.0 * b22(Z);
    m(0, 1) = 2.0 * b12(O);
    m(2, 3) = 2.0 * b12(Z);
    m(0, 2) = (1.0 - kI) * (b11(O) + b11(Z)) + 2.0 * kI * b11(R) - 2.0 * b11(P);
    m(1, 3) = (1.0 - kI) * (b22(O) + b22(Z)) + 2.0 * kI * b22(R) - 2.0 * b22(P);
    m(0, 3) = (1.0 - kI) * (b12(O) + b12(Z)) + 2.0 * kI * b12(R) - 2.0 * b12(P);
    m(1, 2) = (1.0 - kI) * (std::conj(b12(O)) + std::conj(b12(Z))) + 2.0 * kI * std::conj(b12(R)) -
              2.0 * std::conj(b12(P));
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < r; ++c) m(r, c) = std::conj(m(c, r));
    return m;
}

// Three-qubit solution from PsiMinus-PsiMinus data at the standard input
// pairs. The m_ij refer to the layout with Bob's qubit as the middle tensor
// factor; b11 data carries the Bob-0 sector and b22 the Bob-1 sector, which
// fixes the diagonal assignments below.
ComplexMatrix three_qubit_m_matrix(const std::array<ComplexMatrix, 16>& t) {
    const auto b11 = [&](std::size_t i, std::size_t j) { return Complex{t[i * 4 + j](0, 0).real(), 0.0}; };
    const auto b22 = [&](std::size_t i, std::size_t j) { return Complex{t[i * 4 + j](1, 1).real(), 0.0}; };
    const auto b12 = [&](std::size_t i, std::size_t j) { return t[i * 4 + j](0, 1); };
    const auto b12c = [&](std::size_t i, std::size_t j) { return std::conj(t[i * 4 + j](0, 1)); };

    ComplexMatrix m(8, 8);
    const auto set = [&](std::size_t i, std::size_t j, Complex v) { m(i - 1, j - 1) = v; };
    const auto g = [&](std::size_t i, std::size_t j) { return m(i - 1, j - 1); };
    const auto gc = [&](std::size_t i, std::size_t j) { return std::conj(m(i - 1, j - 1)); };
    const Complex om = 1.0 - kI;
    const Complex op = 1.0 + kI;

    set(1, 1, 4.0 * b11(O, O));
    set(3, 3, 4.0 * b22(O, O));
    set(2, 2, 4.0 * b11(O, Z));
    set(4, 4, 4.0 * b22(O, Z));
    set(5, 5, 4.0 * b11(Z, O));
    set(7, 7, 4.0 * b22(Z, O));
    set(6, 6, 4.0 * b11(Z, Z));
    set(8, 8, 4.0 * b22(Z, Z));

    set(1, 3, 4.0 * b12(O, O));
    set(2, 4, 4.0 * b12(O, Z));
    set(5, 7, 4.0 * b12(Z, O));
    set(6, 8, 4.0 * b12(Z, Z));

    set(1, 2, 2.0 * om * (b11(O, O) + b11(O, Z)) - 4.0 * (b11(O, P) - kI * b11(O, R)));
    set(3, 4, 2.0 * om * (b22(O, O) + b22(O, Z)) - 4.0 * (b22(O, P) - kI * b22(O, R)));
    set(5, 6, 2.0 * om * (b11(Z, O) + b11(Z, Z)) - 4.0 * (b11(Z, P) - kI * b11(Z, R)));
    set(7, 8, 2.0 * om * (b22(Z, O) + b22(Z, Z)) - 4.0 * (b22(Z, P) - kI * b22(Z, R)));
    set(1, 5, 2.0 * om * (b11(O, O) + b11(Z, O)) - 4.0 * (b11(P, O) - kI * b11(R, O)));
    set(3, 7, 2.0 * om * (b22(O, O) + b22(Z, O)) - 4.0 * (b22(P, O) - kI * b22(R, O)));
    set(2, 6, 2.0 * om * (b11(O, Z) + b11(Z, Z)) - 4.0 * (b11(P, Z) - kI * b11(R, Z)));
    set(4, 8, 2.0 * om * (b22(O, Z) + b22(Z, Z)) - 4.0 * (b22(P, Z) - kI * b22(R, Z)));
    set(1, 7, 2.0 * om * (b12(O, O) + b12(Z, O)) - 4.0 * (b12(P, O) - kI * b12(R, O)));
    set(3, 5, 2.0 * om * (b12c(O, O) + b12c(Z, O)) - 4.0 * (b12c(P, O) - kI * b12c(R, O)));
    set(2, 8, 2.0 * om * (b12(O, Z) + b12(Z, Z)) - 4.0 * (b12(P, Z) - kI * b12(R, Z)));
    set(4, 6, 2.0 * om * (b12c(O, Z) + b12c(Z, Z)) - 4.0 * (b12c(P, Z) - kI * b12c(R, Z)));
    set(5, 8, 2.0 * om * (b12(Z, O) + b12(Z, Z)) - 4.0 * (b12(Z, P) - kI * b12(Z, R)));
    set(6, 7, 2.0 * op * (b12(Z, O) + b12(Z, Z)) - 4.0 * (b12(Z, P) + kI * b12(Z, R)));
    set(1, 4, 2.0 * om * (b12(O, O) + b12(O, Z)) - 4.0 * (b12(O, P) - kI * b12(O, R)));
    set(2, 3, 2.0 * op * (b12(O, O) + b12(O, Z)) - 4.0 * (b12(O, P) + kI * b12(O, R)));

    // staged equations: these consume the coefficients solved above
    set(1, 6, (op * (g(1, 2) + g(1, 5) + g(2, 6) + g(5, 6)) - (g(1, 1) + g(2, 2) + g(5, 5) + g(6, 6)) +
               8.0 * b11(R, P) + 8.0 * b11(P, R) + 8.0 * kI * (b11(P, P) - b11(R, R))) /
                  (2.0 * kI));
    set(2, 5, (op * (g(1, 5) + g(2, 6)) + om * (gc(1, 2) + gc(5, 6)) -
               (g(1, 1) + g(2, 2) + g(5, 5) + g(6, 6)) + 8.0 * b11(P, P) + 8.0 * b11(R, R) +
               8.0 * kI * (b11(P, R) - b11(R, P))) /
                  2.0);
    set(3, 8, (op * (g(3, 4) + g(3, 7) + g(4, 8) + g(7, 8)) - (g(3, 3) + g(4, 4) + g(7, 7) + g(8, 8)) +
               8.0 * b22(R, P) + 8.0 * b22(P, R) + 8.0 * kI * (b22(P, P) - b22(R, R))) /
                  (2.0 * kI));
    set(4, 7, (op * (g(3, 7) + g(4, 8)) + om * (gc(3, 4) + gc(7, 8)) -
               (g(3, 3) + g(4, 4) + g(7, 7) + g(8, 8)) + 8.0 * b22(P, P) + 8.0 * b22(R, R) +
               8.0 * kI * (b22(P, R) - b22(R, P))) /
                  2.0);
    set(1, 8, (op * (g(1, 4) + g(1, 7) + g(2, 8) + g(5, 8)) - (g(1, 3) + g(2, 4) + g(5, 7) + g(6, 8)) +
               8.0 * b12(R, P) + 8.0 * b12(P, R) + 8.0 * kI * (b12(P, P) - b12(R, R))) /
                  (2.0 * kI));
    set(2, 7, (op * (g(1, 7) + g(2, 8)) + om * (g(2, 3) + g(6, 7)) -
               (g(1, 3) + g(2, 4) + g(5, 7) + g(6, 8)) + 8.0 * b12(R, R) + 8.0 * b12(P, P) +
               8.0 * kI * (b12(P, R) - b12(R, P))) /
                  2.0);
    set(3, 6, (op * (g(3, 5) + g(4, 6) + gc(2, 3) + gc(6, 7)) -
               (gc(1, 3) + gc(2, 4) + gc(5, 7) + gc(6, 8)) + 8.0 * b12c(R, P) + 8.0 * b12c(P, R) +
               8.0 * kI * (b12c(P, P) - b12c(R, R))) /
                  (2.0 * kI));
    set(4, 5, (op * (g(3, 5) + g(4, 6)) + om * (gc(1, 4) + gc(5, 8)) -
               (gc(1, 3) + gc(2, 4) + gc(5, 7) + gc(6, 8)) + 8.0 * b12c(R, R) + 8.0 * b12c(P, P) +
               8.0 * kI * (b12c(P, R) - b12c(R, P))) /
                  2.0);

    for (std::size_t r = 0; r < 8; ++r) {
        m(r, r) = Complex{m(r, r).real(), 0.0};
        for (std::size_t c = 0; c < r; ++c) m(r, c) = std::conj(m(c, r));
    }
    return m;
}

// The three-qubit solution is expressed with Bob's qubit in the middle; the
// shared-state convention keeps it last. Swapping the last two tensor
// factors converts between the two.
ComplexMatrix middle_to_last_3q(const ComplexMatrix& m) {
    return permute_subsystems(m, {2, 2, 2}, {0, 2, 1});
}

// --- closed-form conditioning -------------------------------------------------
//
// Condition of the fixed linear map from the stacked data vector (per input:
// two tilde diagonals, Re and Im of the off-diagonal; for 1q the four Q
// values) to the Hermitian coordinates of the estimate, obtained by probing
// the evaluator with unit data vectors.

std::array<ComplexMatrix, 4> tildes_from_flat(const std::vector<double>& data) {
    std::array<ComplexMatrix, 4> t{ComplexMatrix(2, 2), ComplexMatrix(2, 2), ComplexMatrix(2, 2),
                                   ComplexMatrix(2, 2)};
    for (std::size_t k = 0; k < 4; ++k) {
        t[k](0, 0) = data[4 * k];
        t[k](1, 1) = data[4 * k + 1];
        t[k](0, 1) = Complex{data[4 * k + 2], data[4 * k + 3]};
        t[k](1, 0) = std::conj(t[k](0, 1));
    }
    return t;
}

template <typename Eval>
double probed_condition(std::size_t data_dim, Eval&& eval) {
    RealMatrix t(data_dim, data_dim);
    std::vector<double> e(data_dim, 0.0);
    for (std::size_t mu = 0; mu < data_dim; ++mu) {
        e[mu] = 1.0;
        const std::vector<double> col = vec_hermitian(eval(e));
        e[mu] = 0.0;
        for (std::size_t r = 0; r < data_dim; ++r) t(r, mu) = col[r];
    }
    return qla::condition_number(t);
}

double closed_form_condition(Method method) {
    static std::mutex mu;
    static std::map<Method, double> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(method);
    if (it != cache.end()) return it->second;

    double value = 0.0;
    switch (method) {
        case Method::ClosedForm1:
            value = probed_condition(4, [](const std::vector<double>& data) {
                return one_qubit_raw({data[0], data[1], data[2], data[3]});
            });
            break;
        case Method::ClosedForm2:
            value = probed_condition(16, [](const std::vector<double>& data) {
                return two_qubit_m_matrix(tildes_from_flat(data));
            });
            break;
        case Method::ClosedForm3:
            value = probed_condition(64, [](const std::vector<double>& data) {
                std::array<ComplexMatrix, 16> t{};
                for (std::size_t k = 0; k < 16; ++k) {
                    ComplexMatrix m(2, 2);
                    m(0, 0) = data[4 * k];
                    m(1, 1) = data[4 * k + 1];
                    m(0, 1) = Complex{data[4 * k + 2], data[4 * k + 3]};
                    m(1, 0) = std::conj(m(0, 1));
                    t[k] = std::move(m);
                }
                return middle_to_last_3q(three_qubit_m_matrix(t));
            });
            break;
        case Method::LinearN:
            break;
    }
    cache[method] = value;
    return value;
}

ReconstructionReport make_report(ComplexMatrix raw, double residual, double condition, Method method) {
    Projection proj = project_physical(raw);
    return ReconstructionReport{std::move(proj.state), std::move(raw), residual, condition, method,
                                proj.projected};
}

// --- n-qubit design matrix -----------------------------------------------------

struct DesignKey {
    std::size_t qubits;
    std::size_t outcome_code;
    std::array<double, 16> amplitudes;

    bool operator<(const DesignKey& o) const {
        return std::tie(qubits, outcome_code, amplitudes) < std::tie(o.qubits, o.outcome_code, o.amplitudes);
    }
};

struct Design {
    std::shared_ptr<qla::QrFactorization> qr;
    RealMatrix a;
    double condition = 0.0;
};

DesignKey design_key(std::size_t qubits, const OutcomeTuple& outcomes,
                     const std::array<InputState, 4>& input_set) {
    DesignKey key{qubits, outcomes.to_index(), {}};
    for (std::size_t k = 0; k < 4; ++k) {
        key.amplitudes[4 * k] = input_set[k].alpha().real();
        key.amplitudes[4 * k + 1] = input_set[k].alpha().imag();
        key.amplitudes[4 * k + 2] = input_set[k].beta().real();
        key.amplitudes[4 * k + 3] = input_set[k].beta().imag();
    }
    return key;
}

// Design column for one Hermitian basis element. The element has at most two
// nonzero entries, so the probed tilde follows directly from the per-wire
// contraction kernels: an entry at (I, J) contributes
// prod_w M_w[s_w(I), s_w(J)] to tilde(t(I), t(J)).
ComplexMatrix sparse_probe_tilde(const std::vector<std::array<ComplexMatrix, 4>>& wire_kernels,
                                 const std::vector<std::size_t>& wire_digits, std::size_t n,
                                 std::size_t row, std::size_t col, Complex weight) {
    ComplexMatrix tilde(2, 2);
    Complex prod = weight;
    for (std::size_t w = 0; w < n - 1; ++w) {
        const std::size_t sr = (row >> (n - 1 - w)) & 1, sc = (col >> (n - 1 - w)) & 1;
        prod *= wire_kernels[w][wire_digits[w]](sr, sc);
    }
    tilde(row & 1, col & 1) += prod;
    return tilde;
}

Design build_design(std::size_t qubits, const OutcomeTuple& outcomes,
                    const std::array<InputState, 4>& input_set) {
    const std::size_t wires = qubits - 1;
    const std::size_t d = std::size_t{1} << qubits;
    const std::size_t dim = d * d;  // 4^n
    const std::size_t arr_count = std::size_t{1} << (2 * wires);

    // Per (wire, input-set index) contraction kernels for the fixed outcomes.
    std::vector<std::array<ComplexMatrix, 4>> kernels(wires);
    for (std::size_t w = 0; w < wires; ++w)
        for (std::size_t k = 0; k < 4; ++k)
            kernels[w][k] = teleportsim::wire_contraction(outcomes.outcomes[w], input_set[k]);

    RealMatrix a(dim, dim);
    std::vector<std::size_t> digits(wires, 0);
    for (std::size_t arr = 0; arr < arr_count; ++arr) {
        for (std::size_t w = 0; w < wires; ++w) digits[w] = (arr >> (2 * (wires - 1 - w))) & 3;

        const auto add_column = [&](std::size_t mu, const ComplexMatrix& tilde) {
            a(4 * arr + 0, mu) += tilde(0, 0).real();
            a(4 * arr + 1, mu) += tilde(1, 1).real();
            a(4 * arr + 2, mu) += tilde(0, 1).real();
            a(4 * arr + 3, mu) += tilde(0, 1).imag();
        };

        std::size_t mu = 0;
        for (std::size_t k = 0; k < d; ++k)
            add_column(mu++, sparse_probe_tilde(kernels, digits, qubits, k, k, 1.0));
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = k + 1; l < d; ++l) {
                ComplexMatrix t = sparse_probe_tilde(kernels, digits, qubits, k, l, 1.0);
                t += sparse_probe_tilde(kernels, digits, qubits, l, k, 1.0);
                add_column(mu++, t);
            }
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = k + 1; l < d; ++l) {
                ComplexMatrix t = sparse_probe_tilde(kernels, digits, qubits, k, l, kI);
                t += sparse_probe_tilde(kernels, digits, qubits, l, k, -kI);
                add_column(mu++, t);
            }
    }

    Design design;
    design.condition = qla::condition_number(a);
    try {
        design.qr = std::make_shared<qla::QrFactorization>(a);
    } catch (const NumericalError&) {
        throw NumericalError("reconstruct_nq: singular design matrix (condition estimate " +
                             std::to_string(design.condition) + ")");
    }
    design.a = std::move(a);
    return design;
}

const Design& cached_design(std::size_t qubits, const OutcomeTuple& outcomes,
                            const std::array<InputState, 4>& input_set) {
    static std::mutex mu;
    static std::map<DesignKey, Design> cache;
    std::lock_guard<std::mutex> lock(mu);
    const DesignKey key = design_key(qubits, outcomes, input_set);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_design(qubits, outcomes, input_set)).first;
    return it->second;
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::ClosedForm1: return "ClosedForm1";
        case Method::ClosedForm2: return "ClosedForm2";
        case Method::ClosedForm3: return "ClosedForm3";
        case Method::LinearN: return "LinearN";
    }
    return "?";
}

qstate::InputState outcome_remap(BellOutcome outcome, const InputState& input) {
    const Complex a = input.alpha();
    const Complex b = input.beta();
    switch (outcome) {
        case BellOutcome::PsiMinus: return InputState(a, b);
        case BellOutcome::PsiPlus: return InputState(-a, b);
        case BellOutcome::PhiMinus: return InputState(b, a);
        case BellOutcome::PhiPlus: return InputState(-b, a);
    }
    throw std::invalid_argument("outcome_remap: bad outcome");
}

qla::ComplexMatrix one_qubit_raw(const std::array<double, 4>& q) {
    ComplexMatrix m(2, 2);
    m(0, 0) = 2.0 * q[O];
    m(1, 1) = 2.0 * q[Z];
    m(0, 1) = (1.0 - kI) * (q[Z] + q[O]) + 2.0 * kI * q[R] - 2.0 * q[P];
    m(1, 0) = std::conj(m(0, 1));
    return m;
}

Projection project_physical(const qla::ComplexMatrix& raw) {
    if (!raw.is_square()) throw std::invalid_argument("project_physical: matrix not square");
    std::size_t d = raw.rows(), qubits = 0;
    while (d > 1 && d % 2 == 0) {
        d /= 2;
        ++qubits;
    }
    if (d != 1 || qubits == 0) throw std::invalid_argument("project_physical: dimension is not 2^n");
    if (raw.hermiticity_error() > kDataHermTol) {
        throw std::invalid_argument("project_physical: input not Hermitian within tolerance");
    }

    const qla::EigenSystem eig = qla::hermitian_eigen(hermitian_part(raw));
    double clipped_sum = 0.0, max_clip = 0.0;
    std::vector<double> lam(eig.values.size());
    for (std::size_t k = 0; k < lam.size(); ++k) {
        lam[k] = std::max(eig.values[k], 0.0);
        max_clip = std::max(max_clip, lam[k] - eig.values[k]);
        clipped_sum += lam[k];
    }
    if (clipped_sum <= 0.0) throw NumericalError("project_physical: no positive eigenvalue remains");

    const std::size_t n = raw.rows();
    ComplexMatrix rho(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = lam[k] / clipped_sum;
        if (w == 0.0) continue;
        for (std::size_t r = 0; r < n; ++r) {
            const Complex vr = eig.vectors(r, k) * w;
            for (std::size_t c = 0; c < n; ++c) rho(r, c) += vr * std::conj(eig.vectors(c, k));
        }
    }
    rho = hermitian_part(rho);

    Projection out{qstate::DensityMatrix(qubits, std::move(rho)),
                   max_clip > 1e-9 || std::abs(clipped_sum - 1.0) > 1e-9};
    return out;
}

ReconstructionReport reconstruct_1q(const std::array<double, 4>& q_by_probe) {
    for (double q : q_by_probe) {
        if (!std::isfinite(q) || q < -1e-6 || q > 0.5 + 1e-6) {
            throw std::invalid_argument("reconstruct_1q: probe probability outside [0, 1/2]");
        }
    }
    return make_report(one_qubit_raw(q_by_probe), 0.0, closed_form_condition(Method::ClosedForm1),
                       Method::ClosedForm1);
}

ReconstructionReport reconstruct_2q(const std::array<qla::ComplexMatrix, 4>& tilde_by_input,
                                    BellOutcome outcome) {
    for (const ComplexMatrix& t : tilde_by_input) check_tilde(t, "reconstruct_2q");

    const auto coeff = standardize_coefficients(outcome, qstate::standard_inputs());
    std::array<ComplexMatrix, 4> std_data{ComplexMatrix(2, 2), ComplexMatrix(2, 2), ComplexMatrix(2, 2),
                                          ComplexMatrix(2, 2)};
    for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t k = 0; k < 4; ++k) {
            if (coeff[j][k] == 0.0) continue;
            std_data[j] += coeff[j][k] * hermitian_part(tilde_by_input[k]);
        }

    return make_report(two_qubit_m_matrix(std_data), 0.0, closed_form_condition(Method::ClosedForm2),
                       Method::ClosedForm2);
}

ReconstructionReport reconstruct_3q(const std::array<qla::ComplexMatrix, 16>& tilde_by_pair,
                                    const OutcomeTuple& outcomes) {
    if (outcomes.outcomes.size() != 2) throw std::invalid_argument("reconstruct_3q: need a two-wire outcome");
    for (const ComplexMatrix& t : tilde_by_pair) check_tilde(t, "reconstruct_3q");

    const auto c1 = standardize_coefficients(outcomes.outcomes[0], qstate::standard_inputs());
    const auto c2 = standardize_coefficients(outcomes.outcomes[1], qstate::standard_inputs());

    std::array<ComplexMatrix, 16> work{};
    for (std::size_t k = 0; k < 16; ++k) work[k] = ComplexMatrix(2, 2);
    // wire 1 recombination
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t j = 0; j < 4; ++j)
            for (std::size_t i = 0; i < 4; ++i) {
                if (c1[k][i] == 0.0) continue;
                work[k * 4 + j] += c1[k][i] * hermitian_part(tilde_by_pair[i * 4 + j]);
            }
    // wire 2 recombination
    std::array<ComplexMatrix, 16> std_data{};
    for (std::size_t k = 0; k < 16; ++k) std_data[k] = ComplexMatrix(2, 2);
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t l = 0; l < 4; ++l)
            for (std::size_t j = 0; j < 4; ++j) {
                if (c2[l][j] == 0.0) continue;
                std_data[k * 4 + l] += c2[l][j] * work[k * 4 + j];
            }

    const ComplexMatrix middle = three_qubit_m_matrix(std_data);
    return make_report(middle_to_last_3q(middle), 0.0, closed_form_condition(Method::ClosedForm3),
                       Method::ClosedForm3);
}

ReconstructionReport reconstruct_nq(const std::vector<qla::ComplexMatrix>& tilde_by_arrangement,
                                    const OutcomeTuple& outcomes, std::size_t qubits,
                                    const std::array<InputState, 4>& input_set) {
    if (qubits < 2 || qubits > 5) throw std::invalid_argument("reconstruct_nq: qubits must be in [2, 5]");
    const std::size_t wires = qubits - 1;
    if (outcomes.outcomes.size() != wires) {
        throw std::invalid_argument("reconstruct_nq: outcome tuple length must be qubits - 1");
    }
    const std::size_t arr_count = std::size_t{1} << (2 * wires);
    if (tilde_by_arrangement.size() != arr_count) {
        throw InsufficientDataError("reconstruct_nq: expected " + std::to_string(arr_count) +
                                    " arrangements, got " + std::to_string(tilde_by_arrangement.size()));
    }
    for (const ComplexMatrix& t : tilde_by_arrangement) check_tilde(t, "reconstruct_nq");

    const std::size_t d = std::size_t{1} << qubits;
    std::vector<double> y(d * d, 0.0);
    for (std::size_t arr = 0; arr < arr_count; ++arr) {
        const ComplexMatrix t = hermitian_part(tilde_by_arrangement[arr]);
        y[4 * arr + 0] = t(0, 0).real();
        y[4 * arr + 1] = t(1, 1).real();
        y[4 * arr + 2] = t(0, 1).real();
        y[4 * arr + 3] = t(0, 1).imag();
    }

    const Design& design = cached_design(qubits, outcomes, input_set);
    const std::vector<double> x = design.qr->solve(y);

    double res_sq = 0.0;
    for (std::size_t r = 0; r < y.size(); ++r) {
        double ax = 0.0;
        for (std::size_t c = 0; c < y.size(); ++c) ax += design.a(r, c) * x[c];
        res_sq += (ax - y[r]) * (ax - y[r]);
    }

    return make_report(unvec_hermitian(x, d), std::sqrt(res_sq), design.condition, Method::LinearN);
}

ReconstructionReport reconstruct_records(const std::vector<teleportsim::TildeRecord>& records,
                                         MethodChoice choice, const std::array<InputState, 4>& input_set) {
    if (records.empty()) throw InsufficientDataError("reconstruct_records: no records");
    const std::size_t wires = records.front().arrangement.inputs.size();
    const std::size_t qubits = wires + 1;
    const std::size_t arr_count = std::size_t{1} << (2 * wires);
    const OutcomeTuple& outcomes = records.front().outcome;

    std::vector<qla::ComplexMatrix> tildes(arr_count);
    std::vector<bool> seen(arr_count, false);
    for (const teleportsim::TildeRecord& rec : records) {
        if (!(rec.outcome == outcomes)) {
            throw std::invalid_argument("reconstruct_records: records mix different outcome tuples");
        }
        const std::size_t idx = rec.arrangement.index_in(input_set);
        if (seen[idx]) throw std::invalid_argument("reconstruct_records: duplicate arrangement");
        seen[idx] = true;
        tildes[idx] = rec.tilde;
    }
    for (std::size_t i = 0; i < arr_count; ++i) {
        if (!seen[i]) {
            throw InsufficientDataError("reconstruct_records: arrangement " + std::to_string(i) +
                                        " missing from the record set");
        }
    }

    const bool standard = is_standard_set(input_set);
    MethodChoice effective = choice;
    if (choice == MethodChoice::Auto) {
        effective = (qubits <= 3 && standard) ? MethodChoice::Closed : MethodChoice::Linear;
    }
    if (effective == MethodChoice::Closed) {
        if (!standard) {
            throw std::invalid_argument("reconstruct_records: closed forms need the standard input set");
        }
        if (qubits == 2) {
            std::array<ComplexMatrix, 4> data{ComplexMatrix(2, 2), ComplexMatrix(2, 2), ComplexMatrix(2, 2),
                                              ComplexMatrix(2, 2)};
            for (std::size_t k = 0; k < 4; ++k) data[k] = tildes[k];
            return reconstruct_2q(data, outcomes.outcomes[0]);
        }
        if (qubits == 3) {
            std::array<ComplexMatrix, 16> data{};
            for (std::size_t k = 0; k < 16; ++k) data[k] = tildes[k];
            return reconstruct_3q(data, outcomes);
        }
        throw std::invalid_argument("reconstruct_records: no closed form for " + std::to_string(qubits) +
                                    " qubits");
    }
    return reconstruct_nq(tildes, outcomes, qubits, input_set);
}

}  // namespace teletomo::tomo
