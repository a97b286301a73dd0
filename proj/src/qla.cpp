// qla.cpp

#include "teletomo/qla.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>

#include "teletomo/errors.hpp"
#include "teletomo/rng.hpp"

namespace teletomo::qla {

namespace {

void check_dims(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("ComplexMatrix: dimensions must be positive");
    }
    if (rows > kMaxDim || cols > kMaxDim) {
        throw std::invalid_argument("ComplexMatrix: dimension " + std::to_string(std::max(rows, cols)) +
                                    " exceeds supported maximum " + std::to_string(kMaxDim));
    }
}

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::size_t product(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    check_dims(rows, cols);
    entries_.assign(rows * cols, Complex{0.0, 0.0});
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    check_dims(rows, cols);
    if (entries_.size() != rows * cols) {
        throw std::invalid_argument("ComplexMatrix: entry count does not match dimensions");
    }
    for (const Complex& z : entries_) {
        if (!finite(z)) throw std::invalid_argument("ComplexMatrix: non-finite entry");
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
}

Complex ComplexMatrix::trace() const {
    if (!is_square()) throw std::invalid_argument("trace: matrix not square");
    Complex t{0.0, 0.0};
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

double ComplexMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const Complex& z : entries_) s += std::norm(z);
    return std::sqrt(s);
}

double ComplexMatrix::max_abs() const {
    double m = 0.0;
    for (const Complex& z : entries_) m = std::max(m, std::abs(z));
    return m;
}

double ComplexMatrix::hermiticity_error() const {
    if (!is_square()) throw std::invalid_argument("hermiticity_error: matrix not square");
    double m = 0.0;
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = r; c < cols_; ++c)
            m = std::max(m, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
    return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw std::invalid_argument("matrix addition: shape mismatch");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw std::invalid_argument("matrix subtraction: shape mismatch");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= other.entries_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scalar) {
    for (Complex& z : entries_) z *= scalar;
    return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(Complex scalar, ComplexMatrix m) { return m *= scalar; }
ComplexMatrix operator*(double scalar, ComplexMatrix m) { return m *= Complex{scalar, 0.0}; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matrix product: shape mismatch");
    ComplexMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{0.0, 0.0}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() > kMaxDim / b.rows() || a.cols() > kMaxDim / b.cols()) {
        throw std::invalid_argument("tensor: result dimension exceeds supported maximum");
    }
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ra = 0; ra < a.rows(); ++ra)
        for (std::size_t ca = 0; ca < a.cols(); ++ca) {
            const Complex v = a(ra, ca);
            if (v == Complex{0.0, 0.0}) continue;
            for (std::size_t rb = 0; rb < b.rows(); ++rb)
                for (std::size_t cb = 0; cb < b.cols(); ++cb)
                    out(ra * b.rows() + rb, ca * b.cols() + cb) = v * b(rb, cb);
        }
    return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep) {
    if (!m.is_square()) throw std::invalid_argument("partial_trace: matrix not square");
    if (product(dims) != m.rows()) throw std::invalid_argument("partial_trace: dims do not match matrix");
    if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");

    std::vector<std::size_t> kept(keep);
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    if (kept.back() >= dims.size()) throw std::invalid_argument("partial_trace: keep index out of range");

    std::vector<std::size_t> traced;
    for (std::size_t i = 0; i < dims.size(); ++i)
        if (!std::binary_search(kept.begin(), kept.end(), i)) traced.push_back(i);

    // Strides of each subsystem in the flat index (subsystem 0 most significant).
    std::vector<std::size_t> stride(dims.size(), 1);
    for (std::size_t i = dims.size(); i-- > 1;) stride[i - 1] = stride[i] * dims[i];

    auto offsets = [&](const std::vector<std::size_t>& subs) {
        std::size_t count = 1;
        for (std::size_t s : subs) count *= dims[s];
        std::vector<std::size_t> off(count, 0);
        for (std::size_t idx = 0; idx < count; ++idx) {
            std::size_t rem = idx, acc = 0;
            for (std::size_t i = subs.size(); i-- > 0;) {
                acc += (rem % dims[subs[i]]) * stride[subs[i]];
                rem /= dims[subs[i]];
            }
            off[idx] = acc;
        }
        return off;
    };

    const std::vector<std::size_t> off_keep = offsets(kept);
    const std::vector<std::size_t> off_tr = offsets(traced);

    ComplexMatrix out(off_keep.size(), off_keep.size());
    for (std::size_t r = 0; r < off_keep.size(); ++r)
        for (std::size_t c = 0; c < off_keep.size(); ++c) {
            Complex s{0.0, 0.0};
            for (std::size_t t : off_tr) s += m(off_keep[r] + t, off_keep[c] + t);
            out(r, c) = s;
        }
    return out;
}

ComplexMatrix permute_subsystems(const ComplexMatrix& m, const std::vector<std::size_t>& dims,
                                 const std::vector<std::size_t>& perm) {
    if (!m.is_square()) throw std::invalid_argument("permute_subsystems: matrix not square");
    if (product(dims) != m.rows()) throw std::invalid_argument("permute_subsystems: dims do not match matrix");
    if (perm.size() != dims.size()) throw std::invalid_argument("permute_subsystems: bad permutation length");
    std::vector<std::size_t> seen(dims.size(), 0);
    for (std::size_t p : perm) {
        if (p >= dims.size() || seen[p]++) throw std::invalid_argument("permute_subsystems: not a permutation");
    }

    std::vector<std::size_t> stride(dims.size(), 1);
    for (std::size_t i = dims.size(); i-- > 1;) stride[i - 1] = stride[i] * dims[i];

    // map[i] = flat input index whose digits, read through perm, give output index i.
    const std::size_t dim = m.rows();
    std::vector<std::size_t> map(dim, 0);
    for (std::size_t i = 0; i < dim; ++i) {
        std::size_t rem = i, acc = 0;
        for (std::size_t p = perm.size(); p-- > 0;) {
            const std::size_t sub = perm[p];
            acc += (rem % dims[sub]) * stride[sub];
            rem /= dims[sub];
        }
        map[i] = acc;
    }

    ComplexMatrix out(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) out(r, c) = m(map[r], map[c]);
    return out;
}

namespace {

// One cyclic sweep of complex Jacobi rotations; returns remaining
// off-diagonal Frobenius mass.
double jacobi_sweep(ComplexMatrix& h, ComplexMatrix& v) {
    const std::size_t n = h.rows();
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            const Complex hpq = h(p, q);
            const double apq = std::abs(hpq);
            if (apq < 1e-300) continue;
            const Complex phase = hpq / apq;
            const double app = h(p, p).real();
            const double aqq = h(q, q).real();
            const double tau = (app - aqq) / (2.0 * apq);
            const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
            const double c = 1.0 / std::sqrt(1.0 + t * t);
            const double s = t * c;
            const Complex sp = s * phase;
            const Complex spc = s * std::conj(phase);
            // H <- U^dag H U with U = [[c, -s*phase],[s*conj(phase), c]] on (p,q).
            for (std::size_t k = 0; k < n; ++k) {
                const Complex hkp = h(k, p), hkq = h(k, q);
                h(k, p) = c * hkp + spc * hkq;
                h(k, q) = c * hkq - sp * hkp;
            }
            for (std::size_t k = 0; k < n; ++k) {
                const Complex hpk = h(p, k), hqk = h(q, k);
                h(p, k) = c * hpk + sp * hqk;
                h(q, k) = c * hqk - spc * hpk;
            }
            h(p, q) = 0.0;
            h(q, p) = 0.0;
            h(p, p) = Complex{h(p, p).real(), 0.0};
            h(q, q) = Complex{h(q, q).real(), 0.0};
            for (std::size_t k = 0; k < n; ++k) {
                const Complex vkp = v(k, p), vkq = v(k, q);
                v(k, p) = c * vkp + spc * vkq;
                v(k, q) = c * vkq - sp * vkp;
            }
        }
    }
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * std::norm(h(p, q));
    return std::sqrt(off);
}

}  // namespace

EigenSystem hermitian_eigen(const ComplexMatrix& m) {
    if (!m.is_square()) throw std::invalid_argument("hermitian_eigen: matrix not square");
    if (m.hermiticity_error() > kHermTol) {
        throw std::invalid_argument("hermitian_eigen: input not Hermitian within tolerance");
    }
    const std::size_t n = m.rows();

    ComplexMatrix h(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) h(r, c) = 0.5 * (m(r, c) + std::conj(m(c, r)));
    ComplexMatrix v = ComplexMatrix::identity(n);

    const double scale = std::max(1.0, h.frobenius_norm());
    bool converged = false;
    for (int sweep = 0; sweep < 100; ++sweep) {
        if (jacobi_sweep(h, v) <= 1e-15 * scale) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NumericalError("hermitian_eigen: Jacobi iteration did not converge");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return h(a, a).real() < h(b, b).real(); });

    EigenSystem out;
    out.values.resize(n);
    out.vectors = ComplexMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = h(order[k], order[k]).real();
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

QrFactorization::QrFactorization(const RealMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("QrFactorization: matrix not square");
    n_ = a.rows();
    qr_ = a;
    betas_.assign(n_, 0.0);
    piv_.resize(n_);
    std::iota(piv_.begin(), piv_.end(), std::size_t{0});

    // Downdated column norms drive the pivot order; the reflector norm is
    // recomputed exactly at each step.
    std::vector<double> colnorm(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) colnorm[j] += qr_(i, j) * qr_(i, j);

    std::vector<double> dots(n_, 0.0);
    double maxdiag = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
        std::size_t best = k;
        for (std::size_t j = k + 1; j < n_; ++j) {
            if (colnorm[j] > colnorm[best]) best = j;
        }
        if (best != k) {
            for (std::size_t i = 0; i < n_; ++i) std::swap(qr_(i, k), qr_(i, best));
            std::swap(piv_[k], piv_[best]);
            std::swap(colnorm[k], colnorm[best]);
        }

        double nrm_sq = 0.0;
        for (std::size_t i = k; i < n_; ++i) nrm_sq += qr_(i, k) * qr_(i, k);
        double alpha = std::sqrt(nrm_sq);
        if (qr_(k, k) > 0.0) alpha = -alpha;
        maxdiag = std::max(maxdiag, std::abs(alpha));
        if (std::abs(alpha) <= static_cast<double>(n_) * 1e-15 * std::max(maxdiag, 1e-300)) {
            throw NumericalError("solve_linear: matrix singular to working tolerance");
        }

        const double vk = qr_(k, k) - alpha;
        qr_(k, k) = alpha;
        betas_[k] = -1.0 / (alpha * vk);  // beta = 2 / |v|^2 for v = x - alpha e1
        v0_.push_back(vk);
        // Reflector lives below the diagonal in column k (leading entry vk).
        // Apply it to the trailing columns in two row-major passes.
        std::fill(dots.begin() + k + 1, dots.end(), 0.0);
        for (std::size_t i = k; i < n_; ++i) {
            const double vi = (i == k) ? vk : qr_(i, k);
            for (std::size_t j = k + 1; j < n_; ++j) dots[j] += vi * qr_(i, j);
        }
        for (std::size_t i = k; i < n_; ++i) {
            const double f = betas_[k] * ((i == k) ? vk : qr_(i, k));
            for (std::size_t j = k + 1; j < n_; ++j) qr_(i, j) -= f * dots[j];
        }
        for (std::size_t j = k + 1; j < n_; ++j) {
            colnorm[j] = std::max(0.0, colnorm[j] - qr_(k, j) * qr_(k, j));
        }
    }
}

std::vector<double> QrFactorization::solve(const std::vector<double>& y) const {
    if (y.size() != n_) throw std::invalid_argument("solve: right-hand side has wrong length");
    std::vector<double> z(y);
    // Apply Q^T.
    for (std::size_t k = 0; k < n_; ++k) {
        double dot = v0_[k] * z[k];
        for (std::size_t i = k + 1; i < n_; ++i) dot += qr_(i, k) * z[i];
        const double f = betas_[k] * dot;
        z[k] -= f * v0_[k];
        for (std::size_t i = k + 1; i < n_; ++i) z[i] -= f * qr_(i, k);
    }
    // Back substitution with R.
    std::vector<double> w(n_, 0.0);
    for (std::size_t i = n_; i-- > 0;) {
        double s = z[i];
        for (std::size_t j = i + 1; j < n_; ++j) s -= qr_(i, j) * w[j];
        w[i] = s / qr_(i, i);
    }
    std::vector<double> x(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) x[piv_[j]] = w[j];
    return x;
}

std::vector<double> QrFactorization::solve_transposed(const std::vector<double>& y) const {
    if (y.size() != n_) throw std::invalid_argument("solve_transposed: right-hand side has wrong length");
    // a^T x = y with a P = Q R reads R^T (Q^T x) = P^T y.
    std::vector<double> z(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) z[j] = y[piv_[j]];
    // Forward substitution with R^T.
    std::vector<double> u(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        double s = z[i];
        for (std::size_t j = 0; j < i; ++j) s -= qr_(j, i) * u[j];
        u[i] = s / qr_(i, i);
    }
    // x = Q u: reflectors in reverse order.
    for (std::size_t k = n_; k-- > 0;) {
        double dot = v0_[k] * u[k];
        for (std::size_t i = k + 1; i < n_; ++i) dot += qr_(i, k) * u[i];
        const double f = betas_[k] * dot;
        u[k] -= f * v0_[k];
        for (std::size_t i = k + 1; i < n_; ++i) u[i] -= f * qr_(i, k);
    }
    return u;
}

namespace {

// Eigenvalues of a symmetric real matrix by cyclic Jacobi (values only).
std::vector<double> symmetric_eigenvalues(RealMatrix s) {
    const std::size_t n = s.rows();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale += s(i, j) * s(i, j);
    scale = std::max(1.0, std::sqrt(scale));

    for (int sweep = 0; sweep < 100; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = s(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double tau = (s(p, p) - s(q, q)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double skp = s(k, p), skq = s(k, q);
                    s(k, p) = c * skp + sn * skq;
                    s(k, q) = c * skq - sn * skp;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double spk = s(p, k), sqk = s(q, k);
                    s(p, k) = c * spk + sn * sqk;
                    s(q, k) = c * sqk - sn * spk;
                }
                s(p, q) = 0.0;
                s(q, p) = 0.0;
            }
        }
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * s(p, q) * s(p, q);
        if (std::sqrt(off) <= 1e-15 * scale) break;
    }
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = s(i, i);
    std::sort(vals.begin(), vals.end());
    return vals;
}

}  // namespace

namespace {

// Largest eigenvalue of the map v -> op(v) (symmetric positive definite) by
// power iteration with a fixed deterministic start vector.
template <typename Op>
double dominant_eigenvalue(std::size_t n, Op&& op) {
    std::vector<double> v(n);
    std::uint64_t state = 0x853C49E6748FEA9Bull;
    for (double& x : v) x = 1.0 + 1e-3 * static_cast<double>(rng::splitmix64(state) >> 40);
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    for (double& x : v) x /= std::sqrt(nrm);

    double rho = 0.0;
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<double> w = op(v);
        double rq = 0.0, wn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            rq += v[i] * w[i];
            wn += w[i] * w[i];
        }
        wn = std::sqrt(wn);
        if (wn == 0.0) return 0.0;
        for (double& x : w) x /= wn;
        v = std::move(w);
        if (iter > 4 && std::abs(rq - rho) <= 1e-12 * std::abs(rq)) return rq;
        rho = rq;
    }
    return rho;
}

}  // namespace

double condition_number(const RealMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("condition_number: matrix not square");
    const std::size_t n = a.rows();

    if (n <= 512) {
        RealMatrix ata(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) s += a(k, i) * a(k, j);
                ata(i, j) = s;
                ata(j, i) = s;
            }
        const std::vector<double> lam = symmetric_eigenvalues(std::move(ata));
        const double hi = std::sqrt(std::max(lam.back(), 0.0));
        const double lo = std::sqrt(std::max(lam.front(), 0.0));
        if (lo <= 0.0) return std::numeric_limits<double>::infinity();
        return hi / lo;
    }

    // Large systems: sigma_max from power iteration on a^T a, sigma_min from
    // inverse iteration through the QR factorization.
    std::unique_ptr<QrFactorization> qr;
    try {
        qr = std::make_unique<QrFactorization>(a);
    } catch (const NumericalError&) {
        return std::numeric_limits<double>::infinity();
    }
    const auto matvec = [&](const std::vector<double>& v, bool transposed) {
        std::vector<double> w(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (transposed) {
                    w[i] += a(j, i) * v[j];
                } else {
                    w[i] += a(i, j) * v[j];
                }
            }
        return w;
    };
    const double smax_sq =
        dominant_eigenvalue(n, [&](const std::vector<double>& v) { return matvec(matvec(v, false), true); });
    const double inv_smin_sq = dominant_eigenvalue(
        n, [&](const std::vector<double>& v) { return qr->solve(qr->solve_transposed(v)); });
    if (smax_sq <= 0.0 || inv_smin_sq <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(smax_sq * inv_smin_sq);
}

LinearSolution solve_linear(const RealMatrix& a, const std::vector<double>& y) {
    if (a.rows() != a.cols()) throw std::invalid_argument("solve_linear: matrix not square");
    if (y.size() != a.rows()) throw std::invalid_argument("solve_linear: right-hand side has wrong length");
    const QrFactorization qr(a);
    LinearSolution out;
    out.x = qr.solve(y);
    out.condition = condition_number(a);
    return out;
}

}  // namespace teletomo::qla
