// qla.hpp
// Dense complex linear algebra for small matrices: arithmetic, Kronecker
// products, partial traces, subsystem permutations, Hermitian
// eigendecomposition and real linear solving.

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace teletomo::qla {

using Complex = std::complex<double>;

// Largest accepted matrix dimension (2^11).
inline constexpr std::size_t kMaxDim = 2048;

// Maximum tolerated deviation from exact Hermiticity, max|A - A^dagger|.
inline constexpr double kHermTol = 1e-9;

class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

    static ComplexMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }

    Complex& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

    const std::vector<Complex>& entries() const { return entries_; }

    ComplexMatrix adjoint() const;
    ComplexMatrix transpose() const;
    Complex trace() const;
    double frobenius_norm() const;
    double max_abs() const;
    // max|A - A^dagger| over all entries; square matrices only.
    double hermiticity_error() const;

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(Complex scalar);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> entries_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex scalar, ComplexMatrix m);
ComplexMatrix operator*(double scalar, ComplexMatrix m);

// Kronecker product; a's indices are the most significant.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

// Reduced matrix over the kept subsystems (ascending subsystem order).
// dims lists the subsystem dimensions, subsystem 0 most significant.
ComplexMatrix partial_trace(const ComplexMatrix& m, const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep);

// Reorders tensor factors: output subsystem p is input subsystem perm[p].
ComplexMatrix permute_subsystems(const ComplexMatrix& m, const std::vector<std::size_t>& dims,
                                 const std::vector<std::size_t>& perm);

struct EigenSystem {
    std::vector<double> values;  // ascending
    ComplexMatrix vectors;       // column k pairs with values[k]
};

// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
// Contract: m = V diag(values) V^dagger with Frobenius residual <= 1e-10
// for dim <= 32; input must be Hermitian within kHermTol.
EigenSystem hermitian_eigen(const ComplexMatrix& m);

class RealMatrix {
public:
    RealMatrix() = default;
    RealMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const double& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Householder QR with column pivoting of a square matrix; reusable for
// several right-hand sides.
class QrFactorization {
public:
    explicit QrFactorization(const RealMatrix& a);
    std::vector<double> solve(const std::vector<double>& y) const;
    // Solves a^T x = y through the same factorization.
    std::vector<double> solve_transposed(const std::vector<double>& y) const;
    std::size_t dim() const { return n_; }

private:
    std::size_t n_ = 0;
    RealMatrix qr_;                 // R in the upper triangle, reflectors below
    std::vector<double> v0_;        // leading reflector components
    std::vector<double> betas_;
    std::vector<std::size_t> piv_;
};

// Ratio of the largest to the smallest singular value. Exact (Jacobi
// eigenvalues of a^T a) up to dimension 512; estimated by power and inverse
// iteration through a QR factorization beyond that.
double condition_number(const RealMatrix& a);

struct LinearSolution {
    std::vector<double> x;
    double condition;
};

// Solves a x = y for square a; throws NumericalError when a is singular to
// tolerance. For nonsingular a the residual satisfies |a x - y| <= 1e-9 |y|.
LinearSolution solve_linear(const RealMatrix& a, const std::vector<double>& y);

}  // namespace teletomo::qla
