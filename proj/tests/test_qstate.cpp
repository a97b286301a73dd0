// Unit tests for the quantum-state domain layer.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "teletomo/qla.hpp"
#include "teletomo/qstate.hpp"

using namespace teletomo;
using qla::Complex;
using qla::ComplexMatrix;
using namespace teletomo::qstate;

namespace {

ComplexMatrix projector01(double p0, double p1) {
    ComplexMatrix m(2, 2);
    m(0, 0) = p0;
    m(1, 1) = p1;
    return m;
}

}  // namespace

TEST_CASE("bell projector entries match the outer-product oracle") {
    // oracle: outer product of (|01> - |10>)/sqrt(2)
    const ComplexMatrix p = bell_projector(BellOutcome::PsiMinus);
    CHECK(p(1, 1).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p(2, 2).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p(1, 2).real() == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(p(2, 1).real() == doctest::Approx(-0.5).epsilon(1e-15));
    double off_mass = p.frobenius_norm() * p.frobenius_norm() - 4 * 0.25;
    CHECK(std::abs(off_mass) < 1e-14);

    for (BellOutcome o : kBellOutcomes) {
        const ComplexMatrix v = bell_state_vector(o);
        CHECK((bell_projector(o) - v * v.adjoint()).max_abs() == 0.0);
    }
}

TEST_CASE("bell projectors are rank-1, complete and mutually orthogonal") {
    ComplexMatrix sum(4, 4);
    for (BellOutcome o : kBellOutcomes) {
        const ComplexMatrix p = bell_projector(o);
        CHECK((p * p - p).max_abs() < 1e-15);
        CHECK(p.hermiticity_error() == 0.0);
        CHECK(std::abs(p.trace() - Complex{1.0, 0.0}) < 1e-15);
        sum += p;
    }
    CHECK((sum - ComplexMatrix::identity(4)).max_abs() < 1e-15);

    for (BellOutcome a : kBellOutcomes)
        for (BellOutcome b : kBellOutcomes) {
            if (a == b) continue;
            CHECK((bell_projector(a) * bell_projector(b)).max_abs() < 1e-15);
        }
}

TEST_CASE("standard inputs have the documented order and amplitudes") {
    const auto& in = standard_inputs();
    CHECK(in[0].alpha() == Complex{1.0, 0.0});
    CHECK(in[0].beta() == Complex{0.0, 0.0});
    CHECK(*in[0].label() == "Zero");
    CHECK(in[1].alpha() == Complex{0.0, 0.0});
    CHECK(in[1].beta() == Complex{1.0, 0.0});
    CHECK(in[3].alpha().real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(in[3].beta().imag() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(in[3].beta().real() == 0.0);
    CHECK(*in[3].label() == "RightCircular");
    for (const auto& s : in) CHECK(std::abs(std::norm(s.alpha()) + std::norm(s.beta()) - 1.0) < 1e-12);
}

TEST_CASE("standard input Gram table") {
    const auto& in = standard_inputs();
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            if (i == j) continue;
            const Complex ov = std::conj(in[i].alpha()) * in[j].alpha() +
                               std::conj(in[i].beta()) * in[j].beta();
            const double expect = (i + j == 1) ? 0.0 : 0.5;  // <0|1> only orthogonal pair
            CHECK(std::norm(ov) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("InputState validates normalization") {
    CHECK_THROWS_AS(InputState(1.0, 1.0), std::invalid_argument);
    CHECK_NOTHROW(InputState(std::sqrt(0.5), Complex{0.0, -std::sqrt(0.5)}));
}

TEST_CASE("DensityMatrix constructor rejects unphysical matrices") {
    CHECK_THROWS_AS(DensityMatrix(1, projector01(1.5, -0.5)), std::invalid_argument);  // not PSD
    CHECK_THROWS_AS(DensityMatrix(1, projector01(0.7, 0.7)), std::invalid_argument);   // trace 1.4
    ComplexMatrix nh = projector01(0.5, 0.5);
    nh(0, 1) = Complex{0.0, 0.25};
    nh(1, 0) = Complex{0.0, 0.25};
    CHECK_THROWS_AS(DensityMatrix(1, nh), std::invalid_argument);  // not Hermitian
    CHECK_THROWS_AS(DensityMatrix(2, projector01(0.5, 0.5)), std::invalid_argument);   // dim mismatch
    CHECK_NOTHROW(DensityMatrix(1, projector01(0.25, 0.75)));
}

TEST_CASE("random_density produces valid states with controlled rank") {
    const DensityMatrix pure = random_density(1, 1, 5);
    const qla::EigenSystem eig = qla::hermitian_eigen(pure.mat());
    CHECK(std::abs(eig.values[0]) < 1e-12);
    CHECK(eig.values[1] == doctest::Approx(1.0).epsilon(1e-12));

    for (std::uint64_t seed : {0ull, 9ull, 123456789ull}) {
        const DensityMatrix rho = random_density(3, 5, seed);
        CHECK(std::abs(rho.mat().trace().real() - 1.0) < 1e-12);
        const auto e = qla::hermitian_eigen(rho.mat());
        CHECK(e.values.front() > -1e-12);
        // rank r: exactly 2^n - r eigenvalues vanish to tolerance
        int zeros = 0;
        for (double v : e.values)
            if (std::abs(v) < 1e-12) ++zeros;
        CHECK(zeros == 3);
    }
}

TEST_CASE("random_density is deterministic in the seed") {
    const DensityMatrix a = random_density(2, 4, 42);
    const DensityMatrix b = random_density(2, 4, 42);
    const DensityMatrix c = random_density(2, 4, 43);
    CHECK((a.mat() - b.mat()).max_abs() == 0.0);
    CHECK((a.mat() - c.mat()).max_abs() > 0.0);
}

TEST_CASE("random_density rejects invalid rank and marginals stay physical") {
    CHECK_THROWS_AS(random_density(2, 5, 1), std::invalid_argument);
    CHECK_THROWS_AS(random_density(2, 0, 1), std::invalid_argument);

    const DensityMatrix rho = random_density(3, 8, 77);
    const ComplexMatrix marg = qla::partial_trace(rho.mat(), {2, 2, 2}, {1});
    CHECK_NOTHROW(DensityMatrix(1, marg));
}

TEST_CASE("trace_distance examples") {
    const DensityMatrix zero(1, projector01(1.0, 0.0));
    const DensityMatrix one(1, projector01(0.0, 1.0));
    const DensityMatrix mixed(1, projector01(0.5, 0.5));
    CHECK(trace_distance(zero, zero) == 0.0);
    CHECK(trace_distance(zero, one) == doctest::Approx(1.0).epsilon(1e-12));
    // eigenvalues of diag(1/2, -1/2) give distance 1/2
    CHECK(trace_distance(zero, mixed) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(trace_distance(zero, random_density(2, 4, 3)), std::invalid_argument);
}

TEST_CASE("frobenius_distance examples and entrywise oracle") {
    const DensityMatrix zero(1, projector01(1.0, 0.0));
    const DensityMatrix one(1, projector01(0.0, 1.0));
    CHECK(frobenius_distance(zero, zero) == 0.0);
    CHECK(frobenius_distance(zero, one) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    const DensityMatrix a = random_density(2, 4, 10);
    const DensityMatrix b = random_density(2, 4, 11);
    double sq = 0.0;  // direct entrywise summation oracle
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) sq += std::norm(a.mat()(r, c) - b.mat()(r, c));
    CHECK(frobenius_distance(a, b) == doctest::Approx(std::sqrt(sq)).epsilon(1e-12));
}
