#include <complex>

#include "doctest.h"
#include "rsh/hilbert.hpp"
#include "rsh/rng.hpp"

using namespace rsh;

namespace {

// Independent oracle: reduce by explicit index summation,
// (rho^S)_{ss'} = sum_{a,b} rho[(s,a,b),(s',a,b)], using only flat_index.
Operator ptrace_oracle(const CompositeSpace& sp, const Operator& rho) {
    Operator out = Operator::Zero(sp.n_s, sp.n_s);
    for (Index s = 0; s < sp.n_s; ++s)
        for (Index sp2 = 0; sp2 < sp.n_s; ++sp2)
            for (Index a = 0; a < sp.n_a; ++a)
                for (Index b = 0; b < sp.n_b; ++b)
                    out(s, sp2) += rho(sp.flat_index(s, a, b), sp.flat_index(sp2, a, b));
    return out;
}

Operator random_matrix(Index n, std::uint64_t seed) {
    Rng rng(seed);
    Operator m(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) m(i, j) = Complex(rng.gaussian(), rng.gaussian());
    return m;
}

}  // namespace

TEST_SUITE("hilbert") {

TEST_CASE("kron matches the 2x2 hand expansion") {
    Operator a(2, 2), b(2, 2);
    a << 1.0, Complex(0, 2), 3.0, 4.0;
    b << 5.0, 6.0, 7.0, Complex(0, -8);
    const Operator k = kron(a, b);
    REQUIRE(k.rows() == 4);
    REQUIRE(k.cols() == 4);
    // top-left block a00*b, bottom-right a11*b
    CHECK(k(0, 0) == a(0, 0) * b(0, 0));
    CHECK(k(0, 1) == a(0, 0) * b(0, 1));
    CHECK(k(1, 0) == a(0, 0) * b(1, 0));
    CHECK(k(0, 2) == a(0, 1) * b(0, 0));
    CHECK(k(2, 1) == a(1, 0) * b(0, 1));
    CHECK(k(3, 3) == a(1, 1) * b(1, 1));
    CHECK(k(2, 3) == a(1, 1) * b(0, 1));
    // associativity on a third factor
    Operator c = random_matrix(3, 7);
    // association order changes the rounding of the scalar triple products
    CHECK((kron(kron(a, b), c) - kron(a, kron(b, c))).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("flat ordering round-trips and matches the documented formula") {
    CompositeSpace sp(2, 3, 4);
    CHECK(sp.n_env() == 12);
    CHECK(sp.n_tot() == 24);
    Index running = 0;
    for (Index s = 0; s < 2; ++s)
        for (Index a = 0; a < 3; ++a)
            for (Index b = 0; b < 4; ++b) {
                const Index f = sp.flat_index(s, a, b);
                CHECK(f == running++);  // s-major, then a, then b
                const auto t = sp.unflatten(f);
                CHECK(t.s == s);
                CHECK(t.a == a);
                CHECK(t.b == b);
                CHECK(sp.env_index(a, b) == a * 4 + b);
            }
}

TEST_CASE("index range violations throw") {
    CompositeSpace sp(2, 2, 2);
    CHECK_THROWS_AS(sp.flat_index(2, 0, 0), RangeError);
    CHECK_THROWS_AS(sp.flat_index(0, -1, 0), RangeError);
    CHECK_THROWS_AS(sp.flat_index(0, 0, 2), RangeError);
    CHECK_THROWS_AS(sp.unflatten(8), RangeError);
    CHECK_THROWS_AS(sp.unflatten(-1), RangeError);
    CHECK_THROWS_AS(CompositeSpace(1, 2, 2), RangeError);  // system must be nontrivial
}

TEST_CASE("embed agrees with explicit kron products at (2,2,2)") {
    CompositeSpace sp(2, 2, 2);
    const Operator op = random_matrix(2, 11);
    const Operator op4 = random_matrix(4, 12);
    const Operator i2 = Operator::Identity(2, 2);
    CHECK((embed(sp, op, Factor::S) - kron(op, kron(i2, i2))).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((embed(sp, op, Factor::A) - kron(i2, kron(op, i2))).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((embed(sp, op, Factor::B) - kron(i2, kron(i2, op))).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((embed(sp, op4, Factor::SA) - kron(op4, i2)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((embed(sp, op4, Factor::AB) - kron(i2, op4)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(factor_dim(sp, Factor::S) == 2);
    CHECK(factor_dim(sp, Factor::SA) == 4);
    CHECK(factor_dim(sp, Factor::AB) == 4);
}

TEST_CASE("embed rejects operators of the wrong dimension") {
    CompositeSpace sp(2, 2, 3);
    CHECK_THROWS_AS(embed(sp, random_matrix(3, 1), Factor::S), ShapeError);
    CHECK_THROWS_AS(embed(sp, random_matrix(5, 1), Factor::AB), ShapeError);
}

TEST_CASE("partial trace matches the index-summation oracle") {
    CompositeSpace sp(3, 2, 4);
    Operator rho = random_matrix(sp.n_tot(), 21);
    rho = (rho + rho.adjoint()).eval();  // Hermitian input, need not be positive
    const Operator got = partial_trace_env(sp, rho);
    const Operator want = ptrace_oracle(sp, rho);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12);
    // trace is preserved
    CHECK(std::abs(got.trace() - rho.trace()) <= 1e-12 * std::abs(rho.trace()));
}

TEST_CASE("partial trace is linear") {
    CompositeSpace sp(2, 2, 3);
    const Operator x = random_matrix(sp.n_tot(), 31);
    const Operator y = random_matrix(sp.n_tot(), 32);
    const Complex c(0.7, -1.3);
    const Operator lhs = partial_trace_env(sp, x * c + y);
    const Operator rhs = partial_trace_env(sp, x) * c + partial_trace_env(sp, y);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("partial trace of a pure product state is the system projector") {
    CompositeSpace sp(2, 2, 2);
    Rng rng(5);
    Vector s(2), e(4);
    for (Index i = 0; i < 2; ++i) s(i) = Complex(rng.gaussian(), rng.gaussian());
    for (Index i = 0; i < 4; ++i) e(i) = Complex(rng.gaussian(), rng.gaussian());
    s.normalize();
    e.normalize();
    Vector psi(sp.n_tot());
    for (Index k = 0; k < 2; ++k) psi.segment(k * 4, 4) = s(k) * e;
    const Operator reduced = partial_trace_env(sp, psi * psi.adjoint());
    const Operator proj = s * s.adjoint();
    CHECK((reduced - proj).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("partial trace rejects a mismatched total dimension") {
    CompositeSpace sp(2, 2, 2);
    CHECK_THROWS_AS(partial_trace_env(sp, random_matrix(7, 1)), ShapeError);
}

}  // TEST_SUITE
