#pragma once

#include "rsh/errors.hpp"
#include "rsh/types.hpp"

namespace rsh {

// Tensor factorization S (x) A (x) B. Flat index ordering is s-major:
// flat = (s * n_a + a) * n_b + b, so tracing out the environment is a
// contiguous block sum.
struct CompositeSpace {
    Index n_s = 1;
    Index n_a = 1;
    Index n_b = 1;

    CompositeSpace() = default;
    CompositeSpace(Index ns, Index na, Index nb) : n_s(ns), n_a(na), n_b(nb) {
        if (ns < 2 || na < 1 || nb < 1)
            throw RangeError("CompositeSpace: require n_s >= 2, n_a >= 1, n_b >= 1");
    }

    Index n_env() const { return n_a * n_b; }
    Index n_tot() const { return n_s * n_env(); }

    Index flat_index(Index s, Index a, Index b) const {
        if (s < 0 || s >= n_s || a < 0 || a >= n_a || b < 0 || b >= n_b)
            throw RangeError("flat_index: component index out of range");
        return (s * n_a + a) * n_b + b;
    }

    struct Triple {
        Index s, a, b;
    };

    Triple unflatten(Index flat) const {
        if (flat < 0 || flat >= n_tot())
            throw RangeError("unflatten: flat index out of range");
        const Index b = flat % n_b;
        const Index sa = flat / n_b;
        return Triple{sa / n_a, sa % n_a, b};
    }

    // environment-local flat index (a * n_b + b)
    Index env_index(Index a, Index b) const {
        if (a < 0 || a >= n_a || b < 0 || b >= n_b)
            throw RangeError("env_index: component index out of range");
        return a * n_b + b;
    }
};

enum class Factor { S, A, B, SA, AB };

Index factor_dim(const CompositeSpace& space, Factor f);

// op (x) identity on the complementary factors, consistent with flat ordering.
Operator embed(const CompositeSpace& space, const Operator& op, Factor f);

// (rho^S)_{ss'} = sum_{a,b} <s,a,b| rho |s',a,b>
Operator partial_trace_env(const CompositeSpace& space, const Operator& rho_total);

Operator kron(const Operator& a, const Operator& b);

}  // namespace rsh
