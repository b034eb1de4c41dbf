#include "rsh/hilbert.hpp"

namespace rsh {

Index factor_dim(const CompositeSpace& space, Factor f) {
    switch (f) {
        case Factor::S: return space.n_s;
        case Factor::A: return space.n_a;
        case Factor::B: return space.n_b;
        case Factor::SA: return space.n_s * space.n_a;
        case Factor::AB: return space.n_env();
    }
    throw RangeError("factor_dim: unknown factor");
}

Operator kron(const Operator& a, const Operator& b) {
    Operator out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index j = 0; j < a.cols(); ++j)
        for (Index i = 0; i < a.rows(); ++i)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Operator embed(const CompositeSpace& space, const Operator& op, Factor f) {
    const Index d = factor_dim(space, f);
    if (op.rows() != d || op.cols() != d)
        throw ShapeError("embed: operator dimension does not match factor");
    const auto eye = [](Index n) { return Operator::Identity(n, n); };
    switch (f) {
        case Factor::S:
            return kron(op, eye(space.n_env()));
        case Factor::A:
            return kron(eye(space.n_s), kron(op, eye(space.n_b)));
        case Factor::B:
            return kron(eye(space.n_s * space.n_a), op);
        case Factor::SA:
            return kron(op, eye(space.n_b));
        case Factor::AB:
            return kron(eye(space.n_s), op);
    }
    throw RangeError("embed: unknown factor");
}

Operator partial_trace_env(const CompositeSpace& space, const Operator& rho_total) {
    const Index n = space.n_tot();
    if (rho_total.rows() != n || rho_total.cols() != n)
        throw ShapeError("partial_trace_env: operator does not match total space");
    const Index ne = space.n_env();
    Operator out = Operator::Zero(space.n_s, space.n_s);
    for (Index sp = 0; sp < space.n_s; ++sp)
        for (Index s = 0; s < space.n_s; ++s)
            out(s, sp) = rho_total.block(s * ne, sp * ne, ne, ne).trace();
    return out;
}

}  // namespace rsh
