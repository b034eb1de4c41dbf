#include "rsh/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "rsh/errors.hpp"

namespace rsh {

namespace {

// View environment eigenvector i as an (n_b x n_a) matrix M with
// M(b, a) = v[a*n_b + b]; the reduced A-state is then (M^dag M)^T.
Eigen::Map<const Operator> env_state_mat(const Spectrum& env_spec, Index i, Index n_b) {
    const Index n_a = env_spec.dim() / n_b;
    return {env_spec.vectors.col(i).data(), n_b, n_a};
}

Operator a_density(const Spectrum& env_spec, Index i, Index n_b) {
    const auto m = env_state_mat(env_spec, i, n_b);
    return (m.adjoint() * m).transpose();
}

// Max overlap element off the column-wise best-match positions: how far the
// new eigenbasis is from a relabeling of the old one.
double basis_residual(const Operator& old_vectors, const Operator& new_vectors) {
    const Operator overlap = old_vectors.adjoint() * new_vectors;
    double residual = 0.0;
    for (Index j = 0; j < overlap.cols(); ++j) {
        Index p = 0;
        double best = -1.0;
        for (Index ii = 0; ii < overlap.rows(); ++ii) {
            const double a = std::abs(overlap(ii, j));
            if (a > best) {
                best = a;
                p = ii;
            }
        }
        for (Index ii = 0; ii < overlap.rows(); ++ii)
            if (ii != p) residual = std::max(residual, std::abs(overlap(ii, j)));
    }
    return residual;
}

std::vector<EnvWindow> required_windows(const RealVector& sys_levels,
                                        const Spectrum& env_spec, double e_lo, double width,
                                        const char* who) {
    std::vector<double> levels(sys_levels.data(), sys_levels.data() + sys_levels.size());
    auto windows = env_windows(env_spec.values, levels, e_lo, width);
    for (std::size_t g = 0; g < windows.size(); ++g)
        if (windows[g].empty_flag)
            throw EmptyWindowError(std::string(who) + ": empty environment window for level " +
                                   std::to_string(g));
    return windows;
}

nlohmann::json operator_to_json(const Operator& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

InteractionBlocks interaction_blocks(const Operator& h_int, Index ns, Index na,
                                     const Spectrum& sys_basis) {
    if (h_int.rows() != ns * na || h_int.cols() != ns * na)
        throw ShapeError("interaction_blocks: coupling dimension != n_s * n_a");
    if (sys_basis.dim() != ns)
        throw ShapeError("interaction_blocks: basis dimension != system dimension");

    InteractionBlocks out;
    out.n_levels = ns;
    out.n_a = na;
    out.blocks.reserve(static_cast<std::size_t>(ns * ns));
    out.h_dia.resize(ns, ns);
    out.h_ab.resize(ns, ns);

    const Operator& v = sys_basis.vectors;
    for (Index a = 0; a < ns; ++a)
        for (Index b = 0; b < ns; ++b) {
            Operator block = Operator::Zero(na, na);
            for (Index s = 0; s < ns; ++s)
                for (Index sp = 0; sp < ns; ++sp) {
                    const Complex w = std::conj(v(s, a)) * v(sp, b);
                    if (w != Complex(0, 0))
                        block += w * h_int.block(s * na, sp * na, na, na);
                }
            out.h_dia(a, b) = block.trace() / static_cast<double>(na);
            out.h_ab(a, b) = block.cwiseAbs().mean();
            out.blocks.push_back(std::move(block));
        }

    out.h_max = out.h_ab.maxCoeff();
    out.h_d = out.h_dia.cwiseAbs().maxCoeff();

    out.q_alpha.resize(ns);
    for (Index a = 0; a < ns; ++a) {
        double q = 0.0;
        for (Index b = 0; b < ns; ++b) {
            if (b == a) continue;
            const double gap = sys_basis.values(a) - sys_basis.values(b);
            q += 1.0 / (gap * gap);
        }
        out.q_alpha(a) = q;
    }
    return out;
}

InteractionBlocks interaction_blocks(const HamiltonianSet& hs, const Spectrum& sys_basis) {
    return interaction_blocks(hs.h_int, hs.space.n_s, hs.space.n_a, sys_basis);
}

Operator mean_a_density(const Spectrum& env_spec, const std::vector<Index>& members,
                        Index n_b) {
    if (members.empty()) throw EmptyWindowError("mean_a_density: no member states");
    const Index n_a = env_spec.dim() / n_b;
    Operator acc = Operator::Zero(n_a, n_a);
    for (Index i : members) acc += a_density(env_spec, i, n_b);
    return acc / static_cast<double>(members.size());
}

Complex env_basis_element(const Operator& block, const Spectrum& env_spec, Index n_b, Index i,
                          Index j) {
    const auto mi = env_state_mat(env_spec, i, n_b);
    const auto mj = env_state_mat(env_spec, j, n_b);
    const Operator cross = mi.adjoint() * mj;  // tr(cross * block^T)
    return (cross.array() * block.array()).sum();
}

Complex env_average(const Operator& block, const EnvWindow& window, const Spectrum& env_spec,
                    Index n_b) {
    if (window.member_indices.empty())
        throw EmptyWindowError("env_average: empty environment window");
    return (block * mean_a_density(env_spec, window.member_indices, n_b)).trace();
}

Index gamma_rule(Index alpha, Index beta, double e_alpha, double e_beta) {
    if (e_alpha > e_beta) return beta;
    if (e_alpha < e_beta) return alpha;
    return alpha;
}

HisResult build_his(const HamiltonianSet& hs, const Spectrum& sys_basis,
                    const Spectrum& env_spec, double e_lo, double width) {
    const Index ns = sys_basis.dim();
    const Index nb = hs.space.n_b;
    const auto windows = required_windows(sys_basis.values, env_spec, e_lo, width, "build_his");

    std::vector<Operator> dens;
    dens.reserve(windows.size());
    for (const auto& w : windows) dens.push_back(mean_a_density(env_spec, w.member_indices, nb));

    const InteractionBlocks blocks = interaction_blocks(hs, sys_basis);
    Operator table(ns, ns);
    for (Index a = 0; a < ns; ++a)
        for (Index b = 0; b < ns; ++b) {
            const Index g = gamma_rule(a, b, sys_basis.values(a), sys_basis.values(b));
            table(a, b) = (blocks.block(a, b) * dens[static_cast<std::size_t>(g)]).trace();
        }

    HisResult out;
    out.asymmetry = max_abs(Operator(table - table.adjoint()));
    out.avg_table = table;
    const Operator herm = 0.5 * (table + table.adjoint());
    out.op_site = sys_basis.vectors * herm * sys_basis.vectors.adjoint();
    return out;
}

RenormalizedFrame renormalize(const HamiltonianSet& hs, const Spectrum& env_spec, double e_lo,
                              double width, double tol, int max_iter) {
    if (max_iter < 1) throw RangeError("renormalize: max_iter must be >= 1");

    Spectrum basis = diagonalize(hs.h_s);
    std::vector<double> trace;
    Operator his_prev;
    double mixing = 1.0;
    int grow_streak = 0;

    for (int it = 1; it <= max_iter; ++it) {
        const HisResult r = build_his(hs, basis, env_spec, e_lo, width);
        Operator his_eff = r.op_site;
        if (mixing < 1.0 && his_prev.size() > 0)
            his_eff = (1.0 - mixing) * his_prev + mixing * r.op_site;

        Operator h_tilde = hs.h_s + his_eff;
        Spectrum next = diagonalize(hermitize(h_tilde));
        const double res = basis_residual(basis.vectors, next.vectors);
        trace.push_back(res);

        if (res < tol) {
            RenormalizedFrame frame;
            frame.h_s_tilde = std::move(h_tilde);
            frame.h_is = std::move(his_eff);
            frame.sys_spectrum_tilde = std::move(next);
            frame.env_averages = r.avg_table;
            frame.asymmetry = r.asymmetry;
            frame.iterations = it;
            frame.residual = res;
            frame.residual_trace = std::move(trace);
            frame.e_lo = e_lo;
            frame.width = width;
            return frame;
        }

        if (trace.size() >= 2 && res > trace[trace.size() - 2]) {
            if (++grow_streak >= 2) mixing = 0.5;
        } else {
            grow_streak = 0;
        }
        his_prev = std::move(his_eff);
        basis = std::move(next);
    }
    throw ConvergenceError("renormalize: no fixed point after " + std::to_string(max_iter) +
                               " iterations",
                           trace);
}

nlohmann::json frame_to_json(const RenormalizedFrame& frame) {
    return {{"h_s_tilde", operator_to_json(frame.h_s_tilde)},
            {"h_is", operator_to_json(frame.h_is)},
            {"levels", std::vector<double>(frame.sys_spectrum_tilde.values.data(),
                                           frame.sys_spectrum_tilde.values.data() +
                                               frame.sys_spectrum_tilde.values.size())},
            {"env_averages", operator_to_json(frame.env_averages)},
            {"asymmetry", frame.asymmetry},
            {"iterations", frame.iterations},
            {"residual", frame.residual},
            {"residual_trace", frame.residual_trace},
            {"window", {{"e_lo", frame.e_lo}, {"width", frame.width}}}};
}

MeanFieldSplit mean_field_split(const RenormalizedFrame& frame, const ModelSpec& spec,
                                const Spectrum& env_spec) {
    const Index ns = frame.sys_spectrum_tilde.dim();
    const auto n_terms = spec.interaction_terms.size();
    const auto windows = required_windows(frame.sys_spectrum_tilde.values, env_spec, frame.e_lo,
                                          frame.width, "mean_field_split");

    std::vector<Operator> dens;
    dens.reserve(windows.size());
    for (const auto& w : windows)
        dens.push_back(mean_a_density(env_spec, w.member_indices, spec.dim_b()));

    MeanFieldSplit out;
    out.per_level.resize(ns, static_cast<Index>(n_terms));
    out.mean_field.resize(n_terms);
    Operator mf = Operator::Zero(spec.dim_s(), spec.dim_s());
    for (std::size_t l = 0; l < n_terms; ++l) {
        const Operator ja = interaction_env_term(spec, l);
        Complex mean(0, 0);
        for (Index g = 0; g < ns; ++g) {
            out.per_level(g, static_cast<Index>(l)) =
                (ja * dens[static_cast<std::size_t>(g)]).trace();
            mean += out.per_level(g, static_cast<Index>(l));
        }
        mean /= static_cast<double>(ns);
        out.mean_field[l] = mean;
        mf += spec.epsilon * mean * interaction_sys_term(spec, l);
    }
    out.mf_operator = hermitize(mf);
    out.delta_hs = frame.h_is - out.mf_operator;
    return out;
}

std::vector<DiagonalEntry> renormalized_diagonal_elements(const RenormalizedFrame& frame,
                                                          const HamiltonianSet& hs,
                                                          const Spectrum& env_spec) {
    const Spectrum& tilde = frame.sys_spectrum_tilde;
    const Index ns = tilde.dim();
    const Index nb = hs.space.n_b;
    const auto windows = required_windows(tilde.values, env_spec, frame.e_lo, frame.width,
                                          "renormalized_diagonal_elements");

    const InteractionBlocks blocks = interaction_blocks(hs, tilde);
    const Operator his_table = tilde.vectors.adjoint() * frame.h_is * tilde.vectors;

    // A-state of every environment eigenstate appearing in any window.
    std::unordered_map<Index, Operator> dens;
    for (const auto& w : windows)
        for (Index i : w.member_indices)
            if (!dens.count(i)) dens.emplace(i, a_density(env_spec, i, nb));

    std::vector<DiagonalEntry> out;
    for (Index a = 0; a < ns; ++a)
        for (Index b = 0; b < ns; ++b) {
            std::set<Index> the_union(windows[a].member_indices.begin(),
                                      windows[a].member_indices.end());
            the_union.insert(windows[b].member_indices.begin(),
                             windows[b].member_indices.end());
            const auto& wa = windows[a].member_indices;
            const auto& wb = windows[b].member_indices;
            for (Index i : the_union) {
                DiagonalEntry e;
                e.alpha = a;
                e.beta = b;
                e.i = i;
                e.in_alpha_window = std::binary_search(wa.begin(), wa.end(), i);
                e.in_beta_window = std::binary_search(wb.begin(), wb.end(), i);
                e.bare = (blocks.block(a, b) * dens.at(i)).trace();
                e.renorm = e.bare - his_table(a, b);
                out.push_back(e);
            }
        }
    return out;
}

}  // namespace rsh
