#include "rsh/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rsh/errors.hpp"
#include "rsh/rng.hpp"

namespace rsh {

namespace {

// View environment eigenvector i as (n_b x n_a): column a holds the B-factor
// amplitudes C^i_{aq}; cross overlaps give the G coefficients.
Eigen::Map<const Operator> env_state_mat(const Spectrum& env_spec, Index i, Index n_b) {
    const Index n_a = env_spec.dim() / n_b;
    return {env_spec.vectors.col(i).data(), n_b, n_a};
}

Index central_half_index(Rng& rng, Index n) {
    const Index quarter = n / 4;
    const Index span = std::max<Index>(1, n - 2 * quarter);
    return quarter + static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(span));
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
    if (v.empty()) return {};
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return {mean, std::sqrt(var / v.size())};
}

}  // namespace

GStats g_statistics(const Spectrum& env_spec, Index n_a, Index n_b, Index sample_count,
                    std::uint64_t seed) {
    if (env_spec.dim() != n_a * n_b)
        throw ShapeError("g_statistics: spectrum dimension != n_a * n_b");
    GStats out;
    Rng rng(seed);
    const Index n_e = env_spec.dim();

    for (Index s = 0; s < sample_count; ++s) {
        const Index i = central_half_index(rng, n_e);
        const Index j = central_half_index(rng, n_e);
        const Index m = static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(n_a));
        const Index mp = static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(n_a));
        const Index q = static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(n_b));

        const auto mi = env_state_mat(env_spec, i, n_b);
        out.c_abs.push_back(std::abs(mi(q, m)));

        const Operator gi = mi.adjoint() * mi;  // G^{ii}
        out.g_diag.push_back(gi(m, m).real());
        out.max_norm_defect =
            std::max(out.max_norm_defect, std::abs(gi.trace().real() - 1.0));

        if (j != i) {
            const auto mj = env_state_mat(env_spec, j, n_b);
            out.g_offdiag.push_back(std::abs((mi.adjoint() * mj)(m, mp)));
        }

        // Completeness over the full basis: sum_j |G^{ij}_{mm'}|^2 = G^{ii}_{mm}.
        // One triple per 16 samples keeps the scan cheap.
        if (s % 16 == 0) {
            const Vector u = mi.col(m).conjugate();
            const double acc =
                (u.transpose() * env_spec.vectors.block(mp * n_b, 0, n_b, n_e)).squaredNorm();
            out.max_completeness_defect =
                std::max(out.max_completeness_defect, std::abs(acc - gi(m, m).real()));
        }
    }

    const MeanStd d = mean_std(out.g_diag);
    out.mean_g_diag = d.mean;
    out.stddev_g_diag = d.stddev;
    const MeanStd o = mean_std(out.g_offdiag);
    out.mean_g_offdiag = o.mean;
    out.stddev_g_offdiag = o.stddev;
    return out;
}

HierarchyStats element_hierarchy(const InteractionBlocks& blocks, const Spectrum& env_spec,
                                 Index n_b, Index sample_count, std::uint64_t seed,
                                 double slack) {
    HierarchyStats out;
    out.slack = slack;
    out.n_a = blocks.n_a;
    out.n_e = env_spec.dim();
    out.bound = blocks.h_max * std::pow(static_cast<double>(blocks.n_a), 1.5) /
                std::sqrt(static_cast<double>(out.n_e));

    std::vector<std::pair<Index, Index>> live_pairs;
    for (Index a = 0; a < blocks.n_levels; ++a)
        for (Index b = 0; b < blocks.n_levels; ++b)
            if (max_abs(blocks.block(a, b)) > 0.0) live_pairs.emplace_back(a, b);
    if (live_pairs.empty()) return out;

    Rng rng(seed);
    std::vector<double> diag_abs;
    Index under = 0;
    for (Index s = 0; s < sample_count; ++s) {
        const auto [a, b] = live_pairs[static_cast<std::size_t>(
            rng.next_u64() % static_cast<std::uint64_t>(live_pairs.size()))];
        const Index i = central_half_index(rng, out.n_e);
        Index j = central_half_index(rng, out.n_e);

        const Complex dia = env_basis_element(blocks.block(a, b), env_spec, n_b, i, i);
        out.diag_dev.push_back(std::abs(dia - blocks.h_dia(a, b)));
        diag_abs.push_back(std::abs(dia));

        if (j == i) j = (i + 1 < out.n_e) ? i + 1 : i - 1;
        const double off = std::abs(env_basis_element(blocks.block(a, b), env_spec, n_b, i, j));
        out.offdiag_abs.push_back(off);
        if (off <= slack * out.bound) ++under;
    }

    out.median_diag_abs = median(diag_abs);
    out.median_offdiag = median(out.offdiag_abs);
    out.frac_under_bound =
        out.offdiag_abs.empty()
            ? 0.0
            : static_cast<double>(under) / static_cast<double>(out.offdiag_abs.size());
    return out;
}

std::vector<DiagonalCheckRow> bare_diagonal_check(const InteractionBlocks& blocks,
                                                  const std::vector<EnvWindow>& windows,
                                                  const Spectrum& env_spec, Index n_b) {
    if (static_cast<Index>(windows.size()) != blocks.n_levels)
        throw ShapeError("bare_diagonal_check: one window per level required");
    const double cap = static_cast<double>(blocks.n_a) * blocks.h_max;

    std::vector<DiagonalCheckRow> rows;
    for (Index a = 0; a < blocks.n_levels; ++a)
        for (Index b = 0; b < blocks.n_levels; ++b) {
            DiagonalCheckRow row;
            row.alpha = a;
            row.beta = b;
            const Index g = gamma_rule(a, b, windows[a].level_energy, windows[b].level_energy);
            const auto& members = windows[static_cast<std::size_t>(g)].member_indices;
            double acc = 0.0;
            for (Index i : members) {
                const Complex el = env_basis_element(blocks.block(a, b), env_spec, n_b, i, i);
                const double dev = std::abs(el - blocks.h_dia(a, b));
                acc += dev;
                row.max_dev = std::max(row.max_dev, dev);
                row.max_abs_element = std::max(row.max_abs_element, std::abs(el));
            }
            row.mean_dev = members.empty() ? 0.0 : acc / static_cast<double>(members.size());
            row.cap_ok = row.max_abs_element <= cap;
            rows.push_back(row);
        }
    return rows;
}

WidthReport width_from_amplitudes(const RealVector& e0, const Vector& c, double e_eta,
                                  double eps_p, double h, Index n_a, Index n_s,
                                  double delta_e) {
    if (!(eps_p > 0.0) || !(eps_p < 1.0))
        throw RangeError("width: eps_p must lie strictly in (0, 1)");
    if (e0.size() != c.size()) throw ShapeError("width: energy/amplitude size mismatch");

    WidthReport rep;
    rep.eps_p = eps_p;
    rep.delta_e = delta_e;
    rep.density_estimate = static_cast<double>(e0.size()) / delta_e;
    rep.bound = 4.0 * h * h * std::pow(static_cast<double>(n_a), 3) *
                static_cast<double>(n_s) / (eps_p * delta_e);

    Index k0 = 0;
    for (Index k = 1; k < e0.size(); ++k)
        if (std::abs(e0(k) - e_eta) < std::abs(e0(k0) - e_eta)) k0 = k;
    rep.k0 = k0;

    std::vector<Index> order(static_cast<std::size_t>(e0.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index lhs, Index rhs) {
        const double dl = std::abs(e0(lhs) - e0(k0));
        const double dr = std::abs(e0(rhs) - e0(k0));
        return dl != dr ? dl < dr : lhs < rhs;
    });

    double total = 0.0;
    for (Index k = 0; k < c.size(); ++k) total += std::norm(c(k));
    rep.population_sum = total;

    // Walk outward from k0 until the window traps all but eps_p of the
    // population; ties in distance enter together (the window is symmetric).
    double inside = 0.0;
    std::size_t taken = 0;
    double radius = 0.0;
    while (taken < order.size() && inside < (1.0 - eps_p) * total) {
        const double d = std::abs(e0(order[taken]) - e0(k0));
        std::size_t stop = taken;
        while (stop < order.size() && std::abs(e0(order[stop]) - e0(k0)) == d) {
            inside += std::norm(c(order[stop]));
            ++stop;
        }
        radius = d;
        taken = stop;
    }
    rep.measured_width = 2.0 * radius;
    rep.p_tail = (total - inside) / total;
    rep.q_set_size = static_cast<Index>(order.size() - taken);
    return rep;
}

WidthReport perturbative_width(const CompositeSpace& space, const Spectrum& sys_spec,
                               const Spectrum& env_spec, const Spectrum& total_spec,
                               const HamiltonianSet& hs, Index eta, double eps_p) {
    const Index ns = space.n_s;
    const Index ne = space.n_env();
    if (eta < 0 || eta >= total_spec.dim())
        throw RangeError("perturbative_width: eta out of range");

    RealVector e0(ns * ne);
    for (Index a = 0; a < ns; ++a)
        e0.segment(a * ne, ne) = env_spec.values.array() + sys_spec.values(a);

    // Amplitudes of |E_eta> in the product basis, laid out alpha-major.
    const Eigen::Map<const Operator> m(total_spec.vectors.col(eta).data(), ne, ns);
    const Operator f = (sys_spec.vectors.adjoint() * m.transpose()) * env_spec.vectors.conjugate();
    Vector c(ns * ne);
    for (Index a = 0; a < ns; ++a) c.segment(a * ne, ne) = f.row(a).transpose();

    const InteractionBlocks blocks = interaction_blocks(hs, sys_spec);
    WidthReport rep =
        width_from_amplitudes(e0, c, total_spec.values(eta), eps_p, blocks.h_max, space.n_a,
                              ns, total_spec.span());
    rep.eta = eta;

    // First-order tail estimate over the same outside set Q: couple the
    // nearest product state (a0, i0) to every product state through the
    // interaction and weigh by the energy denominator.
    const Index a0 = rep.k0 / ne;
    const Index i0 = rep.k0 % ne;
    const Index nb = space.n_b;
    RealVector coupling2(ns * ne);
    for (Index a = 0; a < ns; ++a) {
        const auto mi0 = Eigen::Map<const Operator>(env_spec.vectors.col(i0).data(), nb,
                                                    env_spec.dim() / nb);
        // w = (block (x) 1_B) |E^E_i0> reshaped: block acts on the A index.
        Operator w = mi0 * blocks.block(a, a0).transpose();
        const Vector wv = Eigen::Map<const Vector>(w.data(), w.size());
        coupling2.segment(a * ne, ne) =
            (env_spec.vectors.adjoint() * wv).cwiseAbs2();
    }
    const double e_k0 = e0(rep.k0);
    double p1 = 0.0;
    for (Index k = 0; k < e0.size(); ++k) {
        if (std::abs(e0(k) - e_k0) <= 0.5 * rep.measured_width || k == rep.k0) continue;
        const double den = e0(k) - e_k0;
        if (std::abs(den) < 1e-12) continue;
        p1 += coupling2(k) / (den * den);
    }
    rep.p_first_order = p1;
    return rep;
}

std::vector<EthReport> eth_scan(const Spectrum& env_spec, const Operator& observable_on_a,
                                Index n_b, double window_width, double stride,
                                double eth_threshold) {
    if (window_width <= 0.0 || stride <= 0.0)
        throw RangeError("eth_scan: window width and stride must be positive");
    if (!is_hermitian(observable_on_a, 1e-10))
        throw NumericError("eth_scan: observable is not Hermitian");

    const Index n_e = env_spec.dim();
    RealVector expect(n_e);
    for (Index i = 0; i < n_e; ++i) {
        const auto mi = env_state_mat(env_spec, i, n_b);
        // tr(O rho^A_i) with rho^A_i = (Mi^dag Mi)^T collapses to an
        // elementwise product against O itself.
        expect(i) = ((mi.adjoint() * mi).array() * observable_on_a.array()).sum().real();
    }

    const RealVector obs_levels = eigenvalues_only(observable_on_a);
    const double obs_span = obs_levels(obs_levels.size() - 1) - obs_levels(0);

    std::vector<EthReport> out;
    const double e_min = env_spec.values(0);
    const double e_max = env_spec.values(n_e - 1);
    for (double lo = e_min; lo <= e_max; lo += stride) {
        const auto begin = std::lower_bound(env_spec.values.data(),
                                            env_spec.values.data() + n_e, lo);
        const auto end = std::upper_bound(begin, env_spec.values.data() + n_e,
                                          lo + window_width);
        const Index first = begin - env_spec.values.data();
        const Index count = end - begin;
        if (count < 2) continue;

        EthReport rep;
        rep.e_lo = lo;
        rep.e_hi = lo + window_width;
        rep.first = first;
        rep.n_members = count;
        rep.mean = expect.segment(first, count).mean();
        rep.stddev = std::sqrt(
            (expect.segment(first, count).array() - rep.mean).square().mean());
        rep.eth_flag = obs_span > 0.0 ? rep.stddev <= eth_threshold * obs_span
                                      : rep.stddev == 0.0;
        out.push_back(rep);
    }
    return out;
}

std::pair<Index, Index> longest_passing_run(const std::vector<EthReport>& scan) {
    Index best_first = -1, best_last = -1, best_len = 0;
    Index run_first = 0, run_len = 0;
    for (Index k = 0; k < static_cast<Index>(scan.size()); ++k) {
        if (scan[static_cast<std::size_t>(k)].eth_flag) {
            if (run_len == 0) run_first = k;
            if (++run_len > best_len) {
                best_len = run_len;
                best_first = run_first;
                best_last = k;
            }
        } else {
            run_len = 0;
        }
    }
    return {best_first, best_last};
}

TypicalCheck typical_offdiag_check(const TypicalStateReport& report,
                                   const std::vector<EnvWindow>& windows,
                                   double diag_rel_tol, double offdiag_coeff) {
    TypicalCheck out;
    out.n_major = report.n_major;
    const Index n = report.coefficients.size();
    if (n < 2) {
        out.applicable = false;
        out.note = "single-state window: structure checks skipped";
        return out;
    }

    const Index ns = report.k_amps.rows();
    if (static_cast<Index>(windows.size()) != ns)
        throw ShapeError("typical_offdiag_check: one window per system level required");

    Index total_count = 0;
    for (const auto& w : windows) total_count += w.n_members();

    out.diag_ok = true;
    for (Index a = 0; a < ns; ++a) {
        const double expected = total_count > 0 ? static_cast<double>(windows[a].n_members()) /
                                                      static_cast<double>(total_count)
                                                : 0.0;
        const double actual = report.omega_norms(a);
        if (expected > 0.0) {
            const double rel = std::abs(actual - expected) / expected;
            out.max_diag_rel_dev = std::max(out.max_diag_rel_dev, rel);
            if (rel > diag_rel_tol) out.diag_ok = false;
        } else if (actual > 1e-10) {
            out.diag_ok = false;
            out.max_diag_rel_dev = std::numeric_limits<double>::infinity();
        }
    }

    const Operator rho_eigen = report.k_amps * report.k_amps.adjoint();
    for (Index a = 0; a < ns; ++a)
        for (Index b = 0; b < ns; ++b)
            if (a != b) out.max_offdiag = std::max(out.max_offdiag, std::abs(rho_eigen(a, b)));
    out.offdiag_bound = offdiag_coeff / std::sqrt(static_cast<double>(n));
    out.offdiag_ok = out.max_offdiag <= out.offdiag_bound;
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw RangeError("median: empty sample");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    std::nth_element(values.begin(), values.begin() + mid - 1, values.end());
    return 0.5 * (values[mid - 1] + hi);
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw RangeError("linear_fit: need at least two matched points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (sxx == 0.0) throw RangeError("linear_fit: degenerate abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

}  // namespace rsh
