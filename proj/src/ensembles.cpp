#include "rsh/ensembles.hpp"

#include <cmath>
#include <unordered_map>

#include "rsh/errors.hpp"
#include "rsh/rng.hpp"

namespace rsh {

namespace {

constexpr const char* kSiteBasis = "s_site";

// View one total-space column as an (n_env x n_s) matrix: flat index
// (s, e) = s*n_env + e is column-major in exactly this shape.
Eigen::Map<const Operator> as_env_by_sys(const Operator& vectors, Index col, Index n_env,
                                         Index n_s) {
    return {vectors.col(col).data(), n_env, n_s};
}

double participation_ratio(const Eigen::Ref<const Vector>& column) {
    double p1 = 0.0, p2 = 0.0;
    for (Index r = 0; r < column.size(); ++r) {
        const double p = std::norm(column(r));
        p1 += p;
        p2 += p * p;
    }
    return p2 > 0.0 ? p1 * p1 / p2 : 0.0;
}

// Thermal weights with the extremal level subtracted, so every exponent is
// non-positive for either sign of beta.
RealVector thermal_weights(const RealVector& levels, double beta) {
    const double shift = beta >= 0.0 ? levels(0) : levels(levels.size() - 1);
    return (-beta * (levels.array() - shift)).exp();
}

double mean_energy(const RealVector& levels, double beta) {
    const RealVector w = thermal_weights(levels, beta);
    return (levels.array() * w.array()).sum() / w.sum();
}

}  // namespace

void check_density(const DensityMatrix& dm) {
    const Operator& m = dm.matrix;
    if (m.rows() != m.cols()) throw ShapeError("density matrix is not square");
    if (hermiticity_defect(m) > 1e-10)
        throw NumericError("density matrix is not Hermitian to 1e-10");
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > 1e-10)
        throw NumericError("density matrix trace deviates from 1 by " +
                           std::to_string(tr - 1.0));
    const RealVector evs = eigenvalues_only(m);
    if (evs(0) < -1e-10)
        throw NumericError("density matrix has eigenvalue " + std::to_string(evs(0)));
}

nlohmann::json density_to_json(const DensityMatrix& dm) {
    nlohmann::json entries = nlohmann::json::array();
    for (Index r = 0; r < dm.matrix.rows(); ++r)
        for (Index c = 0; c < dm.matrix.cols(); ++c)
            entries.push_back({dm.matrix(r, c).real(), dm.matrix(r, c).imag()});
    return {{"dim", dm.matrix.rows()}, {"basis", dm.basis_label}, {"entries", entries}};
}

DensityMatrix microcanonical_reduced(const CompositeSpace& space, const Spectrum& total_spec,
                                     const EnergyWindow& window) {
    if (window.member_indices.empty())
        throw EmptyWindowError("microcanonical_reduced: empty window");
    const Index ns = space.n_s;
    const Index ne = space.n_env();
    Operator rho = Operator::Zero(ns, ns);
    for (Index eta : window.member_indices) {
        const auto m = as_env_by_sys(total_spec.vectors, eta, ne, ns);
        rho += m.transpose() * m.conjugate();
    }
    rho /= static_cast<double>(window.n_members());
    DensityMatrix out{std::move(rho), kSiteBasis};
    check_density(out);
    return out;
}

Operator product_expansion(const CompositeSpace& space, const Spectrum& total_spec,
                           const Spectrum& sys_spec, const Spectrum& env_spec,
                           const EnergyWindow& window) {
    if (window.member_indices.empty())
        throw EmptyWindowError("product_expansion: empty window");
    const Index ns = space.n_s;
    const Index ne = space.n_env();
    Operator expansion(ns * ne, window.n_members());
    for (Index k = 0; k < window.n_members(); ++k) {
        const auto m = as_env_by_sys(total_spec.vectors, window.member_indices[k], ne, ns);
        // f_{alpha i} = (S^dag V E^*)_{alpha i} with V_{s e} = m(e, s)
        const Operator f = (sys_spec.vectors.adjoint() * m.transpose()) * env_spec.vectors.conjugate();
        Eigen::Map<Operator>(expansion.col(k).data(), ne, ns) = f.transpose();
    }
    return expansion;
}

TypicalStateReport typical_from_expansion(Operator expansion, const Spectrum& sys_spec,
                                          Index n_env, std::uint64_t seed) {
    const Index n = expansion.cols();
    const Index ns = sys_spec.dim();
    if (expansion.rows() != ns * n_env)
        throw ShapeError("typical_from_expansion: expansion rows != n_s * n_env");

    TypicalStateReport rep;
    Rng rng(seed);
    rep.coefficients.resize(n);
    for (Index k = 0; k < n; ++k) rep.coefficients(k) = rng.gaussian();
    const double norm = rep.coefficients.norm();

    const Vector k_flat = expansion * (rep.coefficients / norm).cast<Complex>();
    rep.k_amps = Eigen::Map<const Operator>(k_flat.data(), n_env, ns).transpose();

    rep.omega_norms.resize(ns);
    for (Index a = 0; a < ns; ++a) rep.omega_norms(a) = rep.k_amps.row(a).squaredNorm();

    double pr_sum = 0.0;
    for (Index k = 0; k < n; ++k) pr_sum += participation_ratio(expansion.col(k));
    rep.n_major = pr_sum / static_cast<double>(n);

    const Operator rho_eigen = rep.k_amps * rep.k_amps.adjoint();
    rep.rho = DensityMatrix{sys_spec.vectors * rho_eigen * sys_spec.vectors.adjoint(),
                            kSiteBasis};
    rep.expansion = std::move(expansion);
    check_density(rep.rho);
    return rep;
}

TypicalStateReport typical_vector_reduced(const CompositeSpace& space,
                                          const Spectrum& total_spec, const Spectrum& sys_spec,
                                          const Spectrum& env_spec, const EnergyWindow& window,
                                          std::uint64_t seed) {
    return typical_from_expansion(
        product_expansion(space, total_spec, sys_spec, env_spec, window), sys_spec,
        space.n_env(), seed);
}

DensityMatrix typical_vector_direct_sum(const Spectrum& sys_spec,
                                        const std::vector<EnvWindow>& windows,
                                        std::uint64_t seed) {
    const Index ns = sys_spec.dim();
    if (static_cast<Index>(windows.size()) != ns)
        throw ShapeError("typical_vector_direct_sum: one window per system level required");

    std::vector<std::unordered_map<Index, double>> amps(windows.size());
    Rng rng(seed);
    double norm2 = 0.0;
    for (std::size_t a = 0; a < windows.size(); ++a)
        for (Index i : windows[a].member_indices) {
            const double g = rng.gaussian();
            amps[a].emplace(i, g);
            norm2 += g * g;
        }
    if (norm2 == 0.0)
        throw EmptyWindowError("typical_vector_direct_sum: all windows empty");

    Operator rho_eigen = Operator::Zero(ns, ns);
    for (Index a = 0; a < ns; ++a)
        for (Index b = 0; b < ns; ++b) {
            const auto& small = amps[a].size() <= amps[b].size() ? amps[a] : amps[b];
            const auto& large = amps[a].size() <= amps[b].size() ? amps[b] : amps[a];
            double sum = 0.0;
            for (const auto& [i, amp] : small) {
                const auto it = large.find(i);
                if (it != large.end()) sum += amp * it->second;
            }
            rho_eigen(a, b) = sum / norm2;
        }

    DensityMatrix out{sys_spec.vectors * rho_eigen * sys_spec.vectors.adjoint(), kSiteBasis};
    check_density(out);
    return out;
}

DensityMatrix canonical_state(const Operator& h_eff, double beta) {
    const Spectrum spec = diagonalize(h_eff);
    const RealVector w = thermal_weights(spec.values, beta);
    const RealVector p = w / w.sum();
    DensityMatrix out{spec.vectors * p.cast<Complex>().asDiagonal() * spec.vectors.adjoint(),
                      kSiteBasis};
    check_density(out);
    return out;
}

double fit_beta(const DensityMatrix& rho, const Operator& h_eff) {
    if (rho.matrix.rows() != h_eff.rows())
        throw ShapeError("fit_beta: state and Hamiltonian dimensions differ");
    const RealVector levels = eigenvalues_only(h_eff);
    const double e_min = levels(0);
    const double e_max = levels(levels.size() - 1);
    const double span = e_max - e_min;
    const double target = (rho.matrix * h_eff).trace().real();
    if (!(target > e_min) || !(target < e_max))
        throw UnfittableError("fit_beta: target energy " + std::to_string(target) +
                              " outside spectral interval (" + std::to_string(e_min) + ", " +
                              std::to_string(e_max) + ")");

    // mean_energy is strictly decreasing in beta; expand until it brackets.
    double lo = -1.0, hi = 1.0;
    for (int k = 0; k < 200 && mean_energy(levels, lo) <= target; ++k) lo *= 2.0;
    for (int k = 0; k < 200 && mean_energy(levels, hi) >= target; ++k) hi *= 2.0;

    double mid = 0.0;
    for (int k = 0; k < 400; ++k) {
        mid = 0.5 * (lo + hi);
        const double e_mid = mean_energy(levels, mid);
        if (std::abs(e_mid - target) <= 1e-10 * span) break;
        (e_mid > target ? lo : hi) = mid;
    }
    if (std::abs(mean_energy(levels, mid) - target) > 1e-10 * span)
        throw ConvergenceError("fit_beta: bisection stalled",
                               {std::abs(mean_energy(levels, mid) - target)});
    return mid;
}

double beta_min_distance(const DensityMatrix& rho, const Operator& h_eff, double beta_hint) {
    const auto distance_at = [&](double beta) {
        return trace_distance(rho, canonical_state(h_eff, beta));
    };
    const double half_range = 5.0 * (1.0 + std::abs(beta_hint));
    const int n_scan = 80;
    double best_beta = beta_hint, best_d = distance_at(beta_hint);
    for (int k = 0; k <= n_scan; ++k) {
        const double beta =
            beta_hint - half_range + 2.0 * half_range * k / static_cast<double>(n_scan);
        const double d = distance_at(beta);
        if (d < best_d) {
            best_d = d;
            best_beta = beta;
        }
    }
    const double step = 2.0 * half_range / n_scan;
    double a = best_beta - step, b = best_beta + step;
    constexpr double kGolden = 0.3819660112501051;
    double x1 = a + kGolden * (b - a), x2 = b - kGolden * (b - a);
    double f1 = distance_at(x1), f2 = distance_at(x2);
    for (int k = 0; k < 120; ++k) {
        if (f1 < f2) {
            b = x2, x2 = x1, f2 = f1;
            x1 = a + kGolden * (b - a);
            f1 = distance_at(x1);
        } else {
            a = x1, x1 = x2, f1 = f2;
            x2 = b - kGolden * (b - a);
            f2 = distance_at(x2);
        }
    }
    return 0.5 * (a + b);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.matrix.rows() != b.matrix.rows())
        throw ShapeError("trace_distance: dimension mismatch");
    const RealVector evs = eigenvalues_only(Operator(a.matrix - b.matrix));
    return 0.5 * evs.cwiseAbs().sum();
}

}  // namespace rsh
