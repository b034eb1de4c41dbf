#include "rsh/spectra.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>

namespace rsh {

namespace {

constexpr double kHermTol = 1e-10;

void require_hermitian(const Operator& h) {
    if (h.rows() != h.cols())
        throw ShapeError("diagonalize: operator is not square");
    if (!is_hermitian(h, kHermTol))
        throw NumericError("diagonalize: operator is not Hermitian to 1e-10");
}

void check_info(int info, const char* what) {
    if (info != 0)
        throw NumericError(std::string(what) + ": LAPACK info = " + std::to_string(info));
}

// Largest-magnitude component real-positive; first index wins exact ties.
void fix_phases(Operator& v) {
    for (Index c = 0; c < v.cols(); ++c) {
        Index imax = 0;
        double amax = -1.0;
        for (Index r = 0; r < v.rows(); ++r) {
            const double a = std::abs(v(r, c));
            if (a > amax) {
                amax = a;
                imax = r;
            }
        }
        if (amax <= 0.0) continue;
        const Complex z = v(imax, c);
        v.col(c) *= std::conj(z) / std::abs(z);
        v(imax, c) = Complex(std::abs(v(imax, c)), 0.0);  // clear residual imag
    }
}

void fix_signs(RealMatrix& v) {
    for (Index c = 0; c < v.cols(); ++c) {
        Index imax = 0;
        double amax = -1.0;
        for (Index r = 0; r < v.rows(); ++r) {
            const double a = std::abs(v(r, c));
            if (a > amax) {
                amax = a;
                imax = r;
            }
        }
        if (v(imax, c) < 0.0) v.col(c) = -v.col(c);
    }
}

bool exactly_real(const Operator& h) {
    return max_imag(h) == 0.0;
}

}  // namespace

Spectrum diagonalize(const Operator& h) {
    require_hermitian(h);
    const Index n = h.rows();
    Spectrum out;
    out.values.resize(n);
    if (n == 0) {
        out.vectors.resize(0, 0);
        return out;
    }
    if (exactly_real(h)) {
        RealMatrix a = h.real();
        check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
                                  a.data(), static_cast<lapack_int>(n), out.values.data()),
                   "dsyevd");
        fix_signs(a);
        out.vectors = a.cast<Complex>();
    } else {
        Operator a = h;
        check_info(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
                                  reinterpret_cast<lapack_complex_double*>(a.data()),
                                  static_cast<lapack_int>(n), out.values.data()),
                   "zheevd");
        fix_phases(a);
        out.vectors = std::move(a);
    }
    return out;
}

RealSpectrum diagonalize_real(RealMatrix h) {
    const Index n = h.rows();
    if (n != h.cols()) throw ShapeError("diagonalize_real: operator is not square");
    RealSpectrum out;
    out.values.resize(n);
    if (n > 0) {
        check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
                                  h.data(), static_cast<lapack_int>(n), out.values.data()),
                   "dsyevd");
        fix_signs(h);
    }
    out.vectors = std::move(h);
    return out;
}

RealVector eigenvalues_only(RealMatrix h) {
    const Index n = h.rows();
    if (n != h.cols()) throw ShapeError("eigenvalues_only: operator is not square");
    RealVector w(n);
    check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', static_cast<lapack_int>(n),
                              h.data(), static_cast<lapack_int>(n), w.data()),
               "dsyevd");
    return w;
}

RealVector eigenvalues_only(const Operator& h) {
    require_hermitian(h);
    const Index n = h.rows();
    if (exactly_real(h)) return eigenvalues_only(RealMatrix(h.real()));
    Operator a = h;
    RealVector w(n);
    check_info(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', static_cast<lapack_int>(n),
                              reinterpret_cast<lapack_complex_double*>(a.data()),
                              static_cast<lapack_int>(n), w.data()),
               "zheevd");
    return w;
}

// Staged reduction: one tridiagonalization yields the full eigenvalue list
// (dsterf) and the selected eigenvector block (dstemr + back-transform).
PartialSpectrum diagonalize_selected(RealMatrix h, Index lo, Index hi) {
    const lapack_int n = static_cast<lapack_int>(h.rows());
    if (h.rows() != h.cols()) throw ShapeError("diagonalize_selected: operator is not square");
    if (lo < 0 || hi < lo || hi >= h.rows())
        throw RangeError("diagonalize_selected: index range out of bounds");
    const lapack_int m = static_cast<lapack_int>(hi - lo + 1);

    RealVector d(n), e(n > 1 ? n - 1 : 1), tau(n > 1 ? n - 1 : 1);
    check_info(LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', n, h.data(), n, d.data(), e.data(),
                              tau.data()),
               "dsytrd");

    PartialSpectrum out;
    out.first = lo;
    out.values = d;
    RealVector e_full(n);
    e_full.head(n - 1) = e.head(n - 1);
    e_full(n - 1) = 0.0;
    {
        RealVector e2 = e_full;
        check_info(LAPACKE_dsterf(n, out.values.data(), e2.data()), "dsterf");
    }

    RealVector d3 = d, e3 = e_full;
    RealVector w(n);
    RealMatrix z(n, m);
    std::vector<lapack_int> isuppz(2 * std::max<lapack_int>(1, m));
    lapack_logical tryrac = 1;
    lapack_int found = 0;
    check_info(LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', n, d3.data(), e3.data(), 0.0, 0.0,
                              static_cast<lapack_int>(lo + 1), static_cast<lapack_int>(hi + 1),
                              &found, w.data(), z.data(), n, m, isuppz.data(), &tryrac),
               "dstemr");
    if (found != m) throw NumericError("dstemr: fewer eigenvectors than requested");

    check_info(LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', n, m, h.data(), n, tau.data(),
                              z.data(), n),
               "dormtr");
    fix_signs(z);
    out.vectors = z.cast<Complex>();
    return out;
}

PartialSpectrum diagonalize_selected(const Operator& h, Index lo, Index hi) {
    require_hermitian(h);
    if (exactly_real(h)) return diagonalize_selected(RealMatrix(h.real()), lo, hi);

    const lapack_int n = static_cast<lapack_int>(h.rows());
    if (lo < 0 || hi < lo || hi >= h.rows())
        throw RangeError("diagonalize_selected: index range out of bounds");
    const lapack_int m = static_cast<lapack_int>(hi - lo + 1);

    Operator a = h;
    RealVector d(n), e(n > 1 ? n - 1 : 1);
    Vector tau(n > 1 ? n - 1 : 1);
    check_info(LAPACKE_zhetrd(LAPACK_COL_MAJOR, 'L', n,
                              reinterpret_cast<lapack_complex_double*>(a.data()), n, d.data(),
                              e.data(), reinterpret_cast<lapack_complex_double*>(tau.data())),
               "zhetrd");

    PartialSpectrum out;
    out.first = lo;
    out.values = d;
    RealVector e_full(n);
    e_full.head(n - 1) = e.head(n - 1);
    e_full(n - 1) = 0.0;
    {
        RealVector e2 = e_full;
        check_info(LAPACKE_dsterf(n, out.values.data(), e2.data()), "dsterf");
    }

    RealVector d3 = d, e3 = e_full;
    RealVector w(n);
    RealMatrix z(n, m);
    std::vector<lapack_int> isuppz(2 * std::max<lapack_int>(1, m));
    lapack_logical tryrac = 1;
    lapack_int found = 0;
    check_info(LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', n, d3.data(), e3.data(), 0.0, 0.0,
                              static_cast<lapack_int>(lo + 1), static_cast<lapack_int>(hi + 1),
                              &found, w.data(), z.data(), n, m, isuppz.data(), &tryrac),
               "dstemr");
    if (found != m) throw NumericError("dstemr: fewer eigenvectors than requested");

    Operator zc = z.cast<Complex>();
    check_info(LAPACKE_zunmtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', n, m,
                              reinterpret_cast<lapack_complex_double*>(a.data()), n,
                              reinterpret_cast<lapack_complex_double*>(tau.data()),
                              reinterpret_cast<lapack_complex_double*>(zc.data()), n),
               "zunmtr");
    fix_phases(zc);
    out.vectors = std::move(zc);
    return out;
}

EnergyWindow make_window(const RealVector& values, double e_lo, double width,
                         Index statistical_min) {
    if (width <= 0.0) throw RangeError("make_window: width must be positive");
    EnergyWindow w;
    w.e_lo = e_lo;
    w.width = width;
    const double e_hi = e_lo + width;
    for (Index k = 0; k < values.size(); ++k) {
        if (values(k) >= e_lo && values(k) <= e_hi) w.member_indices.push_back(k);
        if (values(k) > e_hi) break;  // values ascending
    }
    if (w.member_indices.empty())
        throw EmptyWindowError("make_window: no eigenvalues in [" + std::to_string(e_lo) +
                               ", " + std::to_string(e_hi) + "]");
    w.below_statistical_min = w.n_members() < statistical_min;
    return w;
}

std::vector<EnvWindow> env_windows(const RealVector& env_values,
                                   const std::vector<double>& sys_levels, double e_lo,
                                   double width) {
    if (width <= 0.0) throw RangeError("env_windows: width must be positive");
    std::vector<EnvWindow> out;
    out.reserve(sys_levels.size());
    for (double level : sys_levels) {
        EnvWindow w;
        w.level_energy = level;
        const double lo = e_lo - level;
        const double hi = lo + width;
        for (Index k = 0; k < env_values.size(); ++k) {
            if (env_values(k) >= lo && env_values(k) <= hi) w.member_indices.push_back(k);
            if (env_values(k) > hi) break;
        }
        w.empty_flag = w.member_indices.empty();
        out.push_back(std::move(w));
    }
    return out;
}

DirectSumBasis direct_sum_subspace(const std::vector<EnvWindow>& windows) {
    DirectSumBasis basis;
    for (Index alpha = 0; alpha < static_cast<Index>(windows.size()); ++alpha)
        for (Index i : windows[alpha].member_indices)
            basis.members.emplace_back(alpha, i);
    return basis;
}

Vector materialize_hd_vector(const DirectSumBasis& basis, const Spectrum& sys_spec,
                             const Spectrum& env_spec, Index k) {
    if (k < 0 || k >= basis.dim()) throw RangeError("materialize_hd_vector: column out of range");
    const auto [alpha, i] = basis.members[static_cast<std::size_t>(k)];
    const Index ns = sys_spec.dim();
    const Index ne = env_spec.dim();
    Vector out(ns * ne);
    for (Index s = 0; s < ns; ++s)
        out.segment(s * ne, ne) = sys_spec.vectors(s, alpha) * env_spec.vectors.col(i);
    return out;
}

double mean_spacing_ratio(const RealVector& values, double central_fraction) {
    const Index n = values.size();
    if (n < 8) throw RangeError("mean_spacing_ratio: spectrum too small");
    const Index lo = static_cast<Index>(std::floor(0.5 * (1.0 - central_fraction) * n));
    const Index hi = n - lo;
    double sum = 0.0;
    Index count = 0;
    for (Index k = lo + 1; k + 1 < hi; ++k) {
        const double s0 = values(k) - values(k - 1);
        const double s1 = values(k + 1) - values(k);
        const double mx = std::max(s0, s1);
        if (mx <= 0.0) continue;  // exact degeneracy
        sum += std::min(s0, s1) / mx;
        ++count;
    }
    if (count == 0) throw NumericError("mean_spacing_ratio: no usable spacings");
    return sum / static_cast<double>(count);
}

}  // namespace rsh
