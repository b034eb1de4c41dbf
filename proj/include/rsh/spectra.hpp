#pragma once

#include <vector>

#include "rsh/errors.hpp"
#include "rsh/types.hpp"

namespace rsh {

// Eigendecomposition of a Hermitian operator. values ascending, vectors
// orthonormal columns, column k belongs to values[k]. Phase convention:
// the largest-magnitude component of each column is real and positive
// (first such component on exact ties).
struct Spectrum {
    RealVector values;
    Operator vectors;

    Index dim() const { return values.size(); }
    double span() const { return values.size() ? values(values.size() - 1) - values(0) : 0.0; }
};

// All eigenvalues plus eigenvectors for the contiguous index block
// [first, first + vectors.cols()). Used where the full vector set does not
// fit in memory or is not needed.
struct PartialSpectrum {
    RealVector values;
    Operator vectors;
    Index first = 0;
};

Spectrum diagonalize(const Operator& h);

// Real-symmetric decomposition without the complex copy of the vectors; the
// argument is decomposed in place and returned as the eigenvector matrix.
// Same ordering and sign convention as diagonalize.
struct RealSpectrum {
    RealVector values;
    RealMatrix vectors;

    Index dim() const { return values.size(); }
    double span() const { return values.size() ? values(values.size() - 1) - values(0) : 0.0; }
};

RealSpectrum diagonalize_real(RealMatrix h);

RealVector eigenvalues_only(const Operator& h);
RealVector eigenvalues_only(RealMatrix h);  // consumed in place

PartialSpectrum diagonalize_selected(const Operator& h, Index lo, Index hi);
// Real symmetric fast path; h is consumed (reduced in place).
PartialSpectrum diagonalize_selected(RealMatrix h, Index lo, Index hi);

// Index set {eta : e_lo <= E_eta <= e_lo + width}. Closed interval, exact
// floating comparisons; boundary ties are admitted.
struct EnergyWindow {
    double e_lo = 0.0;
    double width = 0.0;
    std::vector<Index> member_indices;
    bool below_statistical_min = false;

    Index n_members() const { return static_cast<Index>(member_indices.size()); }
};

EnergyWindow make_window(const RealVector& values, double e_lo, double width,
                         Index statistical_min = 50);
inline EnergyWindow make_window(const Spectrum& spec, double e_lo, double width,
                                Index statistical_min = 50) {
    return make_window(spec.values, e_lo, width, statistical_min);
}

// Environment window attached to one system level: states |E^E_i> with
// E^E_i in [e_lo - E_alpha, e_lo - E_alpha + width].
struct EnvWindow {
    double level_energy = 0.0;
    std::vector<Index> member_indices;
    bool empty_flag = false;

    Index n_members() const { return static_cast<Index>(member_indices.size()); }
};

std::vector<EnvWindow> env_windows(const RealVector& env_values,
                                   const std::vector<double>& sys_levels,
                                   double e_lo, double width);

// Product basis of H_d = direct sum over alpha of |E^S_alpha> (x) window(alpha).
// Stored as (alpha, env index) pairs in block order; columns materialized on
// demand against the given spectra.
struct DirectSumBasis {
    std::vector<std::pair<Index, Index>> members;

    Index dim() const { return static_cast<Index>(members.size()); }
};

DirectSumBasis direct_sum_subspace(const std::vector<EnvWindow>& windows);

// Column k of the H_d basis as a vector on the total space.
Vector materialize_hd_vector(const DirectSumBasis& basis, const Spectrum& sys_spec,
                             const Spectrum& env_spec, Index k);

// Mean ratio of consecutive level spacings min(s_n, s_n+1)/max(s_n, s_n+1)
// over the central fraction of the spectrum. GOE ~ 0.5307, Poisson ~ 0.3863.
double mean_spacing_ratio(const RealVector& values, double central_fraction = 0.5);

}  // namespace rsh
