#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsh/ensembles.hpp"
#include "rsh/renorm.hpp"
#include "rsh/spectra.hpp"
#include "rsh/types.hpp"

namespace rsh {

// Overlap statistics of environment eigenstates across the A-factor basis.
// Samples are drawn from the central half of the environment spectrum, where
// the flatness assumptions are meant to hold.
struct GStats {
    std::vector<double> c_abs;       // |C^i_{mq}| samples
    std::vector<double> g_diag;      // G^{ii}_{mm} samples
    std::vector<double> g_offdiag;   // |G^{ij}_{mm'}| samples, i != j
    double mean_g_diag = 0.0;
    double stddev_g_diag = 0.0;
    double mean_g_offdiag = 0.0;
    double stddev_g_offdiag = 0.0;
    double max_norm_defect = 0.0;          // |sum_m G^{ii}_{mm} - 1|, worst sampled i
    double max_completeness_defect = 0.0;  // |sum_j |G^{ij}_{mm'}|^2 - G^{ii}_{mm}|, worst triple
};

GStats g_statistics(const Spectrum& env_spec, Index n_a, Index n_b, Index sample_count,
                    std::uint64_t seed);

// Magnitude statistics of coupling-block elements in the environment
// eigenbasis: diagonal elements cluster at h_dia, off-diagonal ones are
// suppressed by the environment dimension.  Blocks that are identically zero
// carry no magnitude information and are excluded.
struct HierarchyStats {
    std::vector<double> diag_dev;     // |(block)_ii - h_dia| samples
    std::vector<double> offdiag_abs;  // |(block)_ij| samples, i != j
    double median_diag_abs = 0.0;
    double median_offdiag = 0.0;
    double bound = 0.0;            // h * N_A^{3/2} / sqrt(N_E)
    double slack = 3.0;            // tolerated constant factor on the bound
    double frac_under_bound = 0.0; // fraction of off-diagonal samples <= slack*bound
    Index n_a = 0;
    Index n_e = 0;
};

HierarchyStats element_hierarchy(const InteractionBlocks& blocks, const Spectrum& env_spec,
                                 Index n_b, Index sample_count, std::uint64_t seed,
                                 double slack = 3.0);

// Per level pair: deviation of window-diagonal elements from h_dia, plus the
// N_A*h magnitude cap.  Windows follow the pair's gamma_rule level.
struct DiagonalCheckRow {
    Index alpha = 0, beta = 0;
    double mean_dev = 0.0;
    double max_dev = 0.0;
    double max_abs_element = 0.0;
    bool cap_ok = true;  // max |element| <= N_A * h
};

std::vector<DiagonalCheckRow> bare_diagonal_check(const InteractionBlocks& blocks,
                                                  const std::vector<EnvWindow>& windows,
                                                  const Spectrum& env_spec, Index n_b);

// How far one exact eigenstate spreads over the uncoupled product basis.
struct WidthReport {
    Index eta = 0;                  // eigenstate examined
    Index k0 = 0;                   // nearest product state by energy
    double eps_p = 0.0;             // tolerated tail population
    double measured_width = 0.0;    // smallest symmetric energy window trapping 1-eps_p
    double bound = 0.0;             // 4 h^2 N_A^3 N_S / (eps_p * span)
    double p_tail = 0.0;            // population outside the reported window
    double p_first_order = 0.0;     // perturbative estimate of the same tail
    Index q_set_size = 0;           // product states outside the window
    double delta_e = 0.0;           // full span of the total spectrum
    double density_estimate = 0.0;  // N_S * N_E / span
    double population_sum = 0.0;    // sum |C|^2 (unit to rounding)
};

// Shared kernel: product-state energies e0 (index alpha*n_env + i),
// amplitudes c of the eigenstate in that basis, its exact energy e_eta.
WidthReport width_from_amplitudes(const RealVector& e0, const Vector& c, double e_eta,
                                  double eps_p, double h, Index n_a, Index n_s,
                                  double delta_e);

WidthReport perturbative_width(const CompositeSpace& space, const Spectrum& sys_spec,
                               const Spectrum& env_spec, const Spectrum& total_spec,
                               const HamiltonianSet& hs, Index eta, double eps_p);

// Sliding-window flatness scan of <E^E_i| O_A (x) 1 |E^E_i> over the
// environment spectrum; windows with fewer than two members are skipped.
// Window positions are anchored at the lowest eigenvalue, so a global energy
// shift of the environment leaves every statistic unchanged.
struct EthReport {
    double e_lo = 0.0;
    double e_hi = 0.0;
    Index first = 0;      // member index range (contiguous, ascending energies)
    Index n_members = 0;
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
    bool eth_flag = false;
};

std::vector<EthReport> eth_scan(const Spectrum& env_spec, const Operator& observable_on_a,
                                Index n_b, double window_width, double stride,
                                double eth_threshold = 0.05);

// Longest run of consecutive flag-passing windows: [first, last] indices into
// the scan result, or (-1, -1) when none pass.
std::pair<Index, Index> longest_passing_run(const std::vector<EthReport>& scan);

// Structure checks on a random-vector reduced state: level weights against
// window counts and off-diagonal suppression (in the system eigenbasis).
struct TypicalCheck {
    bool applicable = true;        // single-state windows carry no statistics
    std::string note;
    double max_diag_rel_dev = 0.0; // worst relative deviation from N^(E)_a / N
    double max_offdiag = 0.0;
    double offdiag_bound = 0.0;    // coeff / sqrt(N)
    bool diag_ok = false;
    bool offdiag_ok = false;
    double n_major = 0.0;
};

TypicalCheck typical_offdiag_check(const TypicalStateReport& report,
                                   const std::vector<EnvWindow>& windows,
                                   double diag_rel_tol = 0.25, double offdiag_coeff = 5.0);

// Small shared numerics for scaling tests and sweep summaries.
double median(std::vector<double> values);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rsh
