#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "rsh/config.hpp"
#include "rsh/spectrum_cache.hpp"
#include "rsh/types.hpp"

namespace rsh {

inline constexpr double kUnmeasured = std::numeric_limits<double>::quiet_NaN();

// Everything measured at one sweep coordinate (epsilon, n_spins_b, seed).
// Measured scalars start as NaN; a failed point keeps whatever was computed
// before the error plus the message.  Field order here is csv column order.
struct PointResult {
    double epsilon = 0.0;
    Index n_spins_b = 0;
    std::uint64_t seed = 0;
    Index dim_total = 0;

    double e_lo = kUnmeasured;  // window actually used
    double width = kUnmeasured;
    Index n_window = 0;         // member count
    double span_total = kUnmeasured;
    double env_spacing_ratio = kUnmeasured;
    double env_bandwidth = kUnmeasured;

    double beta_bare = kUnmeasured, d_bare = kUnmeasured;
    double beta_renorm = kUnmeasured, d_renorm = kUnmeasured;
    double beta_meanfield = kUnmeasured, d_meanfield = kUnmeasured;
    // distance-minimizing beta, reported alongside the contract fit only
    double beta_renorm_star = kUnmeasured, d_renorm_star = kUnmeasured;

    int renorm_iterations = 0;
    double renorm_residual = kUnmeasured;
    double renorm_asymmetry = kUnmeasured;
    double mean_field_abs = kUnmeasured;  // max_l |mean_field_l|
    double h_max = kUnmeasured, h_d = kUnmeasured;
    double rms_bare_diag = kUnmeasured, rms_renorm_diag = kUnmeasured;

    // hierarchy diagnostic columns (NaN unless enabled)
    double median_offdiag = kUnmeasured;
    double frac_under_bound = kUnmeasured;
    double hierarchy_bound = kUnmeasured;

    bool failed = false;
    bool config_failure = false;  // distinguishes the exit-code class
    std::string error;
};

// The headline single-point pipeline: build -> diagonalize (cache-aware) ->
// microcanonical rho^S -> renormalize -> mean-field split -> three canonical
// fits and distances.  Exceptions are recorded in the result, not thrown;
// `detail` (optional) receives the nested report sections (frame, densities).
PointResult run_point(const ExperimentConfig& cfg, double epsilon, Index n_spins_b,
                      std::uint64_t seed, const SpectrumCache* cache,
                      nlohmann::json* detail = nullptr);

// Single point (first entry of each sweep axis); writes <out_dir>/report.json
// including partial results, then rethrows the point's failure if any.
nlohmann::json run_comparison(const ExperimentConfig& cfg);

struct SweepSummary {
    std::vector<PointResult> points;   // Cartesian order: epsilon x size x seed
    nlohmann::json fits;               // log-log scaling fits across sizes
    std::size_t n_failed = 0;
    std::filesystem::path csv_path;
};

// Cartesian sweep through a worker pool; per-point failures are recorded and
// the sweep continues.  Emits <out_dir>/sweep.csv (one row per point, fixed
// column set, %.17g floats) and <out_dir>/report.json.
SweepSummary run_sweep(const ExperimentConfig& cfg);

// Deep-dive diagnostics at the base point: per-diagnostic CSV files plus a
// summary report.json.  An empty diagnostics list here means "all".
nlohmann::json run_diagnose(const ExperimentConfig& cfg);

// One row of the width study: eigenstate spread vs the perturbative bound,
// resolved by environment size (exercises the memory-lean real solver path).
struct WidthScanRow {
    Index n_spins_b = 0;
    Index eta = 0;
    double e_eta = 0.0;
    double measured_width = 0.0;
    double bound = 0.0;
    double p_tail = 0.0;
    Index q_set_size = 0;
    double delta_e = 0.0;
};

// Samples `etas_per_size` contiguous mid-spectrum eigenstates at each
// n_spins_b in `sizes` (model epsilon/seed from cfg) and measures their
// product-basis energy width against the first-order bound.
std::vector<WidthScanRow> width_scan(const ExperimentConfig& cfg,
                                     const std::vector<Index>& sizes, Index etas_per_size);

const std::vector<std::string>& sweep_csv_columns();
std::string sweep_csv(const std::vector<PointResult>& points);

}  // namespace rsh
