#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rsh/models.hpp"

namespace rsh {

// Full experiment definition: model, window placement, sweep axes, runtime
// knobs.  Parsed from a flat key-value text file (decimal floats, `#`
// comments, later keys override earlier ones).  See README for the schema.
struct ExperimentConfig {
    ModelSpec model;

    // Window placement: fractional mode places a window of width
    // fraction*span centered at center_fraction through the total spectrum;
    // setting width > 0 switches to the absolute [e_lo, e_lo+width].
    double window_fraction = 0.02;
    double window_center_fraction = 0.5;
    double window_e_lo = 0.0;
    double window_width = 0.0;
    Index statistical_min = 50;

    // Sweep axes; empty lists collapse to the model's own value.
    std::vector<double> epsilon_sweep;
    std::vector<Index> size_sweep;  // n_spins_b values
    std::vector<std::uint64_t> seeds;

    // Which extra diagnostics run per point / in diagnose mode.
    std::vector<std::string> diagnostics;

    std::string out_dir = "out";
    bool use_cache = true;
    std::string cache_dir;  // defaults to <out_dir>/spectra
    Index cache_max_dim = 4096;
    int workers = 0;  // 0 = available parallelism

    double eps_p = 0.01;
    double eth_threshold = 0.05;
    double slack = 3.0;
    Index sample_count = 400;
    Index typical_seeds = 100;
    double renorm_tol = 1e-12;
    int renorm_max_iter = 60;
    Index dim_cap = kDefaultDimCap;
    bool allow_large = false;  // required acknowledgment for dim_cap above 2^14

    std::vector<double> resolved_epsilons() const {
        return epsilon_sweep.empty() ? std::vector<double>{model.epsilon} : epsilon_sweep;
    }
    std::vector<Index> resolved_sizes() const {
        return size_sweep.empty() ? std::vector<Index>{model.n_spins_b} : size_sweep;
    }
    std::vector<std::uint64_t> resolved_seeds() const {
        return seeds.empty() ? std::vector<std::uint64_t>{model.seed} : seeds;
    }
    std::filesystem::path resolved_cache_dir() const {
        return cache_dir.empty() ? std::filesystem::path(out_dir) / "spectra"
                                 : std::filesystem::path(cache_dir);
    }
    bool diagnostic_enabled(const std::string& name) const;
};

// Throws ConfigError on unknown keys, malformed numbers, or inconsistent
// settings (e.g. a raised dimension cap without the acknowledgment flag).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// One key = value assignment, same keys as the file format; used for
// flag-level overrides on top of a parsed file.  Callers must re-run
// validate_config before executing.
void apply_config_override(ExperimentConfig& cfg, const std::string& key,
                           const std::string& value);
void validate_config(const ExperimentConfig& cfg);

// Round-trips through parse_config; written next to outputs for provenance.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace rsh
