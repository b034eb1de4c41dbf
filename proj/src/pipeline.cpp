#include "rsh/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rsh/diagnostics.hpp"
#include "rsh/ensembles.hpp"
#include "rsh/errors.hpp"
#include "rsh/hilbert.hpp"
#include "rsh/models.hpp"
#include "rsh/renorm.hpp"
#include "rsh/rng.hpp"
#include "rsh/spectra.hpp"

namespace rsh {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Diagnostic RNG streams hang off the point seed so reruns and reorderings
// cannot shift them.
constexpr std::uint64_t kHierarchyStream = 2;
constexpr std::uint64_t kGStatsStream = 3;
constexpr std::uint64_t kTypicalStreamBase = 1000;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Error text lands in a CSV cell; keep it one field and one line.
std::string sanitize_message(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
    return s;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ResourceError("cannot write " + path.string());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!os) throw ResourceError("short write to " + path.string());
}

void write_json_file(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

struct WindowPlacement {
    double e_lo = 0.0;
    double width = 0.0;
};

// Fractional placement is relative to the spectrum actually obtained; an
// absolute width in the config overrides it verbatim.
WindowPlacement place_window(const ExperimentConfig& cfg, double e_min, double span) {
    if (cfg.window_width > 0.0) return {cfg.window_e_lo, cfg.window_width};
    const double width = cfg.window_fraction * span;
    const double center = e_min + cfg.window_center_fraction * span;
    return {center - 0.5 * width, width};
}

// Shared single-point prelude: model, spectra (cache-aware), window.
struct PointContext {
    ModelSpec model;
    HamiltonianSet hs;
    Spectrum env_spec;
    Spectrum sys_spec;
    Spectrum total_spec;
    WindowPlacement placement;
    EnergyWindow window;
};

PointContext make_context(const ExperimentConfig& cfg, double epsilon, Index n_spins_b,
                          std::uint64_t seed, const SpectrumCache* cache) {
    PointContext cx;
    cx.model = cfg.model;
    cx.model.epsilon = epsilon;
    cx.model.n_spins_b = n_spins_b;
    cx.model.seed = seed;
    cx.hs = build_model(cx.model, cfg.dim_cap);

    const SpectrumCache* env_cache =
        (cache && cx.model.dim_env() <= cfg.cache_max_dim) ? cache : nullptr;
    const SpectrumCache* tot_cache =
        (cache && cx.model.dim_total() <= cfg.cache_max_dim) ? cache : nullptr;
    cx.env_spec = diagonalize_cached(cx.hs.h_env, env_cache);
    cx.sys_spec = diagonalize(cx.hs.h_s);
    {
        Operator total = cx.hs.assemble_total();
        cx.total_spec = diagonalize_cached(total, tot_cache);
    }
    cx.placement = place_window(cfg, cx.total_spec.values(0), cx.total_spec.span());
    cx.window =
        make_window(cx.total_spec, cx.placement.e_lo, cx.placement.width, cfg.statistical_min);
    return cx;
}

std::vector<EnvWindow> level_windows(const Spectrum& env_spec, const Spectrum& sys_basis,
                                     const WindowPlacement& placement) {
    const std::vector<double> levels(sys_basis.values.data(),
                                     sys_basis.values.data() + sys_basis.dim());
    return env_windows(env_spec.values, levels, placement.e_lo, placement.width);
}

json point_to_json(const PointResult& p) {
    return json{{"epsilon", p.epsilon},
                {"n_spins_b", p.n_spins_b},
                {"seed", p.seed},
                {"dim_total", p.dim_total},
                {"e_lo", p.e_lo},
                {"width", p.width},
                {"n_window", p.n_window},
                {"span_total", p.span_total},
                {"env_spacing_ratio", p.env_spacing_ratio},
                {"env_bandwidth", p.env_bandwidth},
                {"beta_bare", p.beta_bare},
                {"d_bare", p.d_bare},
                {"beta_renorm", p.beta_renorm},
                {"d_renorm", p.d_renorm},
                {"beta_meanfield", p.beta_meanfield},
                {"d_meanfield", p.d_meanfield},
                {"beta_renorm_star", p.beta_renorm_star},
                {"d_renorm_star", p.d_renorm_star},
                {"renorm_iterations", p.renorm_iterations},
                {"renorm_residual", p.renorm_residual},
                {"renorm_asymmetry", p.renorm_asymmetry},
                {"mean_field_abs", p.mean_field_abs},
                {"h_max", p.h_max},
                {"h_d", p.h_d},
                {"rms_bare_diag", p.rms_bare_diag},
                {"rms_renorm_diag", p.rms_renorm_diag},
                {"median_offdiag", p.median_offdiag},
                {"frac_under_bound", p.frac_under_bound},
                {"hierarchy_bound", p.hierarchy_bound},
                {"failed", p.failed},
                {"error", p.error}};
}

struct Column {
    const char* name;
    std::string (*get)(const PointResult&);
};

const std::vector<Column>& column_table() {
    static const std::vector<Column> cols = {
        {"epsilon", [](const PointResult& p) { return fmt(p.epsilon); }},
        {"n_spins_b", [](const PointResult& p) { return std::to_string(p.n_spins_b); }},
        {"seed", [](const PointResult& p) { return std::to_string(p.seed); }},
        {"dim_total", [](const PointResult& p) { return std::to_string(p.dim_total); }},
        {"e_lo", [](const PointResult& p) { return fmt(p.e_lo); }},
        {"width", [](const PointResult& p) { return fmt(p.width); }},
        {"n_window", [](const PointResult& p) { return std::to_string(p.n_window); }},
        {"span_total", [](const PointResult& p) { return fmt(p.span_total); }},
        {"env_spacing_ratio", [](const PointResult& p) { return fmt(p.env_spacing_ratio); }},
        {"env_bandwidth", [](const PointResult& p) { return fmt(p.env_bandwidth); }},
        {"beta_bare", [](const PointResult& p) { return fmt(p.beta_bare); }},
        {"d_bare", [](const PointResult& p) { return fmt(p.d_bare); }},
        {"beta_renorm", [](const PointResult& p) { return fmt(p.beta_renorm); }},
        {"d_renorm", [](const PointResult& p) { return fmt(p.d_renorm); }},
        {"beta_meanfield", [](const PointResult& p) { return fmt(p.beta_meanfield); }},
        {"d_meanfield", [](const PointResult& p) { return fmt(p.d_meanfield); }},
        {"beta_renorm_star", [](const PointResult& p) { return fmt(p.beta_renorm_star); }},
        {"d_renorm_star", [](const PointResult& p) { return fmt(p.d_renorm_star); }},
        {"renorm_iterations",
         [](const PointResult& p) { return std::to_string(p.renorm_iterations); }},
        {"renorm_residual", [](const PointResult& p) { return fmt(p.renorm_residual); }},
        {"renorm_asymmetry", [](const PointResult& p) { return fmt(p.renorm_asymmetry); }},
        {"mean_field_abs", [](const PointResult& p) { return fmt(p.mean_field_abs); }},
        {"h_max", [](const PointResult& p) { return fmt(p.h_max); }},
        {"h_d", [](const PointResult& p) { return fmt(p.h_d); }},
        {"rms_bare_diag", [](const PointResult& p) { return fmt(p.rms_bare_diag); }},
        {"rms_renorm_diag", [](const PointResult& p) { return fmt(p.rms_renorm_diag); }},
        {"median_offdiag", [](const PointResult& p) { return fmt(p.median_offdiag); }},
        {"frac_under_bound", [](const PointResult& p) { return fmt(p.frac_under_bound); }},
        {"hierarchy_bound", [](const PointResult& p) { return fmt(p.hierarchy_bound); }},
        {"error", [](const PointResult& p) { return sanitize_message(p.error); }},
    };
    return cols;
}

// Per-seed power-law slopes across the size axis, then seed-scatter summary.
json scaling_fits(const ExperimentConfig& cfg, const std::vector<PointResult>& points) {
    const auto epsilons = cfg.resolved_epsilons();
    const auto sizes = cfg.resolved_sizes();
    const auto seeds = cfg.resolved_seeds();
    json fits = json::array();
    if (sizes.size() < 2) return fits;

    struct Quantity {
        const char* name;
        double (*get)(const PointResult&);
    };
    static constexpr Quantity kQuantities[] = {
        {"median_offdiag", [](const PointResult& p) { return p.median_offdiag; }},
        {"d_bare", [](const PointResult& p) { return p.d_bare; }},
        {"d_renorm", [](const PointResult& p) { return p.d_renorm; }},
    };

    const auto at = [&](std::size_t ie, std::size_t is, std::size_t iq) -> const PointResult& {
        return points[(ie * sizes.size() + is) * seeds.size() + iq];
    };

    for (std::size_t ie = 0; ie < epsilons.size(); ++ie)
        for (const Quantity& q : kQuantities) {
            std::vector<double> slopes;
            std::vector<double> r2s;
            for (std::size_t iq = 0; iq < seeds.size(); ++iq) {
                std::vector<double> xs, ys;
                for (std::size_t is = 0; is < sizes.size(); ++is) {
                    const PointResult& p = at(ie, is, iq);
                    const double v = q.get(p);
                    if (p.failed || !std::isfinite(v) || v <= 0.0) continue;
                    const double n_env =
                        static_cast<double>(Index(1) << (cfg.model.n_spins_a + sizes[is]));
                    xs.push_back(std::log(n_env));
                    ys.push_back(std::log(v));
                }
                if (xs.size() < 2) continue;
                const LinearFit f = linear_fit(xs, ys);
                slopes.push_back(f.slope);
                r2s.push_back(f.r2);
            }
            if (slopes.empty()) continue;
            double mean = 0.0;
            for (double s : slopes) mean += s;
            mean /= static_cast<double>(slopes.size());
            double var = 0.0;
            for (double s : slopes) var += (s - mean) * (s - mean);
            const double sd =
                slopes.size() > 1 ? std::sqrt(var / static_cast<double>(slopes.size() - 1)) : 0.0;
            const double std_err = sd / std::sqrt(static_cast<double>(slopes.size()));
            double mean_r2 = 0.0;
            for (double r : r2s) mean_r2 += r;
            mean_r2 /= static_cast<double>(r2s.size());
            fits.push_back(json{{"epsilon", epsilons[ie]},
                                {"quantity", q.name},
                                {"x", "log n_env"},
                                {"n_seeds", slopes.size()},
                                {"slope", mean},
                                {"stderr", std_err},
                                {"ci95", 1.96 * std_err},
                                {"mean_r2", mean_r2}});
        }
    return fits;
}

}  // namespace

const std::vector<std::string>& sweep_csv_columns() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const Column& c : column_table()) out.emplace_back(c.name);
        return out;
    }();
    return names;
}

std::string sweep_csv(const std::vector<PointResult>& points) {
    const auto& cols = column_table();
    std::string out;
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (k) out += ',';
        out += cols[k].name;
    }
    out += '\n';
    for (const PointResult& p : points) {
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (k) out += ',';
            out += cols[k].get(p);
        }
        out += '\n';
    }
    return out;
}

PointResult run_point(const ExperimentConfig& cfg, double epsilon, Index n_spins_b,
                      std::uint64_t seed, const SpectrumCache* cache, json* detail) {
    PointResult r;
    r.epsilon = epsilon;
    r.n_spins_b = n_spins_b;
    r.seed = seed;
    try {
        PointContext cx = make_context(cfg, epsilon, n_spins_b, seed, cache);
        const CompositeSpace& space = cx.hs.space;
        r.dim_total = space.n_tot();
        r.span_total = cx.total_spec.span();
        r.env_spacing_ratio = mean_spacing_ratio(cx.env_spec.values);
        r.env_bandwidth = cx.env_spec.span();
        r.e_lo = cx.placement.e_lo;
        r.width = cx.placement.width;
        r.n_window = cx.window.n_members();
        if (detail)
            (*detail)["window"] = json{{"e_lo", r.e_lo},
                                       {"width", r.width},
                                       {"n_members", r.n_window},
                                       {"below_statistical_min", cx.window.below_statistical_min}};

        const InteractionBlocks blocks = interaction_blocks(cx.hs, cx.sys_spec);
        r.h_max = blocks.h_max;
        r.h_d = blocks.h_d;

        const DensityMatrix mic = microcanonical_reduced(space, cx.total_spec, cx.window);

        r.beta_bare = fit_beta(mic, cx.hs.h_s);
        const DensityMatrix can_bare = canonical_state(cx.hs.h_s, r.beta_bare);
        r.d_bare = trace_distance(mic, can_bare);

        const RenormalizedFrame frame = renormalize(cx.hs, cx.env_spec, cx.placement.e_lo,
                                                    cx.placement.width, cfg.renorm_tol,
                                                    cfg.renorm_max_iter);
        r.renorm_iterations = frame.iterations;
        r.renorm_residual = frame.residual;
        r.renorm_asymmetry = frame.asymmetry;
        r.beta_renorm = fit_beta(mic, frame.h_s_tilde);
        const DensityMatrix can_renorm = canonical_state(frame.h_s_tilde, r.beta_renorm);
        r.d_renorm = trace_distance(mic, can_renorm);
        r.beta_renorm_star = beta_min_distance(mic, frame.h_s_tilde, r.beta_renorm);
        r.d_renorm_star =
            trace_distance(mic, canonical_state(frame.h_s_tilde, r.beta_renorm_star));
        if (detail) (*detail)["frame"] = frame_to_json(frame);

        const MeanFieldSplit split = mean_field_split(frame, cx.model, cx.env_spec);
        r.mean_field_abs = 0.0;
        for (const Complex& v : split.mean_field)
            r.mean_field_abs = std::max(r.mean_field_abs, std::abs(v));
        const Operator h_mf = cx.hs.h_s + split.mf_operator;
        r.beta_meanfield = fit_beta(mic, h_mf);
        const DensityMatrix can_mf = canonical_state(h_mf, r.beta_meanfield);
        r.d_meanfield = trace_distance(mic, can_mf);
        if (detail) {
            json mf_values = json::array();
            for (const Complex& v : split.mean_field)
                mf_values.push_back(json::array({v.real(), v.imag()}));
            (*detail)["mean_field"] =
                json{{"values", mf_values}, {"magnitude", r.mean_field_abs}};
        }

        const std::vector<DiagonalEntry> entries =
            renormalized_diagonal_elements(frame, cx.hs, cx.env_spec);
        if (!entries.empty()) {
            double sb = 0.0, sr = 0.0;
            for (const DiagonalEntry& e : entries) {
                sb += std::norm(e.bare);
                sr += std::norm(e.renorm);
            }
            r.rms_bare_diag = std::sqrt(sb / static_cast<double>(entries.size()));
            r.rms_renorm_diag = std::sqrt(sr / static_cast<double>(entries.size()));
        }
        if (detail)
            (*detail)["suppression"] = json{{"n_entries", entries.size()},
                                            {"rms_bare", r.rms_bare_diag},
                                            {"rms_renorm", r.rms_renorm_diag}};

        if (cfg.diagnostic_enabled("hierarchy")) {
            const HierarchyStats stats =
                element_hierarchy(blocks, cx.env_spec, space.n_b, cfg.sample_count,
                                  split_seed(seed, kHierarchyStream), cfg.slack);
            r.median_offdiag = stats.median_offdiag;
            r.frac_under_bound = stats.frac_under_bound;
            r.hierarchy_bound = stats.bound;
        }

        if (detail)
            (*detail)["densities"] = json{{"microcanonical", density_to_json(mic)},
                                          {"canonical_bare", density_to_json(can_bare)},
                                          {"canonical_renorm", density_to_json(can_renorm)},
                                          {"canonical_meanfield", density_to_json(can_mf)}};
    } catch (const ConfigError& e) {
        r.failed = true;
        r.config_failure = true;
        r.error = "point(epsilon=" + fmt(epsilon) + ", n_spins_b=" + std::to_string(n_spins_b) +
                  ", seed=" + std::to_string(seed) + "): " + e.what();
    } catch (const std::exception& e) {
        r.failed = true;
        r.error = "point(epsilon=" + fmt(epsilon) + ", n_spins_b=" + std::to_string(n_spins_b) +
                  ", seed=" + std::to_string(seed) + "): " + e.what();
    }
    return r;
}

json run_comparison(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    std::optional<SpectrumCache> cache;
    if (cfg.use_cache) cache.emplace(cfg.resolved_cache_dir());

    json detail;
    const PointResult p =
        run_point(cfg, cfg.resolved_epsilons().front(), cfg.resolved_sizes().front(),
                  cfg.resolved_seeds().front(), cache ? &*cache : nullptr, &detail);

    json rep;
    rep["config"] = serialize_config(cfg);
    rep["point"] = point_to_json(p);
    rep["detail"] = detail;
    write_json_file(fs::path(cfg.out_dir) / "report.json", rep);

    // Partial results are on disk; now surface the failure to the caller.
    if (p.failed) {
        if (p.config_failure) throw ConfigError(p.error);
        throw NumericError(p.error);
    }
    return rep;
}

SweepSummary run_sweep(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    std::optional<SpectrumCache> cache;
    if (cfg.use_cache) cache.emplace(cfg.resolved_cache_dir());
    const SpectrumCache* cache_ptr = cache ? &*cache : nullptr;

    struct Coord {
        double epsilon;
        Index n_spins_b;
        std::uint64_t seed;
    };
    std::vector<Coord> coords;
    for (double e : cfg.resolved_epsilons())
        for (Index nb : cfg.resolved_sizes())
            for (std::uint64_t s : cfg.resolved_seeds()) coords.push_back({e, nb, s});

    SweepSummary out;
    out.points.resize(coords.size());

    unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers)
                                       : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, static_cast<unsigned>(coords.size()));

    std::atomic<std::size_t> cursor{0};
    const auto drain = [&] {
        for (std::size_t i; (i = cursor.fetch_add(1)) < coords.size();) {
            const Coord& c = coords[i];
            out.points[i] = run_point(cfg, c.epsilon, c.n_spins_b, c.seed, cache_ptr, nullptr);
        }
    };
    if (workers <= 1) {
        drain();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(drain);
        for (std::thread& t : pool) t.join();
    }

    for (const PointResult& p : out.points)
        if (p.failed) ++out.n_failed;
    out.fits = scaling_fits(cfg, out.points);
    out.csv_path = fs::path(cfg.out_dir) / "sweep.csv";
    write_text(out.csv_path, sweep_csv(out.points));

    json rep;
    rep["config"] = serialize_config(cfg);
    rep["n_points"] = coords.size();
    rep["n_failed"] = out.n_failed;
    rep["fits"] = out.fits;
    json point_list = json::array();
    for (const PointResult& p : out.points) point_list.push_back(point_to_json(p));
    rep["points"] = point_list;
    write_json_file(fs::path(cfg.out_dir) / "report.json", rep);
    return out;
}

std::vector<WidthScanRow> width_scan(const ExperimentConfig& cfg,
                                     const std::vector<Index>& sizes, Index etas_per_size) {
    if (etas_per_size < 1) throw RangeError("width_scan: need at least one eigenstate per size");
    std::vector<WidthScanRow> rows;
    for (Index nb_spins : sizes) {
        ModelSpec m = cfg.model;
        m.n_spins_b = nb_spins;
        validate(m);
        const Index ns = m.dim_s();
        const Index na = m.dim_a();
        const Index ne = m.dim_env();

        const Spectrum sys_spec = diagonalize(system_matrix(m));
        const InteractionBlocks blocks =
            interaction_blocks(interaction_matrix(m), ns, na, sys_spec);
        const RealSpectrum env = diagonalize_real(env_matrix_real(m));

        // The selected-range solver keeps only the sampled eigenvectors, so
        // the largest sizes stay within a few total-matrix footprints.
        PartialSpectrum part;
        {
            RealMatrix total = assemble_total_real(m, cfg.dim_cap);
            const Index n = total.rows();
            const Index lo = std::max<Index>(0, n / 2 - etas_per_size / 2);
            const Index hi = std::min<Index>(n - 1, lo + etas_per_size - 1);
            part = diagonalize_selected(std::move(total), lo, hi);
        }
        const double delta_e = part.values(part.values.size() - 1) - part.values(0);

        RealVector e0(ns * ne);
        for (Index a = 0; a < ns; ++a)
            e0.segment(a * ne, ne) = env.values.array() + sys_spec.values(a);

        for (Index j = 0; j < part.vectors.cols(); ++j) {
            const Index eta = part.first + j;
            // Product-basis amplitudes f = (S^dag M^T) E; E is real, so the
            // contraction splits into two real products.
            const Eigen::Map<const Operator> mcol(part.vectors.col(j).data(), ne, ns);
            const Operator g = sys_spec.vectors.adjoint() * mcol.transpose();
            Operator f(ns, ne);
            f.real() = g.real() * env.vectors;
            f.imag() = g.imag() * env.vectors;
            Vector c(ns * ne);
            for (Index a = 0; a < ns; ++a) c.segment(a * ne, ne) = f.row(a).transpose();

            const WidthReport rep = width_from_amplitudes(e0, c, part.values(eta), cfg.eps_p,
                                                          blocks.h_max, na, ns, delta_e);
            rows.push_back({nb_spins, eta, part.values(eta), rep.measured_width, rep.bound,
                            rep.p_tail, rep.q_set_size, delta_e});
        }
    }
    return rows;
}

json run_diagnose(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    std::optional<SpectrumCache> cache;
    if (cfg.use_cache) cache.emplace(cfg.resolved_cache_dir());

    const std::vector<std::string> names =
        cfg.diagnostics.empty()
            ? std::vector<std::string>{"gstats", "hierarchy", "eth", "width", "typical"}
            : cfg.diagnostics;
    const auto enabled = [&](const char* n) {
        return std::find(names.begin(), names.end(), n) != names.end();
    };

    const double epsilon = cfg.resolved_epsilons().front();
    const Index n_spins_b = cfg.resolved_sizes().front();
    const std::uint64_t seed = cfg.resolved_seeds().front();
    const fs::path out_dir(cfg.out_dir);

    PointContext cx = make_context(cfg, epsilon, n_spins_b, seed, cache ? &*cache : nullptr);
    const CompositeSpace& space = cx.hs.space;

    json rep;
    rep["config"] = serialize_config(cfg);
    rep["point"] = json{{"epsilon", epsilon},
                        {"n_spins_b", n_spins_b},
                        {"seed", seed},
                        {"dim_total", space.n_tot()}};
    rep["window"] = json{{"e_lo", cx.placement.e_lo},
                         {"width", cx.placement.width},
                         {"n_members", cx.window.n_members()}};

    const InteractionBlocks blocks = interaction_blocks(cx.hs, cx.sys_spec);
    const std::vector<EnvWindow> windows = level_windows(cx.env_spec, cx.sys_spec, cx.placement);

    if (enabled("gstats")) {
        const GStats g = g_statistics(cx.env_spec, space.n_a, space.n_b, cfg.sample_count,
                                      split_seed(seed, kGStatsStream));
        std::string csv = "kind,index,value\n";
        const auto emit = [&](const char* kind, const std::vector<double>& vals) {
            for (std::size_t k = 0; k < vals.size(); ++k)
                csv += std::string(kind) + "," + std::to_string(k) + "," + fmt(vals[k]) + "\n";
        };
        emit("c_abs", g.c_abs);
        emit("g_diag", g.g_diag);
        emit("g_offdiag", g.g_offdiag);
        write_text(out_dir / "gstats.csv", csv);
        const double n_e = static_cast<double>(space.n_env());
        rep["gstats"] = json{{"mean_g_diag", g.mean_g_diag},
                             {"stddev_g_diag", g.stddev_g_diag},
                             {"mean_g_offdiag", g.mean_g_offdiag},
                             {"stddev_g_offdiag", g.stddev_g_offdiag},
                             {"max_norm_defect", g.max_norm_defect},
                             {"max_completeness_defect", g.max_completeness_defect},
                             {"ref_diag", 1.0 / static_cast<double>(space.n_a)},
                             {"ref_offdiag",
                              1.0 / std::sqrt(n_e * static_cast<double>(space.n_a))}};
    }

    if (enabled("hierarchy")) {
        const HierarchyStats stats =
            element_hierarchy(blocks, cx.env_spec, space.n_b, cfg.sample_count,
                              split_seed(seed, kHierarchyStream), cfg.slack);
        std::string csv = "kind,index,value\n";
        for (std::size_t k = 0; k < stats.diag_dev.size(); ++k)
            csv += "diag_dev," + std::to_string(k) + "," + fmt(stats.diag_dev[k]) + "\n";
        for (std::size_t k = 0; k < stats.offdiag_abs.size(); ++k)
            csv += "offdiag_abs," + std::to_string(k) + "," + fmt(stats.offdiag_abs[k]) + "\n";
        write_text(out_dir / "hierarchy.csv", csv);

        std::string dcsv = "alpha,beta,mean_dev,max_dev,max_abs_element,cap_ok\n";
        for (const DiagonalCheckRow& row :
             bare_diagonal_check(blocks, windows, cx.env_spec, space.n_b))
            dcsv += std::to_string(row.alpha) + "," + std::to_string(row.beta) + "," +
                    fmt(row.mean_dev) + "," + fmt(row.max_dev) + "," +
                    fmt(row.max_abs_element) + "," + (row.cap_ok ? "1" : "0") + "\n";
        write_text(out_dir / "diagonal_check.csv", dcsv);

        rep["hierarchy"] = json{{"h_max", blocks.h_max},
                                {"h_d", blocks.h_d},
                                {"bound", stats.bound},
                                {"slack", stats.slack},
                                {"median_diag_abs", stats.median_diag_abs},
                                {"median_offdiag", stats.median_offdiag},
                                {"frac_under_bound", stats.frac_under_bound},
                                {"n_samples", stats.offdiag_abs.size()}};
    }

    if (enabled("eth")) {
        const Operator observable = interaction_env_term(cx.model, 0);
        const std::vector<EthReport> scan = eth_scan(cx.env_spec, observable, space.n_b,
                                                     cx.placement.width, 0.5 * cx.placement.width,
                                                     cfg.eth_threshold);
        std::string csv = "e_lo,e_hi,first,n_members,mean,stddev,eth_flag\n";
        std::size_t n_passing = 0;
        for (const EthReport& w : scan) {
            csv += fmt(w.e_lo) + "," + fmt(w.e_hi) + "," + std::to_string(w.first) + "," +
                   std::to_string(w.n_members) + "," + fmt(w.mean) + "," + fmt(w.stddev) + "," +
                   (w.eth_flag ? "1" : "0") + "\n";
            if (w.eth_flag) ++n_passing;
        }
        write_text(out_dir / "eth.csv", csv);
        const auto run = longest_passing_run(scan);
        rep["eth"] = json{{"n_windows", scan.size()},
                          {"n_passing", n_passing},
                          {"longest_run_first", run.first},
                          {"longest_run_last", run.second},
                          {"threshold", cfg.eth_threshold}};
    }

    if (enabled("width")) {
        const std::vector<WidthScanRow> rows = width_scan(cfg, cfg.resolved_sizes(), 16);
        std::string csv = "n_spins_b,eta,e_eta,measured_width,bound,p_tail,q_set_size,delta_e\n";
        for (const WidthScanRow& row : rows)
            csv += std::to_string(row.n_spins_b) + "," + std::to_string(row.eta) + "," +
                   fmt(row.e_eta) + "," + fmt(row.measured_width) + "," + fmt(row.bound) + "," +
                   fmt(row.p_tail) + "," + std::to_string(row.q_set_size) + "," +
                   fmt(row.delta_e) + "\n";
        write_text(out_dir / "width.csv", csv);

        json sizes = json::array(), medians = json::array();
        bool all_below = true;
        double prev = std::numeric_limits<double>::infinity();
        bool decreasing = true;
        for (Index nb : cfg.resolved_sizes()) {
            std::vector<double> widths;
            for (const WidthScanRow& row : rows)
                if (row.n_spins_b == nb) {
                    widths.push_back(row.measured_width);
                    if (row.measured_width > row.bound) all_below = false;
                }
            const double med = median(widths);
            sizes.push_back(nb);
            medians.push_back(med);
            if (!(med < prev)) decreasing = false;
            prev = med;
        }
        rep["width"] = json{{"eps_p", cfg.eps_p},
                            {"sizes", sizes},
                            {"median_width", medians},
                            {"monotone_decreasing", decreasing},
                            {"all_below_bound", all_below}};
    }

    if (enabled("typical")) {
        const Operator expansion =
            product_expansion(space, cx.total_spec, cx.sys_spec, cx.env_spec, cx.window);
        const DensityMatrix mic = microcanonical_reduced(space, cx.total_spec, cx.window);
        Operator acc = Operator::Zero(space.n_s, space.n_s);
        TypicalCheck first_check;
        std::string csv = "draw,seed,distance_single,n_major\n";
        for (Index k = 0; k < cfg.typical_seeds; ++k) {
            const std::uint64_t draw_seed =
                split_seed(seed, kTypicalStreamBase + static_cast<std::uint64_t>(k));
            const TypicalStateReport draw =
                typical_from_expansion(expansion, cx.sys_spec, space.n_env(), draw_seed);
            if (k == 0) first_check = typical_offdiag_check(draw, windows);
            acc += draw.rho.matrix;
            csv += std::to_string(k) + "," + std::to_string(draw_seed) + "," +
                   fmt(trace_distance(draw.rho, mic)) + "," + fmt(draw.n_major) + "\n";
        }
        write_text(out_dir / "typical.csv", csv);
        const DensityMatrix averaged{acc / static_cast<double>(cfg.typical_seeds),
                                     mic.basis_label};
        rep["typical"] = json{{"n_draws", cfg.typical_seeds},
                              {"distance_avg_vs_microcanonical", trace_distance(averaged, mic)},
                              {"first_draw", json{{"applicable", first_check.applicable},
                                                  {"note", first_check.note},
                                                  {"max_diag_rel_dev", first_check.max_diag_rel_dev},
                                                  {"max_offdiag", first_check.max_offdiag},
                                                  {"offdiag_bound", first_check.offdiag_bound},
                                                  {"diag_ok", first_check.diag_ok},
                                                  {"offdiag_ok", first_check.offdiag_ok},
                                                  {"n_major", first_check.n_major}}}};
    }

    write_json_file(out_dir / "report.json", rep);
    return rep;
}

}  // namespace rsh
