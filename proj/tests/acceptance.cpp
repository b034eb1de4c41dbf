// Acceptance suite: one test case per contract criterion, each printing a
// single PASS/FAIL verdict line with the measured quantities behind it.
// Tolerances are pinned here, not read from configuration.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "rsh/config.hpp"
#include "rsh/diagnostics.hpp"
#include "rsh/ensembles.hpp"
#include "rsh/hilbert.hpp"
#include "rsh/models.hpp"
#include "rsh/pipeline.hpp"
#include "rsh/renorm.hpp"
#include "rsh/rng.hpp"
#include "rsh/spectra.hpp"

using namespace rsh;
namespace fs = std::filesystem;

namespace {

void verdict(int n, const char* what, bool ok) {
    std::printf("[criterion %d] %s: %s\n", n, what, ok ? "PASS" : "FAIL");
    std::fflush(stdout);
    CHECK(ok);
}

void note(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    std::vprintf(fmt, args);
    va_end(args);
    std::printf("\n");
    std::fflush(stdout);
}

// Base model of the headline experiments: one system spin, one A spin,
// chaotic chain, seed 1.
ModelSpec base_model(Index n_spins_b, std::uint64_t seed = 1) {
    ModelSpec m;
    apply_chaotic_preset(m);
    m.n_spins_b = n_spins_b;
    m.seed = seed;
    return m;
}

ExperimentConfig base_config(Index n_spins_b, std::uint64_t seed = 1) {
    ExperimentConfig cfg;
    cfg.model = base_model(n_spins_b, seed);
    cfg.window_fraction = 0.02;
    cfg.window_center_fraction = 0.5;
    return cfg;
}

// The weak-coupling point: epsilon = 1e-3 x environment bandwidth at the
// reference size and seed.
double weak_epsilon() {
    const ModelSpec m = base_model(10);
    const RealVector env_values = eigenvalues_only(env_matrix_real(m));
    return 1e-3 * (env_values(env_values.size() - 1) - env_values(0));
}

// Coupling scale chosen so the largest window-diagonal coupling element is
// 0.3x the minimal system gap (probed at a reference epsilon; the blocks and
// their diagonal elements scale linearly in epsilon).
double renorm_epsilon() {
    const double probe = 0.05;
    ModelSpec m = base_model(10);
    m.epsilon = probe;
    const HamiltonianSet hs = build_model(m);
    const Spectrum sys = diagonalize(hs.h_s);
    const Spectrum env = diagonalize(hs.h_env);
    const InteractionBlocks blocks = interaction_blocks(hs, sys);

    // mid-spectrum window of the total spectrum, fractional width 0.02
    const double span = spectral_span(hs);
    const RealVector tot_vals = eigenvalues_only(assemble_total_real(m));
    const double width = 0.02 * span;
    const double e_lo = tot_vals(0) + 0.5 * (span - width);
    std::vector<double> levels(sys.values.data(), sys.values.data() + sys.dim());
    const auto wins = env_windows(env.values, levels, e_lo, width);

    double kappa = 0.0;
    for (const auto& row : bare_diagonal_check(blocks, wins, env, m.dim_b()))
        kappa = std::max(kappa, row.max_abs_element);
    const double gap = sys.values(1) - sys.values(0);
    return probe * 0.3 * gap / kappa;
}

double rms(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / double(v.size()));
}

}  // namespace

TEST_CASE("criterion 1: weak coupling reproduces the bare canonical state") {
    const double eps = weak_epsilon();
    const ExperimentConfig cfg = base_config(10);
    const PointResult p = run_point(cfg, eps, 10, 1, nullptr);
    REQUIRE_FALSE(p.failed);
    note("[criterion 1] epsilon=%.6g  n_window=%lld  d_bare=%.6g  beta=%.4g", eps,
         (long long)p.n_window, p.d_bare, p.beta_bare);
    verdict(1, "trace distance to canonical(H_S) <= 0.05 at epsilon = 1e-3 x bandwidth",
            p.d_bare <= 0.05);
}

TEST_CASE("criterion 2: the renormalized frame improves every seed") {
    const double eps = renorm_epsilon();
    note("[criterion 2] calibrated epsilon=%.6g", eps);

    std::vector<double> d_bare, gain;
    bool improved_everywhere = true;
    double min_mean_field = 1e300;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const ExperimentConfig cfg = base_config(10, seed);
        const PointResult p = run_point(cfg, eps, 10, seed, nullptr);
        REQUIRE_FALSE(p.failed);
        d_bare.push_back(p.d_bare);
        gain.push_back(p.d_bare - p.d_renorm);
        improved_everywhere = improved_everywhere && (p.d_renorm <= p.d_bare);
        min_mean_field = std::min(min_mean_field, p.mean_field_abs);
        note("[criterion 2] seed=%llu  d_bare=%.6g  d_renorm=%.6g  |mean_field|=%.3g",
             (unsigned long long)seed, p.d_bare, p.d_renorm, p.mean_field_abs);
    }
    const double med_gain = median(gain);
    const double med_bare = median(d_bare);
    note("[criterion 2] median gain=%.6g  threshold=%.6g  min |mean_field|=%.3g", med_gain,
         0.3 * med_bare, min_mean_field);
    verdict(2, "mean-field coupling scale |J_A| >= 0.1", min_mean_field >= 0.1);
    verdict(2, "d_renorm <= d_bare at every seed", improved_everywhere);
    verdict(2, "median(d_bare - d_renorm) >= 0.3 x median(d_bare)",
            med_gain >= 0.3 * med_bare);
}

TEST_CASE("criterion 3: off-diagonal coupling elements decay as 1/sqrt(N_E)") {
    std::vector<double> log_ne, log_med;
    bool all_sizes_under_bound = true;
    for (Index nb = 6; nb <= 11; ++nb) {
        ModelSpec m = base_model(nb);
        m.epsilon = 0.05;
        const RealSpectrum envr = diagonalize_real(env_matrix_real(m));
        const Spectrum env{envr.values, envr.vectors.cast<Complex>()};
        const Spectrum sys = diagonalize(system_matrix(m));
        const InteractionBlocks blocks =
            interaction_blocks(interaction_matrix(m), m.dim_s(), m.dim_a(), sys);
        const HierarchyStats st =
            element_hierarchy(blocks, env, m.dim_b(), 400, split_seed(m.seed, 2), 3.0);
        note("[criterion 3] n_spins_b=%lld  median_offdiag=%.6g  frac_under_bound=%.3f",
             (long long)nb, st.median_offdiag, st.frac_under_bound);
        log_ne.push_back(std::log(double(m.dim_env())));
        log_med.push_back(std::log(st.median_offdiag));
        all_sizes_under_bound = all_sizes_under_bound && (st.frac_under_bound >= 0.95);
    }
    const LinearFit fit = linear_fit(log_ne, log_med);
    note("[criterion 3] log-log slope=%.4f  r2=%.5f", fit.slope, fit.r2);
    verdict(3, "slope of median |offdiag| vs N_E within -0.5 +/- 0.1",
            fit.slope >= -0.6 && fit.slope <= -0.4);
    verdict(3, ">= 95% of samples under 3 x h N_A^1.5 / sqrt(N_E) at every size",
            all_sizes_under_bound);
}

TEST_CASE("criterion 4: environment eigenstates spread evenly over the A factor") {
    const ModelSpec m = base_model(10);
    const RealSpectrum envr = diagonalize_real(env_matrix_real(m));
    const Spectrum env{envr.values, envr.vectors.cast<Complex>()};
    const GStats g = g_statistics(env, m.dim_a(), m.dim_b(), 400, split_seed(m.seed, 3));
    const double na = double(m.dim_a());
    const double ref_off = 1.0 / std::sqrt(double(m.dim_env()) * na);
    note("[criterion 4] mean_g_diag=%.6g (target 1/N_A=%.4g)  mean_offdiag=%.6g (ref %.4g)  "
         "completeness=%.3g",
         g.mean_g_diag, 1.0 / na, g.mean_g_offdiag, ref_off, g.max_completeness_defect);
    verdict(4, "mean G^ii_mm within 20% of 1/N_A",
            std::abs(g.mean_g_diag - 1.0 / na) <= 0.2 / na);
    verdict(4, "mean |G^ij_mm'| within factor 2 of (N_E N_A)^-1/2",
            g.mean_g_offdiag >= 0.5 * ref_off && g.mean_g_offdiag <= 2.0 * ref_off);
    verdict(4, "completeness identity exact to 1e-12 on every sampled triple",
            g.max_completeness_defect <= 1e-12);
}

TEST_CASE("criterion 5: random window vectors are typical") {
    ModelSpec m = base_model(10);
    m.epsilon = 0.0;
    const HamiltonianSet hs = build_model(m);
    const Spectrum sys = diagonalize(hs.h_s);
    const Spectrum env = diagonalize(hs.h_env);
    const Spectrum total = diagonalize(hs.assemble_total());

    // widen the window until it holds >= 200 states (2.5% here)
    const double width = 0.025 * total.span();
    const double e_lo = total.values(0) + 0.5 * (total.span() - width);
    const EnergyWindow w = make_window(total, e_lo, width, 200);
    REQUIRE_FALSE(w.below_statistical_min);
    note("[criterion 5] window members N=%lld", (long long)w.n_members());

    std::vector<double> levels(sys.values.data(), sys.values.data() + sys.dim());
    const auto wins = env_windows(env.values, levels, e_lo, width);
    const Operator expansion = product_expansion(hs.space, total, sys, env, w);
    const DensityMatrix mic = microcanonical_reduced(hs.space, total, w);

    Operator acc = Operator::Zero(sys.dim(), sys.dim());
    TypicalCheck first{};
    for (int k = 0; k < 100; ++k) {
        const TypicalStateReport rep =
            typical_from_expansion(expansion, sys, hs.space.n_env(), split_seed(1, 1000 + k));
        if (k == 0) first = typical_offdiag_check(rep, wins);
        acc += rep.rho.matrix;
    }
    const DensityMatrix avg{acc / 100.0, mic.basis_label};
    const double d_avg = trace_distance(avg, mic);
    note("[criterion 5] single draw: max diag dev=%.4g  max offdiag=%.4g (bound %.4g)",
         first.max_diag_rel_dev, first.max_offdiag, first.offdiag_bound);
    note("[criterion 5] 100-draw average distance to microcanonical=%.5g", d_avg);
    REQUIRE(first.applicable);
    verdict(5, "single-draw level weights within 25% of N_E(level)/N", first.diag_ok);
    verdict(5, "single-draw off-diagonals <= 5/sqrt(N)", first.offdiag_ok);
    verdict(5, "100-draw average within trace distance 0.02 of microcanonical", d_avg <= 0.02);
}

TEST_CASE("criterion 6: eigenstate energy width obeys the first-order bound") {
    ExperimentConfig cfg = base_config(10);
    cfg.model.epsilon = weak_epsilon();
    // tail tolerance: the documented default (1%)

    const std::vector<Index> sizes = {8, 10, 12};
    const auto rows = width_scan(cfg, sizes, 16);
    bool all_below = true;
    std::vector<double> medians;
    for (Index nb : sizes) {
        std::vector<double> widths;
        double bound = 0.0;
        int below = 0, total = 0;
        for (const auto& r : rows)
            if (r.n_spins_b == nb) {
                widths.push_back(r.measured_width);
                bound = r.bound;
                ++total;
                if (r.measured_width <= r.bound)
                    ++below;
                else
                    all_below = false;
            }
        medians.push_back(median(widths));
        note("[criterion 6] n_spins_b=%lld  median width=%.5g  bound=%.5g  below=%d/%d",
             (long long)nb, medians.back(), bound, below, total);
    }
    const bool decreasing = medians[0] > medians[1] && medians[1] > medians[2];
    verdict(6, "measured width <= first-order bound for every sampled eigenstate", all_below);
    verdict(6, "median width strictly decreasing in the environment size", decreasing);
}

TEST_CASE("criterion 7: renormalization suppresses the diagonal coupling") {
    const double eps = renorm_epsilon();
    ModelSpec m = base_model(10);
    m.epsilon = eps;
    const HamiltonianSet hs = build_model(m);
    const Spectrum env = diagonalize(hs.h_env);

    const double span = spectral_span(hs);
    const RealVector tot_vals = eigenvalues_only(assemble_total_real(m));
    const double width = 0.02 * span;
    const double e_lo = tot_vals(0) + 0.5 * (span - width);

    const RenormalizedFrame frame = renormalize(hs, env, e_lo, width);
    std::vector<double> bare, renorm;
    for (const auto& row : renormalized_diagonal_elements(frame, hs, env)) {
        bare.push_back(std::abs(row.bare));
        renorm.push_back(std::abs(row.renorm));
    }
    REQUIRE_FALSE(bare.empty());
    const double r_bare = rms(bare), r_renorm = rms(renorm);
    note("[criterion 7] epsilon=%.6g  rms bare=%.6g  rms renormalized=%.6g  ratio=%.4f", eps,
         r_bare, r_renorm, r_renorm / r_bare);
    verdict(7, "RMS of renormalized diagonal elements <= 0.5 x RMS of bare ones",
            r_renorm <= 0.5 * r_bare);
}

TEST_CASE("criterion 8: exact oracle equivalences") {
    bool all_ok = true;

    // partial trace vs literal index summation
    {
        CompositeSpace sp(2, 2, 4);
        Rng rng(81);
        Operator rho(sp.n_tot(), sp.n_tot());
        for (Index j = 0; j < sp.n_tot(); ++j)
            for (Index i = 0; i < sp.n_tot(); ++i)
                rho(i, j) = Complex(rng.gaussian(), rng.gaussian());
        rho = (rho * rho.adjoint()).eval();
        rho /= rho.trace();
        Operator want = Operator::Zero(2, 2);
        for (Index s = 0; s < 2; ++s)
            for (Index t = 0; t < 2; ++t)
                for (Index a = 0; a < 2; ++a)
                    for (Index b = 0; b < 4; ++b)
                        want(s, t) += rho(sp.flat_index(s, a, b), sp.flat_index(t, a, b));
        const double dev = (partial_trace_env(sp, rho) - want).cwiseAbs().maxCoeff();
        note("[criterion 8] partial trace vs index sum: %.3g", dev);
        all_ok = all_ok && dev <= 1e-12;
    }

    // canonical state vs scaling-and-squaring exponential
    {
        Rng rng(82);
        Operator h(5, 5);
        for (Index j = 0; j < 5; ++j)
            for (Index i = 0; i < 5; ++i) h(i, j) = Complex(rng.gaussian(), rng.gaussian());
        h = (0.5 * (h + h.adjoint())).eval();
        const double beta = 0.7;
        Operator x = -beta * h / 16.0;
        Operator term = Operator::Identity(5, 5), sum = term;
        for (int k = 1; k <= 20; ++k) {
            term = (term * x / double(k)).eval();
            sum += term;
        }
        for (int s = 0; s < 4; ++s) sum = (sum * sum).eval();
        const Operator want = sum / sum.trace();
        const double dev =
            (canonical_state(h, beta).matrix - want).cwiseAbs().maxCoeff();
        note("[criterion 8] canonical state vs expm oracle: %.3g", dev);
        all_ok = all_ok && dev <= 1e-10;
    }

    // trace distance vs the two-level closed form
    {
        Operator a = Operator::Zero(2, 2), b = Operator::Zero(2, 2);
        a(0, 0) = 0.85;
        a(1, 1) = 0.15;
        b(0, 0) = 0.4;
        b(1, 1) = 0.6;
        const double dev =
            std::abs(trace_distance({a, "s_site"}, {b, "s_site"}) - 0.45);
        note("[criterion 8] trace distance vs |p-q|: %.3g", dev);
        all_ok = all_ok && dev <= 1e-12;
    }

    // environment matrix elements vs the explicit embedded sandwich
    {
        ModelSpec m = base_model(4, 6);
        const HamiltonianSet hs = build_model(m);
        const Spectrum env = diagonalize(hs.h_env);
        Operator block(2, 2);
        block << 0.4, Complex(0.1, -0.3), Complex(0.1, 0.3), -0.2;
        const Operator embedded =
            kron(block, Operator(Operator::Identity(m.dim_b(), m.dim_b())));
        double dev = 0.0;
        for (Index i : {Index(0), Index(7), Index(20)})
            for (Index j : {Index(3), Index(7), Index(25)}) {
                const Complex got = env_basis_element(block, env, m.dim_b(), i, j);
                const Complex want =
                    env.vectors.col(i).dot(embedded * env.vectors.col(j));
                dev = std::max(dev, std::abs(got - want));
            }
        note("[criterion 8] coupling element identity: %.3g", dev);
        all_ok = all_ok && dev <= 1e-12;
    }

    // mean-field split reconstruction
    {
        ModelSpec m = base_model(5, 2);
        m.epsilon = 0.3;
        const HamiltonianSet hs = build_model(m);
        const Spectrum env = diagonalize(hs.h_env);
        const double width = 0.3 * env.span();
        const double e_lo = env.values(0) + 0.4 * env.span();
        const RenormalizedFrame frame = renormalize(hs, env, e_lo, width);
        const MeanFieldSplit split = mean_field_split(frame, m, env);
        const double dev = (hs.h_s + split.mf_operator + split.delta_hs - frame.h_s_tilde)
                               .cwiseAbs()
                               .maxCoeff();
        note("[criterion 8] mean-field reconstruction: %.3g", dev);
        all_ok = all_ok && dev <= 1e-12;
    }

    verdict(8, "all five oracle equivalences hold at their stated precision", all_ok);
}

TEST_CASE("criterion 9: identical seeds give byte-identical sweep tables") {
    const char* bin = std::getenv("RSHLAB_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "RSHLAB_BIN must point at the command-line binary");

    const fs::path root = fs::temp_directory_path() / "rsh_acceptance_9";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path config_path = root / "sweep.cfg";
    {
        std::ofstream f(config_path);
        f << "model.preset = chaotic\n"
             "model.n_spins_b = 6\n"
             "sweep.epsilons = 0.02, 0.05\n"
             "sweep.seeds = 1, 2\n"
             "window.fraction = 0.05\n"
             "window.statistical_min = 10\n";
    }

    const auto run = [&](const std::string& out_dir) {
        const std::string cmd = std::string("\"") + bin + "\" sweep --config \"" +
                                config_path.string() + "\" --out \"" + out_dir +
                                "\" --quiet";
        return std::system(cmd.c_str());
    };
    const auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        REQUIRE(f.good());
        return std::string(std::istreambuf_iterator<char>(f), {});
    };

    // cold run, fresh-directory run, then a warm in-place rerun
    REQUIRE(run((root / "a").string()) == 0);
    REQUIRE(run((root / "b").string()) == 0);
    const std::string csv_a = slurp(root / "a" / "sweep.csv");
    const std::string csv_b = slurp(root / "b" / "sweep.csv");
    REQUIRE(run((root / "a").string()) == 0);
    const std::string csv_a_warm = slurp(root / "a" / "sweep.csv");

    note("[criterion 9] sweep.csv bytes: %zu", csv_a.size());
    verdict(9, "rerun with identical seeds reproduces sweep.csv byte for byte",
            csv_a == csv_b && csv_a == csv_a_warm);
    fs::remove_all(root);
}
