#include <cmath>
#include <vector>

#include "doctest.h"
#include "rsh/diagnostics.hpp"
#include "rsh/ensembles.hpp"
#include "rsh/models.hpp"
#include "rsh/renorm.hpp"
#include "rsh/spectra.hpp"

using namespace rsh;

namespace {

// Fixture with a nontrivial A register so blocks act on a 4-dim space.
struct Fixture {
    ModelSpec spec;
    HamiltonianSet hs;
    Spectrum sys, env;

    explicit Fixture(double epsilon, Index n_a = 1, Index n_b = 4) {
        apply_chaotic_preset(spec);
        spec.n_spins_a = n_a;
        spec.n_spins_b = n_b;
        spec.epsilon = epsilon;
        spec.seed = 2;
        hs = build_model(spec);
        sys = diagonalize(hs.h_s);
        env = diagonalize(hs.h_env);
    }

    // window covering the central fraction of the chain spectrum
    std::pair<double, double> mid_window(double fraction) const {
        const double width = fraction * env.span();
        const double lo = env.values(0) + 0.5 * (env.span() - width) + sys.values(0);
        return {lo, width};
    }
};

}  // namespace

TEST_SUITE("renorm") {

TEST_CASE("interaction blocks match the hand-computed sandwich") {
    Fixture fx(0.3, 2, 2);
    const InteractionBlocks got = interaction_blocks(fx.hs, fx.sys);
    REQUIRE(got.n_levels == 2);
    REQUIRE(got.n_a == 4);

    // oracle: project h_int onto |E^S_a><E^S_b| by explicit index sums
    const Index na = 4;
    for (Index a = 0; a < 2; ++a)
        for (Index b = 0; b < 2; ++b) {
            Operator want = Operator::Zero(na, na);
            for (Index i = 0; i < na; ++i)
                for (Index j = 0; j < na; ++j)
                    for (Index s = 0; s < 2; ++s)
                        for (Index t = 0; t < 2; ++t)
                            want(i, j) += std::conj(fx.sys.vectors(s, a)) *
                                          fx.hs.h_int(s * na + i, t * na + j) *
                                          fx.sys.vectors(t, b);
            CHECK((got.block(a, b) - want).cwiseAbs().maxCoeff() <= 1e-13);
        }

    // h_dia, h_ab, h_max, h_d follow from the blocks
    for (Index a = 0; a < 2; ++a) {
        const Complex dia = got.block(a, a).trace() / double(na);
        CHECK(std::abs(got.h_dia(a, a) - dia) <= 1e-14);
    }
    CHECK(got.h_max == doctest::Approx(got.h_ab.maxCoeff()).epsilon(1e-15));
    CHECK(got.h_d >= 0.0);
    // q_alpha = sum over partners of the inverse square gap
    const double gap = fx.sys.values(1) - fx.sys.values(0);
    CHECK(got.q_alpha(0) == doctest::Approx(1.0 / (gap * gap)).epsilon(1e-12));
}

TEST_CASE("block decomposition from the bare coupling equals the set-based one") {
    Fixture fx(0.2, 1, 3);
    const InteractionBlocks a = interaction_blocks(fx.hs, fx.sys);
    const InteractionBlocks b =
        interaction_blocks(fx.hs.h_int, fx.hs.space.n_s, fx.hs.space.n_a, fx.sys);
    REQUIRE(a.blocks.size() == b.blocks.size());
    for (std::size_t k = 0; k < a.blocks.size(); ++k)
        CHECK((a.blocks[k] - b.blocks[k]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.h_max == b.h_max);
    CHECK_THROWS_AS(interaction_blocks(fx.hs.h_int, 4, 4, fx.sys), ShapeError);
}

TEST_CASE("blocks scale linearly in the coupling strength") {
    Fixture weak(0.1), strong(0.4);
    const InteractionBlocks a = interaction_blocks(weak.hs, weak.sys);
    const InteractionBlocks b = interaction_blocks(strong.hs, strong.sys);
    for (std::size_t k = 0; k < a.blocks.size(); ++k)
        CHECK((4.0 * a.blocks[k] - b.blocks[k]).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("environment matrix elements obey the reshaping identity") {
    Fixture fx(0.25, 2, 3);
    Operator block(4, 4);
    block.setZero();
    block(0, 1) = Complex(0.3, -0.2);
    block(1, 0) = Complex(0.3, 0.2);
    block(2, 2) = 1.0;

    const Index nb = fx.hs.space.n_b;
    const Operator embedded = kron(block, Operator(Operator::Identity(nb, nb)));
    for (Index i : {Index(0), Index(5), Index(17)})
        for (Index j : {Index(0), Index(5), Index(30)}) {
            const Complex got = env_basis_element(block, fx.env, nb, i, j);
            const Complex want = fx.env.vectors.col(i).dot(embedded * fx.env.vectors.col(j));
            CHECK(std::abs(got - want) <= 1e-12);
        }
}

TEST_CASE("window averages are plain means of diagonal elements") {
    Fixture fx(0.25, 1, 3);
    Operator block(2, 2);
    block << 0.5, Complex(0.1, 0.1), Complex(0.1, -0.1), -0.25;

    EnvWindow w;
    w.level_energy = 0.0;
    w.member_indices = {2, 3, 7};
    Complex want = 0.0;
    for (Index i : w.member_indices)
        want += env_basis_element(block, fx.env, fx.hs.space.n_b, i, i);
    want /= 3.0;
    CHECK(std::abs(env_average(block, w, fx.env, fx.hs.space.n_b) - want) <= 1e-13);

    EnvWindow empty;
    empty.empty_flag = true;
    CHECK_THROWS_AS(env_average(block, empty, fx.env, fx.hs.space.n_b), EmptyWindowError);

    // mean_a_density backs the same average: tr(rho_A block) over the window
    const Operator rho_a = mean_a_density(fx.env, w.member_indices, fx.hs.space.n_b);
    CHECK(std::abs((rho_a * block).trace() - want) <= 1e-13);
    CHECK(std::abs(rho_a.trace() - 1.0) <= 1e-12);
}

TEST_CASE("gamma rule picks the lower level, diagonal maps to itself") {
    CHECK(gamma_rule(0, 0, -1.0, -1.0) == 0);
    CHECK(gamma_rule(3, 3, 2.0, 2.0) == 3);
    CHECK(gamma_rule(0, 1, -0.5, 0.5) == 0);
    CHECK(gamma_rule(1, 0, 0.5, -0.5) == 0);
    CHECK(gamma_rule(2, 5, 3.0, 1.0) == 5);
}

TEST_CASE("average table follows the gamma rule entry by entry") {
    Fixture fx(0.3, 1, 4);
    const auto [e_lo, width] = fx.mid_window(0.3);
    const HisResult his = build_his(fx.hs, fx.sys, fx.env, e_lo, width);

    const InteractionBlocks blocks = interaction_blocks(fx.hs, fx.sys);
    std::vector<double> levels(fx.sys.values.data(), fx.sys.values.data() + fx.sys.dim());
    const auto wins = env_windows(fx.env.values, levels, e_lo, width);
    for (Index a = 0; a < 2; ++a)
        for (Index b = 0; b < 2; ++b) {
            const Index g = gamma_rule(a, b, fx.sys.values(a), fx.sys.values(b));
            const Complex want =
                env_average(blocks.block(a, b), wins[g], fx.env, fx.hs.space.n_b);
            CHECK(std::abs(his.avg_table(a, b) - want) <= 1e-12);
        }
    // op_site is the Hermitized table rotated back to the site basis
    const Operator back = fx.sys.vectors.adjoint() * his.op_site * fx.sys.vectors;
    CHECK((back - hermitize(his.avg_table)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(his.asymmetry ==
          doctest::Approx(max_abs(Operator(his.avg_table - his.avg_table.adjoint())))
              .epsilon(1e-12));

    // a window beyond the spectrum names the offending level
    CHECK_THROWS_AS(build_his(fx.hs, fx.sys, fx.env, fx.env.values.maxCoeff() + 50.0, 0.1),
                    EmptyWindowError);
}

TEST_CASE("zero coupling leaves the frame exactly bare") {
    Fixture fx(0.0, 1, 4);
    const auto [e_lo, width] = fx.mid_window(0.3);
    const RenormalizedFrame frame = renormalize(fx.hs, fx.env, e_lo, width);
    CHECK(frame.h_is.cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((frame.h_s_tilde - fx.hs.h_s).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(frame.iterations <= 2);
    CHECK((frame.sys_spectrum_tilde.values - fx.sys.values).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("the correction grows linearly at small coupling") {
    // env averages are linear in epsilon as long as the basis barely moves
    std::vector<double> xs, ys;
    for (double eps : {0.01, 0.02, 0.04, 0.08}) {
        Fixture fx(eps, 1, 4);
        const auto [e_lo, width] = fx.mid_window(0.3);
        const RenormalizedFrame frame = renormalize(fx.hs, fx.env, e_lo, width);
        xs.push_back(std::log(eps));
        ys.push_back(std::log(frame.h_is.cwiseAbs().maxCoeff()));
    }
    const LinearFit fit = linear_fit(xs, ys);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(0.02));
    CHECK(fit.r2 >= 0.999);
}

TEST_CASE("the converged frame satisfies its own fixed-point equation") {
    Fixture fx(0.35, 1, 5);
    const auto [e_lo, width] = fx.mid_window(0.3);
    const RenormalizedFrame frame = renormalize(fx.hs, fx.env, e_lo, width);
    CHECK(frame.residual <= 1e-10);
    CHECK(frame.iterations >= 1);
    CHECK(std::size_t(frame.iterations) == frame.residual_trace.size());

    // rebuild the correction in the converged basis: must reproduce h_is
    const HisResult again = build_his(fx.hs, frame.sys_spectrum_tilde, fx.env, e_lo, width);
    CHECK((again.op_site - frame.h_is).cwiseAbs().maxCoeff() <= 1e-8);
    // h_s_tilde is exactly h_s + h_is
    CHECK((frame.h_s_tilde - (fx.hs.h_s + frame.h_is)).cwiseAbs().maxCoeff() <= 1e-14);
    // and its recorded spectrum is really its spectrum
    const Spectrum check = diagonalize(frame.h_s_tilde);
    CHECK((check.values - frame.sys_spectrum_tilde.values).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("mean-field split reconstructs the corrected Hamiltonian exactly") {
    Fixture fx(0.4, 1, 5);
    const auto [e_lo, width] = fx.mid_window(0.3);
    const RenormalizedFrame frame = renormalize(fx.hs, fx.env, e_lo, width);
    const MeanFieldSplit split = mean_field_split(frame, fx.spec, fx.env);
    REQUIRE(split.mean_field.size() == fx.spec.interaction_terms.size());
    const Operator rebuilt = fx.hs.h_s + split.mf_operator + split.delta_hs;
    CHECK((rebuilt - frame.h_s_tilde).cwiseAbs().maxCoeff() <= 1e-12);

    // per-level table rows live within the window averages' range
    CHECK(split.per_level.rows() == fx.sys.dim());
    CHECK(split.per_level.cols() == Index(fx.spec.interaction_terms.size()));
}

TEST_CASE("equal per-level averages collapse the remainder to zero") {
    // a window so wide every level sees the same environment average makes
    // the correction exactly mean-field: delta_hs vanishes
    Fixture fx(0.3, 1, 4);
    const double width = fx.env.span() + 10.0;  // covers everything for both levels
    const double e_lo = fx.env.values(0) + fx.sys.values(0) - 5.0;
    const RenormalizedFrame frame = renormalize(fx.hs, fx.env, e_lo, width);
    const MeanFieldSplit split = mean_field_split(frame, fx.spec, fx.env);
    CHECK(split.delta_hs.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("diagonal residual table covers every pair window with flags") {
    Fixture fx(0.3, 1, 4);
    const auto [e_lo, width] = fx.mid_window(0.3);
    const RenormalizedFrame frame = renormalize(fx.hs, fx.env, e_lo, width);
    const auto rows = renormalized_diagonal_elements(frame, fx.hs, fx.env);
    REQUIRE(!rows.empty());
    for (const auto& r : rows) {
        CHECK(r.alpha >= 0);
        CHECK(r.beta >= 0);
        CHECK((r.in_alpha_window || r.in_beta_window));
        // the correction only shifts diagonal pairs by their window average;
        // every tabulated element satisfies renorm = bare - average_gamma
        CHECK(std::isfinite(r.bare.real()));
        CHECK(std::isfinite(r.renorm.real()));
    }

    // at zero coupling both columns vanish identically
    Fixture off(0.0, 1, 4);
    const RenormalizedFrame frame0 = renormalize(off.hs, off.env, e_lo, width);
    for (const auto& r : renormalized_diagonal_elements(frame0, off.hs, off.env)) {
        CHECK(std::abs(r.bare) <= 1e-15);
        CHECK(std::abs(r.renorm) <= 1e-15);
    }
}

TEST_CASE("frame serialization records the observable quantities") {
    Fixture fx(0.2, 1, 4);
    const auto [e_lo, width] = fx.mid_window(0.3);
    const RenormalizedFrame frame = renormalize(fx.hs, fx.env, e_lo, width);
    const nlohmann::json j = frame_to_json(frame);
    CHECK(j.contains("iterations"));
    CHECK(j.contains("residual"));
    CHECK(j.contains("asymmetry"));
    CHECK(j.contains("levels"));
    CHECK(j.contains("h_is"));
    CHECK(j["window"]["e_lo"].get<double>() == frame.e_lo);
    CHECK(j["iterations"].get<int>() == frame.iterations);
}

}  // TEST_SUITE
