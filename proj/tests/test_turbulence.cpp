#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hoam/decomposition.hpp"
#include "hoam/turbulence.hpp"

using namespace hoam;

namespace {

std::vector<PhaseScreen> screens(double w_over_r0, int count, const GridSpec& grid = default_grid,
                                 std::uint64_t master = 17) {
    std::vector<PhaseScreen> out;
    for (int k = 0; k < count; ++k) {
        out.push_back(generate_screen({w_over_r0}, grid, stream_key(master, 0, k)));
    }
    return out;
}

}  // namespace

TEST(Fried, ClosedForm) {
    // 0.185 (lambda^2 / (cn2 z))^{3/5} evaluated in 30-digit arithmetic.
    EXPECT_NEAR(fried_parameter(795e-9, 1e-14, 1000.0), 0.0352868005560656722, 1e-15);
    EXPECT_NEAR(fried_parameter(795e-9, 1e-14, 2000.0), fried_parameter(795e-9, 1e-14, 1000.0) * std::pow(2.0, -0.6),
                1e-15);
    EXPECT_NEAR(fried_parameter(795e-9, 2e-14, 500.0), fried_parameter(795e-9, 1e-14, 1000.0), 1e-15);
    EXPECT_THROW(fried_parameter(0.0, 1e-14, 1.0), domain_error);
    EXPECT_THROW(fried_parameter(1e-6, -1.0, 1.0), domain_error);
}

TEST(Fried, PhysicalParamsConsistent) {
    const PhysicalPath path{795e-9, 1e-14, 1000.0, 0.02};
    const auto p = TurbulenceParams::from_physical(path);
    EXPECT_NEAR(p.w_over_r0, 0.02 / fried_parameter(795e-9, 1e-14, 1000.0), 1e-12);
    ASSERT_TRUE(p.physical.has_value());
}

TEST(Coherence, Examples) {
    const TurbulenceParams p{0.6};
    EXPECT_EQ(coherence(1.3, 0.0, p), 1.0);
    EXPECT_EQ(coherence(2.0, 1.0, TurbulenceParams{0.0}), 1.0);
    // r/r0 = 1/2 at half-turn: the chord equals r0, where D = 6.88 and the
    // coherence is exp(-D/2).
    EXPECT_NEAR(coherence(0.5, std::numbers::pi, TurbulenceParams{1.0}), std::exp(-3.44), 1e-15);
    EXPECT_NEAR(coherence(0.25, std::numbers::pi, TurbulenceParams{2.0}), std::exp(-3.44), 1e-15);
    EXPECT_NEAR(structure_function_theory(1.0, TurbulenceParams{1.0}), 6.88, 1e-15);
    // Chord form agrees with the separation form.
    const double r = 0.7;
    const double dt = 1.1;
    EXPECT_NEAR(coherence(r, dt, p), coherence_at_separation(2.0 * r * std::sin(0.5 * dt), p), 1e-14);
    EXPECT_THROW(coherence(-1.0, 0.1, p), domain_error);
}

TEST(Broadening, Inversion) {
    EXPECT_EQ(fried_from_broadening(1.0, 1.0), 0.0);
    EXPECT_EQ(fried_from_broadening(std::sqrt(10.0), 1.0), 1.0);
    EXPECT_NEAR(fried_from_broadening(2.0 * std::sqrt(10.0), 2.0), 1.0, 1e-15);
    EXPECT_THROW(fried_from_broadening(0.9, 1.0), domain_error);
}

TEST(Screen, DeterministicAndPistonFree) {
    const TurbulenceParams p{1.0};
    const auto a = generate_screen(p, default_grid, 42);
    const auto b = generate_screen(p, default_grid, 42);
    const auto c = generate_screen(p, default_grid, 43);
    EXPECT_EQ(a.phase, b.phase);
    EXPECT_NE(a.phase, c.phase);
    double mean = 0.0;
    for (double v : a.phase) {
        mean += v;
    }
    EXPECT_NEAR(mean / static_cast<double>(a.phase.size()), 0.0, 1e-12);
}

TEST(Screen, ZeroStrengthAndRange) {
    const auto z = generate_screen({0.0}, default_grid, 1);
    for (double v : z.phase) {
        ASSERT_EQ(v, 0.0);
    }
    EXPECT_THROW(generate_screen({2.5}, default_grid, 1), range_error);
    EXPECT_THROW(generate_screen({-0.1}, default_grid, 1), domain_error);
}

TEST(Screen, StrengthScaling) {
    // Same seed: phase scales exactly as (w/r0)^{5/6}.
    const auto a = generate_screen({0.5}, default_grid, 9);
    const auto b = generate_screen({1.0}, default_grid, 9);
    const double k = std::pow(0.5, 5.0 / 6.0);
    for (std::size_t i = 0; i < a.phase.size(); i += 97) {
        ASSERT_NEAR(a.phase[i], k * b.phase[i], 1e-12 * (1.0 + std::abs(b.phase[i])));
    }
}

TEST(ApplyScreen, UnitaryAndIdentity) {
    const auto f = make_lg_mode({1}, default_grid);
    const auto zero = generate_screen({0.0}, default_grid, 1);
    const auto g0 = apply_screen(f, zero);
    for (std::size_t k = 0; k < f.samples().size(); ++k) {
        ASSERT_EQ(g0.samples()[k], f.samples()[k]);
    }
    for (int s = 0; s < 5; ++s) {
        const auto screen = generate_screen({1.4}, default_grid, s);
        EXPECT_NEAR(apply_screen(f, screen).norm2(), f.norm2(), 1e-12);
    }
    EXPECT_THROW(apply_screen(ScalarField(GridSpec{64, 8.0}), zero), shape_error);
}

TEST(ApplyScreen, SameScreenOnBothPolarizations) {
    const auto screen = generate_screen({0.6}, default_grid, 3);
    const VectorField v{make_lg_mode({1}, default_grid), make_lg_mode({-1}, default_grid)};
    const auto out = apply_screen(v, screen);
    const auto r = apply_screen(v.right(), screen);
    const auto l = apply_screen(v.left(), screen);
    for (std::size_t k = 0; k < r.samples().size(); ++k) {
        ASSERT_EQ(out.right().samples()[k], r.samples()[k]);
        ASSERT_EQ(out.left().samples()[k], l.samples()[k]);
    }
}

TEST(ApplyScreen, MirrorIdentityPerRealization) {
    const auto p = make_lg_mode({1}, default_grid);
    const auto m = make_lg_mode({-1}, default_grid);
    for (int s = 0; s < 10; ++s) {
        const auto screen = generate_screen({1.0}, default_grid, 100 + s);
        const cplx a = overlap(apply_screen(p, screen), p);
        const cplx b = overlap(apply_screen(m, screen), m);
        EXPECT_LT(std::abs(a - b), 1e-12);
    }
}

TEST(Spectrum, ParsevalOnScreenedModes) {
    const int lmax = max_resolved_charge(default_grid);
    for (double a : {0.6, 1.4, 2.0}) {
        const auto f = apply_screen(make_lg_mode({1}, default_grid), generate_screen({a}, default_grid, 5));
        const auto dec = oam_decomposition(f, -lmax, lmax);
        double total = dec.remainder;
        for (auto [l, v] : dec.power) {
            total += v;
        }
        EXPECT_NEAR(total, f.norm2(), 1e-6) << a;
        // Deficit at l = 1 is the crosstalk into every other charge plus the remainder.
        const double p1 = dec.power.at(1);
        EXPECT_LT(p1, 1.0);
        EXPECT_NEAR(f.norm2() - p1, total - p1, 1e-6);
    }
}

TEST(StructureFunction, ZeroTurbulence) {
    const auto list = screens(0.0, 100, GridSpec{64, 8.0});
    const std::vector<double> seps{0.5, 1.0};
    for (const auto& e : structure_function_estimate(list, seps)) {
        EXPECT_EQ(e.stats.mean, 0.0);
    }
}

TEST(StructureFunction, TooFewScreens) {
    const auto list = screens(1.0, 20, GridSpec{64, 8.0});
    const std::vector<double> seps{0.5};
    EXPECT_THROW(structure_function_estimate(list, seps), statistics_error);
}

TEST(StructureFunction, KolmogorovStatistics) {
    const TurbulenceParams p{1.0};
    const std::vector<double> seps{0.25, 0.5, 1.0};
    ScreenPairAccumulator axes(default_grid, seps);
    ScreenPairAccumulator x(default_grid, seps, PairDirection::x);
    ScreenPairAccumulator y(default_grid, seps, PairDirection::y);
    ScreenPairAccumulator diag(default_grid, seps, PairDirection::diagonal);
    for (int k = 0; k < 300; ++k) {
        const auto s = generate_screen(p, default_grid, stream_key(23, 1, k));
        axes.add(s);
        x.add(s);
        y.add(s);
        diag.add(s);
    }
    const auto d = axes.structure_function();
    // D(r0) = 6.88 within 10%.
    EXPECT_NEAR(d[2].stats.mean / 6.88, 1.0, 0.1);
    // Kolmogorov 5/3 scaling between neighbouring separations.
    EXPECT_NEAR(d[0].stats.mean / d[1].stats.mean / std::pow(0.5, 5.0 / 3.0), 1.0, 0.1);
    EXPECT_NEAR(d[1].stats.mean / d[2].stats.mean / std::pow(0.5, 5.0 / 3.0), 1.0, 0.1);
    // Isotropy: directional estimates agree within statistical error.
    const auto dx = x.structure_function();
    const auto dy = y.structure_function();
    const auto dd = diag.structure_function();
    for (std::size_t q = 0; q < seps.size(); ++q) {
        const double tol = 3.0 * std::hypot(dx[q].stats.std_error, dy[q].stats.std_error);
        EXPECT_NEAR(dx[q].stats.mean, dy[q].stats.mean, tol) << q;
        const double thd = structure_function_theory(dd[q].separation, p);
        const double thx = structure_function_theory(dx[q].separation, p);
        EXPECT_NEAR(dd[q].stats.mean / thd, dx[q].stats.mean / thx, 3.0 * (dd[q].stats.std_error / thd +
                                                                          dx[q].stats.std_error / thx)) << q;
    }
}

TEST(Coherence, EnsembleMatchesTheory) {
    for (double a : {0.6, 1.0}) {
        const TurbulenceParams p{a};
        const double r0 = 1.0 / a;
        const std::vector<double> seps{0.2 * r0, 0.5 * r0, r0, 2.0 * r0};
        ScreenPairAccumulator acc(default_grid, seps);
        for (int k = 0; k < 300; ++k) {
            acc.add(generate_screen(p, default_grid, stream_key(31, 2, k)));
        }
        for (const auto& e : acc.coherence()) {
            const double th = coherence_at_separation(e.separation, p);
            EXPECT_NEAR(e.stats.mean, th, 3.0 * e.stats.std_error) << a << " " << e.separation;
        }
    }
}

TEST(BeamBroadening, ZeroTurbulenceIsFreeDiffraction) {
    const GridSpec g{128, 16.0};
    const double lambda = 0.05;
    const double zr = std::numbers::pi / lambda;
    const auto r = beam_broadening_mc({0.0}, 100, 0.5 * zr, lambda, 7, g);
    EXPECT_NEAR(r.w_t_over_w, std::sqrt(1.25), 1e-6);
    EXPECT_NEAR(r.std_error, 0.0, 1e-9);
}

TEST(BeamBroadening, MonotoneAndDeterministic) {
    const GridSpec g{128, 16.0};
    const double lambda = 0.05;
    const double d = 0.25 * std::numbers::pi / lambda;
    double prev = 0.0;
    for (double a : {0.2, 0.6, 1.0, 1.4}) {
        const auto r = beam_broadening_mc({a}, 100, d, lambda, 11, g);
        EXPECT_GT(r.w_t_over_w, prev) << a;
        prev = r.w_t_over_w;
    }
    const auto x = beam_broadening_mc({0.6}, 100, d, lambda, 5, g, 1);
    const auto y = beam_broadening_mc({0.6}, 100, d, lambda, 5, g, 3);
    EXPECT_EQ(x.w_t_over_w, y.w_t_over_w);
    EXPECT_EQ(x.std_error, y.std_error);
    EXPECT_THROW(beam_broadening_mc({0.6}, 50, d, lambda, 5, g), statistics_error);
}
