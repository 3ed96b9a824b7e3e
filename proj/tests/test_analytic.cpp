#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hoam/analytic.hpp"

using namespace hoam;

namespace {

constexpr double two_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;

}  // namespace

TEST(ThetaTransform, NoTurbulence) {
    EXPECT_NEAR(theta_transform(0, 1.0, {0.0}), two_pi_sq, 1e-10);
    EXPECT_NEAR(theta_transform(2, 1.0, {0.0}), 0.0, 1e-10);
    EXPECT_NEAR(theta_transform(2, 1.0, {0.0}, {}, AngleVariant::full_angle), 0.0, 1e-10);
}

TEST(ThetaTransform, MatchesRiemannSum) {
    // r * w/r0 = 0.5; midpoint sum over one period with 1e6 nodes.
    const int n = 1'000'000;
    const double h = 2.0 * std::numbers::pi / n;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        acc += coherence(0.5, (k + 0.5) * h, {1.0});
    }
    const double brute = 2.0 * std::numbers::pi * acc * h;
    EXPECT_NEAR(theta_transform(0, 0.5, {1.0}) / brute, 1.0, 1e-6);
}

TEST(ThetaTransform, EvenInDeltaL) {
    for (int dl : {2, 4}) {
        EXPECT_DOUBLE_EQ(theta_transform(dl, 0.8, {0.9}), theta_transform(-dl, 0.8, {0.9}));
    }
}

TEST(Coupling, Normalization) {
    for (int l : {1, 2, 3}) {
        const auto c = coupling_coefficients(l, {0.0});
        EXPECT_NEAR(c.c0, 1.0, 1e-12);
        EXPECT_NEAR(c.c2l, 0.0, 1e-6);
    }
}

TEST(Coupling, ReferenceValues) {
    // Adaptive double integral of the same expression (independent code path).
    struct Row {
        int l;
        double a, c0, c2l;
    };
    const Row rows[] = {
        {1, 0.2, 0.719160311996, 0.018810561928}, {1, 0.6, 0.305710895154, 0.085149283763},
        {1, 1.0, 0.178382251597, 0.095131805986}, {1, 1.4, 0.124991401781, 0.086237560757},
        {2, 0.6, 0.227450467042, 0.027851360134}, {2, 1.4, 0.092233319114, 0.050815099526},
    };
    for (const auto& row : rows) {
        const auto c = coupling_coefficients(row.l, {row.a});
        EXPECT_NEAR(c.c0, row.c0, 1e-8) << row.l << " " << row.a;
        EXPECT_NEAR(c.c2l, row.c2l, 1e-8) << row.l << " " << row.a;
    }
}

TEST(Coupling, MonotoneAndBounded) {
    double prev_c0 = 2.0;
    double prev_c2l = -1.0;
    for (double a : preset_strengths()) {
        const auto c = coupling_coefficients(1, {a});
        EXPECT_LT(c.c0, prev_c0);
        EXPECT_LE(c.c2l, c.c0);
        EXPECT_GE(c.c2l, 0.0);
        EXPECT_LE(c.c0 + c.c2l, 1.0 + 1e-6);
        if (a <= 0.8) {
            EXPECT_GT(c.c2l, prev_c2l);
        }
        prev_c0 = c.c0;
        prev_c2l = c.c2l;
    }
}

TEST(Coupling, NodeDoublingSelfConsistent) {
    QuadratureConfig q;
    q.check = false;
    QuadratureConfig q2 = q;
    q2.radial_nodes *= 2;
    q2.angular_nodes *= 2;
    for (double a : {0.2, 1.4, 2.0}) {
        EXPECT_NEAR(coupling_coefficient(1, 0, {a}, q), coupling_coefficient(1, 0, {a}, q2), 1e-6);
        EXPECT_NEAR(coupling_coefficient(1, 2, {a}, q), coupling_coefficient(1, 2, {a}, q2), 1e-6);
    }
}

TEST(Coupling, CoarseQuadratureRejected) {
    QuadratureConfig q;
    q.radial_nodes = 4;
    q.angular_nodes = 4;
    EXPECT_THROW(coupling_coefficient(1, 0, {1.4}, q), tolerance_error);
}

TEST(SuccessProbability, VariantsAgreeForSurvival) {
    for (double a : {0.0, 0.6, 1.4}) {
        const auto v = success_probability_variants({a});
        EXPECT_NEAR(v.half_angle, v.full_angle, 1e-9);
        EXPECT_DOUBLE_EQ(success_probability({a}), v.half_angle);
    }
    // The crosstalk term does depend on the variant.
    EXPECT_GT(std::abs(coupling_coefficient(1, 2, {0.6}, {}, AngleVariant::full_angle) -
                       coupling_coefficient(1, 2, {0.6})),
              1e-3);
}

TEST(PhCurve, PresetSortedMonotone) {
    const auto s = preset_strengths();
    ASSERT_EQ(s.size(), 14u);
    EXPECT_DOUBLE_EQ(s.front(), 0.0);
    EXPECT_DOUBLE_EQ(s.back(), 1.4);
    std::vector<TurbulenceParams> params(s.rbegin(), s.rend());
    const auto curve = ph_curve(params);
    ASSERT_EQ(curve.size(), 14u);
    EXPECT_NEAR(curve.front().ph, 1.0, 1e-12);
    for (std::size_t k = 1; k < curve.size(); ++k) {
        EXPECT_GT(curve[k].w_over_r0, curve[k - 1].w_over_r0);
        EXPECT_LE(curve[k].ph, curve[k - 1].ph);
    }
    EXPECT_THROW(ph_curve({}), domain_error);
}
