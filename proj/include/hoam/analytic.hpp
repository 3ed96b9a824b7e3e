#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hoam/errors.hpp"
#include "hoam/fields.hpp"
#include "hoam/quadrature.hpp"
#include "hoam/turbulence.hpp"

namespace hoam {

struct QuadratureConfig {
    int radial_nodes = 200;
    int angular_nodes = 512;
    double tolerance = 1e-6;
    bool check = true;  // re-evaluate with doubled nodes and throw tolerance_error on disagreement
};

/// Angular argument of the coherence kernel. half_angle uses |sin(u/2)|
/// (chord distance between the two points on a ring); full_angle uses |sin u|.
enum class AngleVariant { half_angle, full_angle };

struct CouplingCoefficients {
    double c0 = 1.0;
    double c2l = 0.0;
    int l = 1;
    double w_over_r0 = 0.0;
};

namespace detail {

inline double ring_coherence(double r, double u, double w_over_r0, AngleVariant v) {
    const double s = std::abs(std::sin(v == AngleVariant::half_angle ? 0.5 * u : u));
    return std::exp(-kolmogorov_coefficient * std::cbrt(4.0) * std::pow(r * w_over_r0 * s, 5.0 / 3.0));
}

// int_0^h g(u) du with u = h t^3, which removes the u^{5/3} cusp at u = 0.
template <typename Fn>
double cusp_integral(Fn&& g, double h, int nodes) {
    const GaussRule& rule = *gauss_legendre(nodes);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double t = 0.5 * (rule.nodes[k] + 1.0);
        acc += 0.5 * rule.weights[k] * 3.0 * h * t * t * g(h * t * t * t);
    }
    return acc;
}

inline double theta_transform(int delta_l, double r, double w_over_r0, int nodes, AngleVariant v) {
    const double pi = std::numbers::pi;
    const auto g = [&](double u) { return std::cos(delta_l * u) * ring_coherence(r, u, w_over_r0, v); };
    // Both kernels are symmetric about u = pi; the full-angle one also has a
    // cusp at u = pi, so its half period is split once more.
    if (v == AngleVariant::half_angle) {
        return 4.0 * pi * cusp_integral(g, pi, nodes);
    }
    const auto mirrored = [&](double u) { return g(pi - u); };
    return 4.0 * pi * (cusp_integral(g, 0.5 * pi, nodes / 2) + cusp_integral(mirrored, 0.5 * pi, nodes / 2));
}

// int_0^inf |R_l(r)|^2 Theta(r) r dr with x = 2 r^2 = x_max s^6, s in [0, 1].
template <typename Fn>
double radial_integral(int l, Fn&& theta, int nodes) {
    const double x_max = 80.0 + 4.0 * std::abs(l);
    const GaussRule& rule = *gauss_legendre(nodes);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double s = 0.5 * (rule.nodes[k] + 1.0);
        const double s5 = s * s * s * s * s;
        const double x = x_max * s5 * s;
        const double r = std::sqrt(0.5 * x);
        const double rad = lg_radial(l, r);
        // r dr = dx / 4, dx = 6 x_max s^5 ds, ds = dt / 2
        acc += 0.5 * rule.weights[k] * rad * rad * theta(r) * 1.5 * x_max * s5;
    }
    return acc;
}

inline double coupling_raw(int l, int delta_l, double w_over_r0, int radial_nodes, int angular_nodes, AngleVariant v) {
    return radial_integral(
        l, [&](double r) { return theta_transform(delta_l, r, w_over_r0, angular_nodes, v); }, radial_nodes);
}

inline void check_charge(int l) {
    if (l < 1 || l > max_supported_l) {
        throw range_error("charge must be in [1, " + std::to_string(max_supported_l) + "]");
    }
}

}  // namespace detail

/// Theta_dl(r) = int int e^{-i dl (theta - theta')} <e^{i(phi - phi')}> dtheta dtheta'
/// = 2 pi int_0^{2 pi} cos(dl u) coherence(r, u) du.
inline double theta_transform(int delta_l, double r, const TurbulenceParams& params, const QuadratureConfig& quad = {},
                              AngleVariant variant = AngleVariant::half_angle) {
    params.validate();
    const double v = detail::theta_transform(delta_l, r, params.w_over_r0, quad.angular_nodes, variant);
    if (quad.check) {
        const double v2 = detail::theta_transform(delta_l, r, params.w_over_r0, 2 * quad.angular_nodes, variant);
        if (std::abs(v2 - v) > quad.tolerance * 4.0 * std::numbers::pi * std::numbers::pi) {
            throw tolerance_error("angular quadrature did not converge");
        }
    }
    return v;
}

/// C_dl = int |R(r)|^2 Theta_dl(r) r dr normalised by its zero-turbulence C_0.
inline double coupling_coefficient(int l, int delta_l, const TurbulenceParams& params, const QuadratureConfig& quad = {},
                                   AngleVariant variant = AngleVariant::half_angle) {
    detail::check_charge(l);
    params.validate();
    const auto eval = [&](int nr, int na) {
        const double norm = detail::coupling_raw(l, 0, 0.0, nr, na, variant);
        return detail::coupling_raw(l, delta_l, params.w_over_r0, nr, na, variant) / norm;
    };
    const double v = eval(quad.radial_nodes, quad.angular_nodes);
    if (quad.check) {
        const double v2 = eval(2 * quad.radial_nodes, 2 * quad.angular_nodes);
        if (std::abs(v2 - v) > quad.tolerance) {
            throw tolerance_error("coupling quadrature changed by " + std::to_string(std::abs(v2 - v)) +
                                  " under node doubling");
        }
    }
    return v;
}

inline CouplingCoefficients coupling_coefficients(int l, const TurbulenceParams& params,
                                                  const QuadratureConfig& quad = {},
                                                  AngleVariant variant = AngleVariant::half_angle) {
    return {coupling_coefficient(l, 0, params, quad, variant), coupling_coefficient(l, 2 * l, params, quad, variant), l,
            params.w_over_r0};
}

/// P_h = C_0 under both angle variants. For the survival term they agree
/// identically (u -> 2u maps one integral onto the other); the crosstalk
/// coefficient C_2l is where they differ.
struct SuccessProbability {
    double half_angle = 1.0;
    double full_angle = 1.0;
    [[nodiscard]] double value() const noexcept { return half_angle; }
};

inline SuccessProbability success_probability_variants(const TurbulenceParams& params, int l = 1,
                                                       const QuadratureConfig& quad = {}) {
    return {coupling_coefficient(l, 0, params, quad, AngleVariant::half_angle),
            coupling_coefficient(l, 0, params, quad, AngleVariant::full_angle)};
}

inline double success_probability(const TurbulenceParams& params, int l = 1, const QuadratureConfig& quad = {}) {
    return coupling_coefficient(l, 0, params, quad, AngleVariant::half_angle);
}

struct PhPoint {
    double w_over_r0 = 0.0;
    double ph = 1.0;
    double ph_full_angle = 1.0;
};

/// P_h over a list of strengths, sorted by strength.
inline std::vector<PhPoint> ph_curve(std::vector<TurbulenceParams> params_list, int l = 1,
                                     const QuadratureConfig& quad = {}) {
    if (params_list.empty()) {
        throw domain_error("strength list is empty");
    }
    std::sort(params_list.begin(), params_list.end(),
              [](const TurbulenceParams& a, const TurbulenceParams& b) { return a.w_over_r0 < b.w_over_r0; });
    std::vector<PhPoint> out;
    for (const auto& p : params_list) {
        const auto v = success_probability_variants(p, l, quad);
        out.push_back({p.w_over_r0, v.half_angle, v.full_angle});
    }
    return out;
}

/// Fourteen equally spaced strengths on [0, 1.4].
inline std::vector<double> preset_strengths() {
    std::vector<double> out(14);
    for (int k = 0; k < 14; ++k) {
        out[k] = 1.4 * k / 13.0;
    }
    return out;
}

}  // namespace hoam
