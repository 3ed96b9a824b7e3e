#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <span>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "hoam/decomposition.hpp"
#include "hoam/errors.hpp"
#include "hoam/fields.hpp"
#include "hoam/rotation.hpp"

namespace hoam {

/// alpha |R, +l> + beta |L, -l>.
struct HybridQubit {
    cplx alpha{1.0, 0.0};
    cplx beta{0.0, 0.0};
    int l = 1;

    [[nodiscard]] double norm2() const noexcept { return std::norm(alpha) + std::norm(beta); }

    void validate() const {
        if (l < 1 || l > max_supported_l) {
            throw range_error("hybrid qubit charge must be in [1, " + std::to_string(max_supported_l) + "]");
        }
        if (std::abs(norm2() - 1.0) > 1e-12) {
            throw domain_error("hybrid qubit is not normalised");
        }
    }
};

enum class WaveplateKind { quarter, half };

/// Ideal waveplate with fast axis at `angle` from x, acting on the
/// circular-basis pair (R, L).
///
/// Phase convention: HWP(a) maps (R, L) -> (e^{i2a} L, e^{-i2a} R) with no
/// extra global phase, so HWP(0) is the plain swap and HWP twice is the
/// identity. QWP(a) = ((1+i) I + (1-i) HWP(a)) / 2, the square root of HWP(a)
/// with the same convention.
inline VectorField waveplate(WaveplateKind kind, double angle, const VectorField& f) {
    const cplx e = std::polar(1.0, 2.0 * angle);
    const ScalarField swapped_r = e * f.left();
    const ScalarField swapped_l = std::conj(e) * f.right();
    if (kind == WaveplateKind::half) {
        return {swapped_r, swapped_l};
    }
    const cplx a{0.5, 0.5};
    const cplx b{0.5, -0.5};
    return {a * f.right() + b * swapped_r, a * f.left() + b * swapped_l};
}

/// Tuned q-plate of charge q (2q integer): |L, m> -> |R, m + 2q>,
/// |R, m> -> |L, m - 2q>.
inline VectorField qplate(double q, const VectorField& f) {
    const double twice = 2.0 * q;
    if (std::abs(twice - std::round(twice)) > 1e-12) {
        throw domain_error("q-plate charge must be a half-integer");
    }
    const int m = static_cast<int>(std::round(twice));
    const auto plus = azimuthal_phase(f.grid(), m);
    const auto minus = azimuthal_phase(f.grid(), -m);
    return {modulate<cplx>(f.left(), *plus), modulate<cplx>(f.right(), *minus)};
}

/// Azimuthally uniform mode with the LG_{0,l} radial modulus; cached.
inline std::shared_ptr<const ScalarField> radial_reference(const GridSpec& grid, int l) {
    return detail::memoize<std::tuple<int, double, int>, ScalarField>(std::make_tuple(grid.n, grid.extent, l),
                                                                      [&] { return make_radial_mode(l, grid); });
}

/// Polarization state alpha R + beta L on the azimuthally uniform mode with
/// the LG_{0,l} radial modulus: the field in front of the encoding optics.
inline VectorField polarization_input(const HybridQubit& qubit, const GridSpec& grid) {
    const auto& base = *radial_reference(grid, qubit.l);
    return {qubit.alpha * base, qubit.beta * base};
}

/// HWP(0) then qplate(l/2): alpha R + beta L -> alpha |R, +l> + beta |L, -l>.
inline VectorField encode(const HybridQubit& qubit, const GridSpec& grid) {
    qubit.validate();
    return qplate(0.5 * qubit.l, waveplate(WaveplateKind::half, 0.0, polarization_input(qubit, grid)));
}

/// Inverse of encode's optics: qplate(l/2) then HWP(0).
inline VectorField decode_optics(const VectorField& f, int l) {
    return waveplate(WaveplateKind::half, 0.0, qplate(0.5 * l, f));
}

struct DecodeResult {
    std::array<cplx, 2> recovered{};  // (R, L), |recovered|^2 = success_prob
    double success_prob = 0.0;        // power left in the l = 0 subspace
    double purity = 1.0;              // largest eigenvalue / trace of the post-selected polarization state
    std::array<cplx, 2> fiber{};      // projections onto the fixed radial reference mode
};

namespace detail {

// Principal eigenvector of a 2 x 2 Hermitian matrix [[a, c], [conj(c), b]],
// phase-fixed so that its largest component is real and positive.
inline std::array<cplx, 2> principal_vector(double a, double b, cplx c, double& lambda_max) {
    const double half_diff = 0.5 * (a - b);
    const double root = std::hypot(half_diff, std::abs(c));
    lambda_max = 0.5 * (a + b) + root;
    std::array<cplx, 2> v;
    if (std::abs(c) == 0.0) {
        v = a >= b ? std::array<cplx, 2>{1.0, 0.0} : std::array<cplx, 2>{0.0, 1.0};
    } else if (half_diff >= 0.0) {
        v = {half_diff + root, std::conj(c)};
    } else {
        v = {c, root - half_diff};
    }
    const double nv = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
    const cplx ref = std::abs(v[0]) >= std::abs(v[1]) ? v[0] : v[1];
    const cplx phase = std::conj(ref) / std::abs(ref);
    return {v[0] * phase / nv, v[1] * phase / nv};
}

}  // namespace detail

/// Reduces charge-0 ring profiles c_R(r), c_L(r) to the post-selected
/// polarization state rho = int c c^dagger r dr. Its trace is the success
/// probability; the recovered amplitudes are the principal eigenvector
/// scaled by sqrt(trace).
inline DecodeResult reduce_profiles(const GridSpec& grid, std::span<const cplx> pr, std::span<const cplx> pl) {
    const auto& s = *polar_sampler(grid);
    double a = 0.0;
    double b = 0.0;
    cplx c{};
    for (int k = 0; k < s.n_radial; ++k) {
        const double w = s.weight[k] * s.radius[k];
        a += w * std::norm(pr[k]);
        b += w * std::norm(pl[k]);
        c += w * pr[k] * std::conj(pl[k]);
    }
    DecodeResult out;
    out.success_prob = a + b;
    if (out.success_prob > 0.0) {
        double lambda = 0.0;
        const auto v = detail::principal_vector(a, b, c, lambda);
        const double amp = std::sqrt(out.success_prob);
        out.recovered = {amp * v[0], amp * v[1]};
        out.purity = lambda / out.success_prob;
    }
    return out;
}

/// l = 0 post-selection on already-decoded optics output.
inline DecodeResult post_select(const VectorField& g, int l) {
    const auto pr = oam_component_profile(g.right(), 0);
    const auto pl = oam_component_profile(g.left(), 0);
    DecodeResult out = reduce_profiles(g.grid(), pr, pl);
    const auto& ref = *radial_reference(g.grid(), l);
    out.fiber = {overlap(ref, g.right()), overlap(ref, g.left())};
    return out;
}

/// qplate(l/2), HWP(0), then l = 0 post-selection.
inline DecodeResult decode(const VectorField& f, int l) { return post_select(decode_optics(f, l), l); }

/// Rotation of the whole beam by theta about the axis: the Jones vector
/// rotates (R -> e^{i theta} R, L -> e^{-i theta} L) and each component's
/// transverse profile rotates.
inline VectorField rotate_frame(const VectorField& f, double theta) {
    if (theta == 0.0) {
        return f;
    }
    const cplx e = std::polar(1.0, theta);
    return {rotate_modal(e * f.right(), theta), rotate_modal(std::conj(e) * f.left(), theta)};
}

/// |<target | recovered / |recovered|>|^2 in the (R, L) basis.
inline double fidelity(const std::array<cplx, 2>& recovered, const HybridQubit& target) {
    const double n2 = std::norm(recovered[0]) + std::norm(recovered[1]);
    if (!(n2 > 0.0)) {
        throw undefined_fidelity_error("recovered state is zero (total loss)");
    }
    const cplx ip = std::conj(target.alpha) * recovered[0] + std::conj(target.beta) * recovered[1];
    return std::min(1.0, std::norm(ip) / (n2 * target.norm2()));
}

inline double state_fidelity(const HybridQubit& a, const HybridQubit& b) {
    return fidelity(std::array<cplx, 2>{a.alpha, a.beta}, b);
}

/// The six mutually unbiased states, in the order 0, 1, +, -, R, L with
/// R = (0 - i 1)/sqrt 2 and L = (0 + i 1)/sqrt 2.
inline std::vector<HybridQubit> mub_states(int l = 1) {
    const double h = std::numbers::sqrt2 / 2.0;
    const cplx i{0.0, 1.0};
    std::vector<HybridQubit> out = {
        {1.0, 0.0, l}, {0.0, 1.0, l}, {h, h, l}, {h, -h, l}, {h, -i * h, l}, {h, i * h, l},
    };
    for (const auto& q : out) {
        q.validate();
    }
    return out;
}

inline const std::array<std::string, 6>& mub_labels() {
    static const std::array<std::string, 6> labels = {"0", "1", "+", "-", "R", "L"};
    return labels;
}

}  // namespace hoam
