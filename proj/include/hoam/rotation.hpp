#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "hoam/fft.hpp"
#include "hoam/fields.hpp"

namespace hoam {

namespace detail {

// Counter-clockwise rotation by turns * 90 degrees. Exact on the symmetric
// pixel lattice (a pure permutation).
inline std::vector<cplx> quarter_turn(std::span<const cplx> in, int n, int turns) {
    turns = ((turns % 4) + 4) % 4;
    std::vector<cplx> out(in.size());
    const auto at = [&](int i, int j) { return in[static_cast<std::size_t>(j) * n + i]; };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            cplx v;
            switch (turns) {
                case 0: v = at(i, j); break;
                case 1: v = at(j, n - 1 - i); break;
                case 2: v = at(n - 1 - i, n - 1 - j); break;
                default: v = at(n - 1 - j, i); break;
            }
            out[static_cast<std::size_t>(j) * n + i] = v;
        }
    }
    return out;
}

// Spectral shift of every line by shift(line) along the transformed axis:
// g(u) = f(u + shift). Phases are built by recurrence so that negating the
// shift yields exactly conjugated factors.
template <typename Transform, typename Index>
void shift_lines(std::vector<cplx>& data, const GridSpec& grid, double coefficient, Transform&& transform,
                 Index&& index) {
    const int n = grid.n;
    const double dk = 2.0 * std::numbers::pi / grid.extent;
    transform(data, fft::direction::forward);
    std::vector<cplx> phase(n);
    for (int line = 0; line < n; ++line) {
        const double shift = coefficient * grid.coord(line);
        const cplx step = std::polar(1.0, dk * shift);
        cplx pos{1.0 / n, 0.0};
        cplx neg{1.0 / n, 0.0};
        phase[0] = pos;
        for (int k = 1; k <= n / 2; ++k) {
            pos *= step;
            neg *= std::conj(step);
            if (k < n / 2) {
                phase[k] = pos;
            }
            phase[n - k] = neg;  // k == n/2 lands on the Nyquist bin, treated as negative
        }
        for (int k = 0; k < n; ++k) {
            data[index(line, k)] *= phase[k];
        }
    }
    transform(data, fft::direction::backward);
}

// g(x, y) = f(x + a y, y)
inline void shear_x(std::vector<cplx>& data, const GridSpec& grid, double a) {
    const int n = grid.n;
    shift_lines(
        data, grid, a, [n](std::vector<cplx>& d, fft::direction dir) { fft::transform_rows(d, n, dir); },
        [n](int line, int k) { return static_cast<std::size_t>(line) * n + k; });
}

// g(x, y) = f(x, y + b x)
inline void shear_y(std::vector<cplx>& data, const GridSpec& grid, double b) {
    const int n = grid.n;
    shift_lines(
        data, grid, b, [n](std::vector<cplx>& d, fft::direction dir) { fft::transform_columns(d, n, dir); },
        [n](int line, int k) { return static_cast<std::size_t>(k) * n + line; });
}

// Rotation by |theta| <= pi/4 as three unitary shears. Negating theta gives
// the exact inverse.
inline void shear_rotate(std::vector<cplx>& data, const GridSpec& grid, double theta) {
    if (theta == 0.0) {
        return;
    }
    const double a = std::tan(0.5 * theta);
    const double b = -std::sin(theta);
    shear_x(data, grid, a);
    shear_y(data, grid, b);
    shear_x(data, grid, a);
}

}  // namespace detail

/// Rotates a field counter-clockwise by theta about the beam axis:
/// out(r, phi) = f(r, phi - theta), so an e^{i l phi} mode picks up e^{-i l theta}.
///
/// Quarter turns are exact permutations; the residual |angle| <= pi/4 is a
/// three-pass spectral shear, which is unitary. For theta >= 0 the quarter
/// turn is applied first and for theta < 0 last, which makes
/// rotate_modal(., -theta) the exact inverse and adjoint of rotate_modal(., theta).
inline ScalarField rotate_modal(const ScalarField& f, double theta) {
    const GridSpec& grid = f.grid();
    const double quarter = 0.5 * std::numbers::pi;
    const double k = std::round(theta / quarter);
    const double residual = theta - k * quarter;
    const int turns = static_cast<int>(std::fmod(k, 4.0));
    std::vector<cplx> data;
    if (theta >= 0.0) {
        data = detail::quarter_turn(f.samples(), grid.n, turns);
        detail::shear_rotate(data, grid, residual);
    } else {
        data.assign(f.samples().begin(), f.samples().end());
        detail::shear_rotate(data, grid, residual);
        data = detail::quarter_turn(data, grid.n, turns);
    }
    return {grid, std::move(data)};
}

}  // namespace hoam
