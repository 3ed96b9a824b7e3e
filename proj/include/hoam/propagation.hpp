#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hoam/errors.hpp"
#include "hoam/fft.hpp"
#include "hoam/fields.hpp"

namespace hoam {

/// Fraction of a field's energy in the outer band of width max(2, n/16) pixels.
inline double boundary_energy_fraction(const ScalarField& f) {
    const int n = f.grid().n;
    const int band = std::max(2, n / 16);
    double edge = 0.0;
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double e = std::norm(f.at(i, j));
            total += e;
            if (i < band || j < band || i >= n - band || j >= n - band) {
                edge += e;
            }
        }
    }
    return total > 0.0 ? edge / total : 0.0;
}

inline constexpr double boundary_energy_limit = 1e-4;

/// Paraxial angular-spectrum propagation over `distance` at `wavelength`
/// (both in the grid's length unit). Throws aliasing_error when the input or
/// output carries more than boundary_energy_limit of its energy at the edge.
inline ScalarField propagate(const ScalarField& f, double distance, double wavelength) {
    if (!(wavelength > 0.0) || !std::isfinite(distance)) {
        throw domain_error("wavelength must be positive and distance finite");
    }
    if (boundary_energy_fraction(f) > boundary_energy_limit) {
        throw aliasing_error("input field reaches the grid boundary");
    }
    const GridSpec& g = f.grid();
    const int n = g.n;
    std::vector<cplx> data(f.samples().begin(), f.samples().end());
    fft::transform_2d(data, n, fft::direction::forward);
    // exp(-i pi lambda d (fx^2 + fy^2)) with k = 2 pi f
    const double c = wavelength * distance / (4.0 * std::numbers::pi);
    std::vector<double> k2(n);
    for (int i = 0; i < n; ++i) {
        const double k = fft::angular_frequency(i, n, g.pitch());
        k2[i] = k * k;
    }
    const double inv = 1.0 / (static_cast<double>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            data[static_cast<std::size_t>(j) * n + i] *= std::polar(inv, -c * (k2[i] + k2[j]));
        }
    }
    fft::transform_2d(data, n, fft::direction::backward);
    ScalarField out(g, std::move(data));
    if (boundary_energy_fraction(out) > boundary_energy_limit) {
        throw aliasing_error("propagated field reaches the grid boundary");
    }
    return out;
}

/// Second-moment beam radius about the axis, sqrt(2 <r^2>), of an intensity map.
inline double second_moment_width(const GridSpec& g, std::span<const double> intensity) {
    double m0 = 0.0;
    double m2 = 0.0;
    for (int j = 0; j < g.n; ++j) {
        const double y = g.coord(j);
        for (int i = 0; i < g.n; ++i) {
            const double x = g.coord(i);
            const double v = intensity[static_cast<std::size_t>(j) * g.n + i];
            m0 += v;
            m2 += v * (x * x + y * y);
        }
    }
    if (!(m0 > 0.0)) {
        throw domain_error("intensity has no energy");
    }
    return std::sqrt(2.0 * m2 / m0);
}

}  // namespace hoam
