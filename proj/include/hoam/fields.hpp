#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hoam/cache.hpp"
#include "hoam/errors.hpp"
#include "hoam/grid.hpp"

namespace hoam {

using cplx = std::complex<double>;

/// Complex transverse amplitude of one polarization component, sampled on a
/// square grid. Sample (i, j) sits at x = grid.coord(i), y = grid.coord(j) and
/// is stored row-major (rows run along x).
class ScalarField {
public:
    explicit ScalarField(const GridSpec& grid) : grid_(grid), samples_(grid.size()) {
        grid_.validate();
    }

    ScalarField(const GridSpec& grid, std::vector<cplx> samples)
        : grid_(grid), samples_(std::move(samples)) {
        grid_.validate();
        if (samples_.size() != grid_.size()) {
            throw shape_error("sample count does not match the grid");
        }
        for (const auto& v : samples_) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                throw domain_error("field samples must be finite");
            }
        }
    }

    [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const cplx> samples() const noexcept { return samples_; }
    [[nodiscard]] const cplx& at(int i, int j) const { return samples_[static_cast<std::size_t>(j) * grid_.n + i]; }

    /// Sum of |a|^2 * pitch^2.
    [[nodiscard]] double norm2() const noexcept {
        double acc = 0.0;
        for (const auto& v : samples_) {
            acc += std::norm(v);
        }
        return acc * grid_.pitch() * grid_.pitch();
    }

private:
    GridSpec grid_;
    std::vector<cplx> samples_;
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) {
        throw shape_error("grid mismatch");
    }
}

/// Inner product sum(conj(a) * b) * pitch^2.
inline cplx overlap(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid());
    auto sa = a.samples();
    auto sb = b.samples();
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < sa.size(); ++k) {
        const cplx p = std::conj(sa[k]) * sb[k];
        re += p.real();
        im += p.imag();
    }
    const double area = a.grid().pitch() * a.grid().pitch();
    return {re * area, im * area};
}

inline ScalarField operator*(cplx s, const ScalarField& f) {
    std::vector<cplx> out(f.samples().begin(), f.samples().end());
    for (auto& v : out) {
        v *= s;
    }
    return {f.grid(), std::move(out)};
}

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid());
    std::vector<cplx> out(a.samples().begin(), a.samples().end());
    auto sb = b.samples();
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] += sb[k];
    }
    return {a.grid(), std::move(out)};
}

/// Pointwise product with a mask sampled on the same grid.
template <typename T>
ScalarField modulate(const ScalarField& f, std::span<const T> mask) {
    if (mask.size() != f.grid().size()) {
        throw shape_error("mask size does not match the grid");
    }
    std::vector<cplx> out(f.samples().begin(), f.samples().end());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] *= mask[k];
    }
    return {f.grid(), std::move(out)};
}

/// Samples fn(r) on the grid, r measured from the beam axis.
template <typename Fn>
std::vector<double> sample_radial(const GridSpec& grid, Fn&& fn) {
    std::vector<double> out(grid.size());
    for (int j = 0; j < grid.n; ++j) {
        const double y = grid.coord(j);
        for (int i = 0; i < grid.n; ++i) {
            out[static_cast<std::size_t>(j) * grid.n + i] = fn(std::hypot(grid.coord(i), y));
        }
    }
    return out;
}

/// Table of e^{i m theta} at every pixel centre; cached per (grid, m).
inline std::shared_ptr<const std::vector<cplx>> azimuthal_phase(const GridSpec& grid, int m) {
    auto key = std::make_tuple(grid.n, grid.extent, m);
    return detail::memoize<decltype(key), std::vector<cplx>>(key, [&] {
        std::vector<cplx> table(grid.size());
        for (int j = 0; j < grid.n; ++j) {
            const double y = grid.coord(j);
            for (int i = 0; i < grid.n; ++i) {
                table[static_cast<std::size_t>(j) * grid.n + i] =
                    std::polar(1.0, m * std::atan2(y, grid.coord(i)));
            }
        }
        return table;
    });
}

/// Laguerre-Gauss mode LG_{p,l}; only the p = 0 family is generated here.
struct OamModeSpec {
    int l = 0;
    int p = 0;
    double w = 1.0;
};

inline constexpr int max_supported_l = 8;

/// Radial modulus of LG_{0,l} normalised so that 2 pi * int |R|^2 r dr = 1.
inline double lg_radial(int l, double r, double w = 1.0) {
    const int al = std::abs(l);
    const double norm = std::sqrt(2.0 / (std::numbers::pi * std::tgamma(al + 1.0))) / w;
    const double s = std::numbers::sqrt2 * r / w;
    return norm * std::pow(s, al) * std::exp(-(r * r) / (w * w));
}

/// LG_{0,l} at the waist plane: lg_radial(l, r) * e^{i l theta}.
inline ScalarField make_lg_mode(const OamModeSpec& spec, const GridSpec& grid) {
    grid.validate();
    if (std::abs(spec.l) > max_supported_l) {
        throw range_error("|l| > " + std::to_string(max_supported_l) + " is not supported");
    }
    if (spec.p != 0) {
        throw range_error("only radial index p = 0 is supported");
    }
    if (!(spec.w > 0.0)) {
        throw range_error("beam waist must be positive");
    }
    const auto radial = sample_radial(grid, [&](double r) { return lg_radial(spec.l, r, spec.w); });
    const auto& phase = *azimuthal_phase(grid, spec.l);
    std::vector<cplx> out(grid.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = radial[k] * phase[k];
    }
    return {grid, std::move(out)};
}

/// Azimuthally uniform mode carrying the LG_{0,l} radial modulus.
inline ScalarField make_radial_mode(int l, const GridSpec& grid) {
    grid.validate();
    if (std::abs(l) > max_supported_l) {
        throw range_error("|l| > " + std::to_string(max_supported_l) + " is not supported");
    }
    const auto radial = sample_radial(grid, [&](double r) { return lg_radial(l, r); });
    return {grid, std::vector<cplx>(radial.begin(), radial.end())};
}

/// Right/left circular polarization components on a shared grid.
class VectorField {
public:
    VectorField(ScalarField right, ScalarField left) : right_(std::move(right)), left_(std::move(left)) {
        require_same_grid(right_.grid(), left_.grid());
    }

    [[nodiscard]] const ScalarField& right() const noexcept { return right_; }
    [[nodiscard]] const ScalarField& left() const noexcept { return left_; }
    [[nodiscard]] const GridSpec& grid() const noexcept { return right_.grid(); }
    [[nodiscard]] double norm2() const noexcept { return right_.norm2() + left_.norm2(); }

private:
    ScalarField right_;
    ScalarField left_;
};

inline VectorField operator*(cplx s, const VectorField& f) { return {s * f.right(), s * f.left()}; }

inline VectorField operator+(const VectorField& a, const VectorField& b) {
    return {a.right() + b.right(), a.left() + b.left()};
}

inline cplx overlap(const VectorField& a, const VectorField& b) {
    return overlap(a.right(), b.right()) + overlap(a.left(), b.left());
}

}  // namespace hoam
