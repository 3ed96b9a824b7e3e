#pragma once

#include <cmath>
#include <string>

#include "hoam/errors.hpp"

namespace hoam {

/// Square sampling grid centred on the beam axis. Lengths are in units of
/// the beam waist w.
///
/// Pixel centres sit at (i - (n-1)/2) * pitch, so the axis falls on the
/// corner shared by the four central pixels. The grid is therefore symmetric
/// under x -> -x, y -> -y and quarter turns, and no sample sits on the
/// (phase-singular) axis itself.
struct GridSpec {
    int n = 256;
    double extent = 8.0;

    [[nodiscard]] double pitch() const noexcept { return extent / n; }
    [[nodiscard]] double coord(int i) const noexcept { return (i - 0.5 * (n - 1)) * pitch(); }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(n) * n; }

    void validate() const {
        if (n < 32 || n % 2 != 0) {
            throw range_error("grid size must be even and at least 32, got " + std::to_string(n));
        }
        if (!(extent > 0.0) || !std::isfinite(extent)) {
            throw range_error("grid extent must be positive");
        }
    }

    bool operator==(const GridSpec&) const = default;
};

inline constexpr GridSpec default_grid{256, 8.0};

}  // namespace hoam
