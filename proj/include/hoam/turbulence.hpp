#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "hoam/cache.hpp"
#include "hoam/errors.hpp"
#include "hoam/fft.hpp"
#include "hoam/fields.hpp"
#include "hoam/parallel.hpp"
#include "hoam/propagation.hpp"
#include "hoam/quadrature.hpp"
#include "hoam/rng.hpp"
#include "hoam/stats.hpp"

namespace hoam {

/// Kolmogorov structure-function coefficient, D(r0) = 6.88 rad^2.
inline constexpr double kolmogorov_coefficient = 6.88;

/// Largest w/r0 for which screen statistics are validated on the default grid.
inline constexpr double max_screen_strength = 2.0;

/// Fried parameter r0 = 0.185 (lambda^2 / (cn2 z))^{3/5}, SI units.
inline double fried_parameter(double wavelength, double cn2, double distance) {
    if (!(wavelength > 0.0) || !(cn2 > 0.0) || !(distance > 0.0)) {
        throw domain_error("wavelength, cn2 and distance must be positive");
    }
    return 0.185 * std::pow(wavelength * wavelength / (cn2 * distance), 0.6);
}

/// Physical path description in SI units.
struct PhysicalPath {
    double wavelength = 0.0;  // m
    double cn2 = 0.0;         // m^(-2/3)
    double distance = 0.0;    // m
    double waist = 0.0;       // m
};

struct TurbulenceParams {
    double w_over_r0 = 0.0;
    double outer_scale = 0.0;  // in waists; 0 selects pure Kolmogorov (infinite outer scale)
    std::optional<PhysicalPath> physical;

    TurbulenceParams() = default;
    TurbulenceParams(double w_over_r0_, double outer_scale_ = 0.0)  // NOLINT(google-explicit-constructor)
        : w_over_r0(w_over_r0_), outer_scale(outer_scale_) {}

    static TurbulenceParams from_physical(const PhysicalPath& path) {
        if (!(path.waist > 0.0)) {
            throw domain_error("waist must be positive");
        }
        TurbulenceParams p;
        p.w_over_r0 = path.waist / fried_parameter(path.wavelength, path.cn2, path.distance);
        p.physical = path;
        return p;
    }

    void validate() const {
        if (!(w_over_r0 >= 0.0) || !std::isfinite(w_over_r0)) {
            throw domain_error("w_over_r0 must be finite and non-negative");
        }
        if (!(outer_scale >= 0.0) || !std::isfinite(outer_scale)) {
            throw domain_error("outer scale must be finite and non-negative");
        }
    }
};

/// Mean-square phase difference at separation delta (waists).
inline double structure_function_theory(double delta, const TurbulenceParams& params) {
    return kolmogorov_coefficient * std::pow(delta * params.w_over_r0, 5.0 / 3.0);
}

/// <exp(i(phi(P) - phi(P')))> at chord separation delta (waists): exp(-D/2).
inline double coherence_at_separation(double delta, const TurbulenceParams& params) {
    return std::exp(-0.5 * structure_function_theory(delta, params));
}

/// Coherence between two points at radius r (waists) separated by angle dtheta.
inline double coherence(double r, double dtheta, const TurbulenceParams& params) {
    if (r < 0.0) {
        throw domain_error("radius must be non-negative");
    }
    if (params.w_over_r0 == 0.0 || dtheta == 0.0) {
        return 1.0;
    }
    const double s = std::abs(std::sin(0.5 * dtheta));
    return std::exp(-kolmogorov_coefficient * std::cbrt(4.0) * std::pow(r * params.w_over_r0 * s, 5.0 / 3.0));
}

/// w/r0 from long-exposure beam broadening: (1/3) sqrt((w_t/w)^2 - 1).
inline double fried_from_broadening(double w_t, double w) {
    if (!(w > 0.0) || !(w_t >= w)) {
        throw domain_error("need w_t >= w > 0");
    }
    // Extended-precision intermediate so that exact ratios such as
    // sqrt(10) : 1 invert to exactly 1 instead of one ulp above.
    const long double ratio = static_cast<long double>(w_t) / static_cast<long double>(w);
    return static_cast<double>(std::sqrt(ratio * ratio - 1.0L) / 3.0L);
}

struct PhaseScreen {
    GridSpec grid;
    std::vector<double> phase;  // radians, row-major like ScalarField
    std::uint64_t seed = 0;
    TurbulenceParams params;
};

namespace detail {

/// Phase power spectral density at spatial frequency f (cycles per waist)
/// for r0 = 1 waist. f0 = 1 / outer scale (0 for Kolmogorov).
inline double phase_psd_unit(double f2, double f0) {
    return 0.023 * std::pow(f2 + f0 * f0, -11.0 / 6.0);
}

/// Per-term standard deviations for unit r0. Terms are Re(c e^{2 pi i f.x})
/// with Re c, Im c ~ N(0, sigma^2).
struct ScreenSpectrum {
    std::vector<double> sigma;  // FFT bins; zero at DC
    struct Term {
        double fx;
        double fy;
        double sigma;
    };
    std::vector<Term> subharmonics;
    double tilt_sigma = 0.0;  // per-axis gradient std, rad per waist
};

// Integral of psd(f) |f|^2 over the square cell centred at (cx, cy) with side h,
// divided by |c|^2: the variance that reproduces the cell's quadratic
// (small-separation) contribution to the structure function.
inline double moment_matched_variance(double cx, double cy, double h, double f0) {
    const auto& rule = *gauss_legendre(16);
    double acc = 0.0;
    for (int a = 0; a < 16; ++a) {
        const double fx = cx + 0.5 * h * rule.nodes[a];
        for (int b = 0; b < 16; ++b) {
            const double fy = cy + 0.5 * h * rule.nodes[b];
            const double f2 = fx * fx + fy * fy;
            acc += rule.weights[a] * rule.weights[b] * phase_psd_unit(f2, f0) * f2;
        }
    }
    acc *= 0.25 * h * h;
    return acc / (cx * cx + cy * cy);
}

// Integral of psd(f) (2 pi fx)^2 over the square [-a, a]^2, in polar
// coordinates. The radial substitution f = rho t^3 removes the f^{-2/3}
// endpoint singularity of the Kolmogorov case.
inline double tilt_variance(double a, double f0) {
    const auto& rule = *gauss_legendre(32);
    double acc = 0.0;
    const double octant = 0.25 * std::numbers::pi;
    for (int o = 0; o < 8; ++o) {
        for (int q = 0; q < 32; ++q) {
            const double theta = octant * (o + 0.5 * (rule.nodes[q] + 1.0));
            const double c = std::cos(theta);
            const double rho = a / std::max(std::abs(c), std::abs(std::sin(theta)));
            double radial = 0.0;
            for (int k = 0; k < 32; ++k) {
                const double t = 0.5 * (rule.nodes[k] + 1.0);
                const double f = rho * t * t * t;
                const double jac = 3.0 * rho * t * t;
                radial += 0.5 * rule.weights[k] * phase_psd_unit(f * f, f0) * f * f * f * jac;
            }
            acc += 0.5 * octant * rule.weights[q] * c * c * radial;
        }
    }
    return 4.0 * std::numbers::pi * std::numbers::pi * acc;
}

inline constexpr int moment_matched_radius = 2;  // FFT cells with |i|,|j| <= 2
inline constexpr int subharmonic_levels = 3;

inline ScreenSpectrum build_screen_spectrum(const GridSpec& grid, double outer_scale) {
    const int n = grid.n;
    const double df = 1.0 / grid.extent;
    const double f0 = outer_scale > 0.0 ? 1.0 / outer_scale : 0.0;
    ScreenSpectrum s;
    s.sigma.assign(grid.size(), 0.0);
    for (int j = 0; j < n; ++j) {
        const int q = j < n / 2 ? j : j - n;
        for (int i = 0; i < n; ++i) {
            const int p = i < n / 2 ? i : i - n;
            if (p == 0 && q == 0) {
                continue;
            }
            double var = 0.0;
            if (std::abs(p) <= moment_matched_radius && std::abs(q) <= moment_matched_radius) {
                var = moment_matched_variance(p * df, q * df, df, f0);
            } else {
                const double fx = p * df;
                const double fy = q * df;
                var = phase_psd_unit(fx * fx + fy * fy, f0) * df * df;
            }
            s.sigma[static_cast<std::size_t>(j) * n + i] = std::sqrt(var);
        }
    }
    double h = df;
    for (int level = 1; level <= subharmonic_levels; ++level) {
        h /= 3.0;
        for (int q = -1; q <= 1; ++q) {
            for (int p = -1; p <= 1; ++p) {
                if (p == 0 && q == 0) {
                    continue;
                }
                s.subharmonics.push_back({p * h, q * h, std::sqrt(moment_matched_variance(p * h, q * h, h, f0))});
            }
        }
    }
    s.tilt_sigma = std::sqrt(tilt_variance(0.5 * h, f0));
    return s;
}

inline std::shared_ptr<const ScreenSpectrum> screen_spectrum(const GridSpec& grid, double outer_scale) {
    return memoize<std::tuple<int, double, double>, ScreenSpectrum>(
        std::make_tuple(grid.n, grid.extent, outer_scale),
        [&] { return build_screen_spectrum(grid, outer_scale); });
}

}  // namespace detail

/// Kolmogorov (or von Karman) phase screen by Fourier synthesis with three
/// levels of subharmonics and a residual random tilt, piston removed. Pure
/// function of (params, grid, seed).
inline PhaseScreen generate_screen(const TurbulenceParams& params, const GridSpec& grid, std::uint64_t seed) {
    params.validate();
    grid.validate();
    if (params.w_over_r0 > max_screen_strength) {
        throw range_error("w_over_r0 above the validated screen range");
    }
    PhaseScreen screen{grid, std::vector<double>(grid.size(), 0.0), seed, params};
    if (params.w_over_r0 == 0.0) {
        return screen;
    }
    const auto& spec = *detail::screen_spectrum(grid, params.outer_scale);
    const double scale = std::pow(params.w_over_r0, 5.0 / 6.0);
    const int n = grid.n;
    CounterRng rng(seed);

    std::vector<cplx> data(grid.size());
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto [a, b] = rng.normal_pair();
        data[k] = (scale * spec.sigma[k]) * cplx(a, b);
    }
    fft::transform_2d(data, n, fft::direction::backward);
    auto& phase = screen.phase;
    for (std::size_t k = 0; k < data.size(); ++k) {
        phase[k] = data[k].real();
    }

    std::vector<cplx> ex(n);
    std::vector<cplx> ey(n);
    for (const auto& term : spec.subharmonics) {
        const auto [a, b] = rng.normal_pair();
        const cplx c = (scale * term.sigma) * cplx(a, b);
        for (int i = 0; i < n; ++i) {
            const double x = grid.coord(i);
            ex[i] = c * std::polar(1.0, 2.0 * std::numbers::pi * term.fx * x);
            ey[i] = std::polar(1.0, 2.0 * std::numbers::pi * term.fy * x);
        }
        for (int j = 0; j < n; ++j) {
            double* row = &phase[static_cast<std::size_t>(j) * n];
            const cplx e = ey[j];
            for (int i = 0; i < n; ++i) {
                row[i] += ex[i].real() * e.real() - ex[i].imag() * e.imag();
            }
        }
    }

    const auto [gx, gy] = rng.normal_pair();
    const double tx = scale * spec.tilt_sigma * gx;
    const double ty = scale * spec.tilt_sigma * gy;
    CompensatedSum mean;
    for (int j = 0; j < n; ++j) {
        const double y = grid.coord(j);
        for (int i = 0; i < n; ++i) {
            double& v = phase[static_cast<std::size_t>(j) * n + i];
            v += tx * grid.coord(i) + ty * y;
            mean.add(v);
        }
    }
    const double piston = mean.value() / static_cast<double>(grid.size());
    for (auto& v : phase) {
        v -= piston;
    }
    return screen;
}

/// e^{i phi} at every pixel.
inline std::vector<cplx> screen_factor(const PhaseScreen& s) {
    std::vector<cplx> out(s.phase.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = std::polar(1.0, s.phase[k]);
    }
    return out;
}

inline ScalarField apply_screen(const ScalarField& f, const PhaseScreen& s) {
    require_same_grid(f.grid(), s.grid);
    const auto factor = screen_factor(s);
    return modulate<cplx>(f, factor);
}

/// The same screen multiplies both polarization components.
inline VectorField apply_screen(const VectorField& f, const PhaseScreen& s) {
    require_same_grid(f.grid(), s.grid);
    const auto factor = screen_factor(s);
    return {modulate<cplx>(f.right(), factor), modulate<cplx>(f.left(), factor)};
}

/// Pixel-pair directions used by the screen estimators.
enum class PairDirection { axes, x, y, diagonal };

inline constexpr std::size_t min_screens_for_statistics = 100;

struct SeparationEstimate {
    double requested = 0.0;
    double separation = 0.0;  // realised pair distance, waists
    EnsembleStats stats;
};

/// Accumulates per-screen pair averages of the squared phase difference and
/// of cos(phase difference) at integer-pixel offsets. Each screen contributes
/// one sample per separation; statistics are taken across screens.
class ScreenPairAccumulator {
public:
    ScreenPairAccumulator(const GridSpec& grid, std::span<const double> separations,
                          PairDirection direction = PairDirection::axes)
        : grid_(grid), direction_(direction) {
        grid.validate();
        const double step = direction == PairDirection::diagonal ? grid.pitch() * std::numbers::sqrt2 : grid.pitch();
        for (double d : separations) {
            const int s = static_cast<int>(std::lround(d / step));
            if (s < 1 || s >= grid.n) {
                throw range_error("separation not representable on the grid");
            }
            requested_.push_back(d);
            offsets_.push_back(s);
            actual_.push_back(s * step);
        }
        structure_.resize(offsets_.size());
        coherence_.resize(offsets_.size());
    }

    void add(const PhaseScreen& screen) {
        require_same_grid(grid_, screen.grid);
        if (count_ == 0) {
            params_ = screen.params;
        } else if (screen.params.w_over_r0 != params_.w_over_r0 || screen.params.outer_scale != params_.outer_scale) {
            throw domain_error("screens must share turbulence parameters");
        }
        ++count_;
        const int n = grid_.n;
        const auto& ph = screen.phase;
        std::vector<double> c(ph.size());
        std::vector<double> s(ph.size());
        for (std::size_t k = 0; k < ph.size(); ++k) {
            c[k] = std::cos(ph[k]);
            s[k] = std::sin(ph[k]);
        }
        for (std::size_t q = 0; q < offsets_.size(); ++q) {
            const int off = offsets_[q];
            double d2 = 0.0;
            double coh = 0.0;
            std::size_t pairs = 0;
            auto visit = [&](int di, int dj) {
                for (int j = 0; j + dj < n; ++j) {
                    for (int i = 0; i + di < n; ++i) {
                        const std::size_t a = static_cast<std::size_t>(j) * n + i;
                        const std::size_t b = static_cast<std::size_t>(j + dj) * n + i + di;
                        const double diff = ph[a] - ph[b];
                        d2 += diff * diff;
                        coh += c[a] * c[b] + s[a] * s[b];
                    }
                }
                pairs += static_cast<std::size_t>(n - di) * (n - dj);
            };
            switch (direction_) {
                case PairDirection::axes: visit(off, 0); visit(0, off); break;
                case PairDirection::x: visit(off, 0); break;
                case PairDirection::y: visit(0, off); break;
                case PairDirection::diagonal: visit(off, off); break;
            }
            structure_[q].push_back(d2 / static_cast<double>(pairs));
            coherence_[q].push_back(coh / static_cast<double>(pairs));
        }
    }

    [[nodiscard]] std::size_t count() const noexcept { return count_; }

    [[nodiscard]] std::vector<SeparationEstimate> structure_function() const { return finish(structure_); }
    [[nodiscard]] std::vector<SeparationEstimate> coherence() const { return finish(coherence_); }

private:
    std::vector<SeparationEstimate> finish(const std::vector<std::vector<double>>& samples) const {
        if (count_ < min_screens_for_statistics) {
            throw statistics_error("at least 100 screens are required");
        }
        std::vector<SeparationEstimate> out;
        for (std::size_t q = 0; q < offsets_.size(); ++q) {
            out.push_back({requested_[q], actual_[q], EnsembleStats::of(samples[q])});
        }
        return out;
    }

    GridSpec grid_;
    PairDirection direction_;
    std::vector<double> requested_;
    std::vector<int> offsets_;
    std::vector<double> actual_;
    std::vector<std::vector<double>> structure_;
    std::vector<std::vector<double>> coherence_;
    std::size_t count_ = 0;
    TurbulenceParams params_;
};

/// Empirical structure function over a list of screens.
inline std::vector<SeparationEstimate> structure_function_estimate(std::span<const PhaseScreen> screens,
                                                                   std::span<const double> separations,
                                                                   PairDirection direction = PairDirection::axes) {
    if (screens.size() < min_screens_for_statistics) {
        throw statistics_error("at least 100 screens are required");
    }
    ScreenPairAccumulator acc(screens.front().grid, separations, direction);
    for (const auto& s : screens) {
        acc.add(s);
    }
    return acc.structure_function();
}

struct BroadeningResult {
    double w_t_over_w = 0.0;
    double std_error = 0.0;
};

/// Long-exposure width of a unit-waist Gaussian after a screen and free
/// propagation, from the second moment of the realization-averaged intensity
/// about the axis. The standard error follows from the per-realization
/// second moments by the delta method.
inline BroadeningResult beam_broadening_mc(const TurbulenceParams& params, int n_realizations,
                                           double propagation_distance, double wavelength, std::uint64_t seed,
                                           const GridSpec& grid, int workers = 1) {
    if (n_realizations < static_cast<int>(min_screens_for_statistics)) {
        throw statistics_error("at least 100 realizations are required");
    }
    const ScalarField gaussian = make_lg_mode({0}, grid);
    std::vector<double> r2(static_cast<std::size_t>(n_realizations));
    std::vector<double> rr(grid.size());
    for (int j = 0; j < grid.n; ++j) {
        for (int i = 0; i < grid.n; ++i) {
            rr[static_cast<std::size_t>(j) * grid.n + i] = grid.coord(i) * grid.coord(i) + grid.coord(j) * grid.coord(j);
        }
    }
    parallel_for(r2.size(), workers, [&](std::size_t k) {
        const auto screen = generate_screen(params, grid, stream_key(seed, 0, k));
        const auto out = propagate(apply_screen(gaussian, screen), propagation_distance, wavelength);
        double m0 = 0.0;
        double m2 = 0.0;
        auto v = out.samples();
        for (std::size_t p = 0; p < v.size(); ++p) {
            const double e = std::norm(v[p]);
            m0 += e;
            m2 += e * rr[p];
        }
        r2[k] = m2 / m0;
    });
    const auto st = EnsembleStats::of(r2);
    const double w = std::sqrt(2.0 * st.mean);
    return {w, st.std_error / w};
}

}  // namespace hoam
