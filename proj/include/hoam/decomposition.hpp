#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <tuple>
#include <vector>

#include "hoam/cache.hpp"
#include "hoam/errors.hpp"
#include "hoam/fft.hpp"
#include "hoam/fields.hpp"
#include "hoam/quadrature.hpp"

namespace hoam {

/// Polar quadrature on a square lattice: Gauss-Legendre radii on [0, r_max]
/// and equispaced angles. r_max keeps every 6 x 6 interpolation stencil
/// inside the lattice.
struct PolarSampler {
    int n = 0;            // lattice points per side
    double pitch = 0.0;   // lattice spacing
    int n_radial = 0;
    int n_angular = 0;
    double r_max = 0.0;
    std::vector<double> radius;
    std::vector<double> weight;  // radial quadrature weight (dr)

    PolarSampler(int n_, double pitch_, int n_radial_, int n_angular_)
        : n(n_), pitch(pitch_), n_radial(n_radial_), n_angular(n_angular_), r_max((0.5 * n_ - 3.0) * pitch_) {
        const GaussRule rule = gauss_legendre(n_radial, 0.0, r_max);
        radius = rule.nodes;
        weight = rule.weights;
    }

    /// Visits the 36 (pixel, weight) pairs of the Lagrange stencil at node (k, m).
    template <typename Fn>
    void stencil(int k, int m, Fn&& fn) const {
        const double theta = 2.0 * std::numbers::pi * m / n_angular;
        const double centre = 0.5 * (n - 1);
        const double u = radius[k] * std::cos(theta) / pitch + centre;
        const double v = radius[k] * std::sin(theta) / pitch + centre;
        const int i0 = static_cast<int>(std::floor(u)) - 2;
        const int j0 = static_cast<int>(std::floor(v)) - 2;
        const auto wx = lagrange6(u - i0);
        const auto wy = lagrange6(v - j0);
        for (int b = 0; b < 6; ++b) {
            for (int a = 0; a < 6; ++a) {
                fn(static_cast<std::size_t>(j0 + b) * n + i0 + a, wy[b] * wx[a]);
            }
        }
    }

    static std::array<double, 6> lagrange6(double t) {
        std::array<double, 6> w{};
        for (int a = 0; a < 6; ++a) {
            double p = 1.0;
            for (int b = 0; b < 6; ++b) {
                if (b != a) {
                    p *= (t - b) / static_cast<double>(a - b);
                }
            }
            w[a] = p;
        }
        return w;
    }
};

/// Sparse linear functional per radial node: A_k = sum_e weight[e] * f[pixel[e]]
/// is the angular mean of e^{-i m theta} times the interpolated field on ring k.
struct RingOperator {
    int m = 0;
    std::vector<std::size_t> start;
    std::vector<std::uint32_t> pixel;
    std::vector<cplx> weight;
};

namespace detail {

inline RingOperator build_ring_operator(const PolarSampler& s, int m) {
    const int M = s.n_angular;
    RingOperator op;
    op.m = m;
    const std::size_t size = static_cast<std::size_t>(s.n) * s.n;
    std::vector<cplx> dense(size);
    std::vector<char> seen(size, 0);
    std::vector<std::uint32_t> touched;
    std::vector<cplx> phase(M);
    for (int q = 0; q < M; ++q) {
        const long long turn = ((static_cast<long long>(m) * q) % M + M) % M;
        phase[q] = std::polar(1.0 / M, -2.0 * std::numbers::pi * static_cast<double>(turn) / M);
    }
    op.start.push_back(0);
    for (int k = 0; k < s.n_radial; ++k) {
        touched.clear();
        for (int q = 0; q < M; ++q) {
            s.stencil(k, q, [&](std::size_t p, double w) {
                if (!seen[p]) {
                    seen[p] = 1;
                    touched.push_back(static_cast<std::uint32_t>(p));
                }
                dense[p] += w * phase[q];
            });
        }
        std::sort(touched.begin(), touched.end());
        for (auto p : touched) {
            op.pixel.push_back(p);
            op.weight.push_back(dense[p]);
            dense[p] = 0.0;
            seen[p] = 0;
        }
        op.start.push_back(op.pixel.size());
    }
    return op;
}

}  // namespace detail

/// Real-space sampler of a grid: n/2 radii on [0, (n/2 - 3) pitch], 4n angles.
inline std::shared_ptr<const PolarSampler> polar_sampler(const GridSpec& grid) {
    grid.validate();
    return detail::memoize<std::tuple<int, double>, PolarSampler>(
        std::make_tuple(grid.n, grid.extent),
        [&] { return PolarSampler(grid.n, grid.pitch(), grid.n / 2, 4 * grid.n); });
}

/// Cached ring operator for charge m on a grid.
inline std::shared_ptr<const RingOperator> ring_operator(const GridSpec& grid, int m) {
    auto sampler = polar_sampler(grid);
    return detail::memoize<std::tuple<int, double, int>, RingOperator>(
        std::make_tuple(grid.n, grid.extent, m), [&] { return detail::build_ring_operator(*sampler, m); });
}

/// Azimuthal Fourier coefficient c_m(r_k) = (2 pi)^{-1/2} int f e^{-i m theta} dtheta
/// at the real-space sampler's radial nodes, so that the power in charge m is
/// sum_k weight_k r_k |c_m(r_k)|^2. Costs one sparse pass over the field.
inline std::vector<cplx> oam_component_profile(const ScalarField& f, int m) {
    const auto& op = *ring_operator(f.grid(), m);
    auto data = f.samples();
    const double scale = std::sqrt(2.0 * std::numbers::pi);
    const std::size_t rings = op.start.size() - 1;
    std::vector<cplx> out(rings);
    for (std::size_t k = 0; k < rings; ++k) {
        cplx acc{};
        for (std::size_t e = op.start[k]; e < op.start[k + 1]; ++e) {
            acc += op.weight[e] * data[op.pixel[e]];
        }
        out[k] = scale * acc;
    }
    return out;
}

/// sum_k weight_k r_k |c(r_k)|^2 for a profile from oam_component_profile.
inline double profile_power(const GridSpec& grid, std::span<const cplx> profile) {
    const auto& s = *polar_sampler(grid);
    if (profile.size() != static_cast<std::size_t>(s.n_radial)) {
        throw shape_error("profile length does not match the radial nodes");
    }
    double acc = 0.0;
    for (int k = 0; k < s.n_radial; ++k) {
        acc += s.weight[k] * s.radius[k] * std::norm(profile[k]);
    }
    return acc;
}

/// Power carried by the e^{i m theta} component inside the real-space sampler's
/// radius. Interpolation slightly attenuates content near the grid Nyquist
/// frequency; oam_power_spectrum is the energy-exact reference.
inline double oam_component_power(const ScalarField& f, int m) {
    return profile_power(f.grid(), oam_component_profile(f, m));
}

/// OAM power spectrum plus the energy left outside the resolved polar domain.
struct OamDecomposition {
    std::map<int, double> power;
    double remainder = 0.0;
};

inline constexpr int spectral_padding = 6;

/// Decomposition in the spatial-frequency plane. The field's transform is
/// sampled finely by zero padding (the field is compact, so its transform is
/// smooth and interpolates accurately), resampled on polar nodes and split by
/// an angular DFT. Each charge keeps its power under the Fourier transform
/// (the order-l Hankel transform is unitary), so sum_l power_l + remainder
/// reproduces norm2(f) up to interpolation error. The remainder is the
/// spectral energy beyond the largest resolved radius, i.e. near the grid's
/// Nyquist corners.
inline OamDecomposition oam_decomposition(const ScalarField& f, int l_min, int l_max) {
    if (l_min > l_max) {
        throw range_error("l_min must not exceed l_max");
    }
    const GridSpec& g = f.grid();
    const int n = g.n;
    const int N = spectral_padding * n;
    const int M = N / 2;
    if (l_min <= -M / 2 || l_max >= M / 2) {
        throw range_error("requested charges exceed the angular sampling");
    }
    // F(k) = pitch^2 / (2 pi) * sum_x f(x) e^{-i k.x} on the centred, half-offset
    // k lattice, so that sum |F|^2 dk^2 = norm2(f).
    const double c = 0.5 * (N - 1);
    std::vector<cplx> shift(N);
    for (int i = 0; i < N; ++i) {
        const double turns = std::fmod(c * i, static_cast<double>(N));
        shift[i] = std::polar(1.0, 2.0 * std::numbers::pi * turns / N);
    }
    std::vector<cplx> F(static_cast<std::size_t>(N) * N);
    const int o = (N - n) / 2;
    auto data = f.samples();
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            F[static_cast<std::size_t>(j + o) * N + i + o] =
                data[static_cast<std::size_t>(j) * n + i] * shift[i + o] * shift[j + o];
        }
    }
    fft::transform_2d(F, N, fft::direction::forward);
    const double scale = g.pitch() * g.pitch() / (2.0 * std::numbers::pi);
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) {
            F[static_cast<std::size_t>(j) * N + i] *= scale * shift[i] * shift[j];
        }
    }
    const double dk = 2.0 * std::numbers::pi / (N * g.pitch());
    const PolarSampler s(N, dk, N / 4, M);

    std::vector<cplx> samples(static_cast<std::size_t>(s.n_radial) * M);
    for (int k = 0; k < s.n_radial; ++k) {
        for (int m = 0; m < M; ++m) {
            cplx acc{};
            s.stencil(k, m, [&](std::size_t p, double w) { acc += w * F[p]; });
            samples[static_cast<std::size_t>(k) * M + m] = acc;
        }
    }
    fft::transform_batch(samples, M, s.n_radial, fft::direction::forward);

    OamDecomposition out;
    const double norm = 2.0 * std::numbers::pi / (static_cast<double>(M) * M);
    for (int l = l_min; l <= l_max; ++l) {
        const int bin = ((l % M) + M) % M;
        double acc = 0.0;
        for (int k = 0; k < s.n_radial; ++k) {
            acc += s.weight[k] * s.radius[k] * std::norm(samples[static_cast<std::size_t>(k) * M + bin]);
        }
        out.power.emplace(l, acc * norm);
    }
    double rem = 0.0;
    for (int j = 0; j < N; ++j) {
        const double ky = (j - c) * dk;
        for (int i = 0; i < N; ++i) {
            const double kx = (i - c) * dk;
            if (std::hypot(kx, ky) > s.r_max) {
                rem += std::norm(F[static_cast<std::size_t>(j) * N + i]);
            }
        }
    }
    out.remainder = rem * dk * dk;
    return out;
}

/// Power per OAM charge l in [l_min, l_max], power_l = int |c_l(r)|^2 r dr.
inline std::map<int, double> oam_power_spectrum(const ScalarField& f, int l_min, int l_max) {
    return oam_decomposition(f, l_min, l_max).power;
}

/// Largest |l| that oam_power_spectrum resolves on a grid.
inline int max_resolved_charge(const GridSpec& grid) { return spectral_padding * grid.n / 4 - 1; }

/// Energy not assigned to any charge by oam_power_spectrum.
inline double radial_truncation_remainder(const ScalarField& f) { return oam_decomposition(f, 0, 0).remainder; }

}  // namespace hoam
