#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "hoam/decomposition.hpp"
#include "hoam/elements.hpp"
#include "hoam/errors.hpp"
#include "hoam/parallel.hpp"
#include "hoam/rng.hpp"
#include "hoam/stats.hpp"
#include "hoam/turbulence.hpp"

namespace hoam {

inline constexpr double loss_threshold = 1e-12;

struct ExperimentConfig {
    std::vector<double> strengths{0.6};
    std::vector<HybridQubit> states = mub_states(1);
    std::vector<std::string> labels{mub_labels().begin(), mub_labels().end()};
    int n_realizations = 500;
    std::uint64_t master_seed = 1;
    GridSpec grid = default_grid;
    std::vector<double> angles;
    double outer_scale = 0.0;
    int workers = 1;

    void validate() const {
        grid.validate();
        if (n_realizations < 1) {
            throw range_error("need at least one realization");
        }
        if (strengths.empty()) {
            throw range_error("strength list is empty");
        }
        for (double a : strengths) {
            TurbulenceParams{a, outer_scale}.validate();
        }
        if (states.empty()) {
            throw range_error("state list is empty");
        }
        if (labels.size() != states.size()) {
            throw shape_error("one label per state is required");
        }
        for (const auto& q : states) {
            q.validate();
            if (q.l != states.front().l) {
                throw range_error("all states must share one charge");
            }
        }
    }

    [[nodiscard]] int charge() const { return states.front().l; }
};

/// Seed of the screen for realization k at strength index s. States and
/// rotation angles within a cell see the same screens.
inline std::uint64_t screen_seed(std::uint64_t master, std::size_t strength_index, std::size_t realization) {
    return stream_key(master, strength_index, realization);
}

/// Decoded charge-0 profiles of the two hybrid basis states through one
/// channel realization. Every step after state preparation is linear, so a
/// qubit alpha|0> + beta|1> decodes to alpha * basis0 + beta * basis1.
struct DecodeBasis {
    GridSpec grid;
    std::array<std::vector<cplx>, 2> right;  // indexed by basis state
    std::array<std::vector<cplx>, 2> left;
    std::array<std::array<cplx, 2>, 2> fiber{};  // [basis][R/L]

    [[nodiscard]] DecodeResult decode(const HybridQubit& q) const {
        const std::size_t m = right[0].size();
        std::vector<cplx> pr(m);
        std::vector<cplx> pl(m);
        for (std::size_t k = 0; k < m; ++k) {
            pr[k] = q.alpha * right[0][k] + q.beta * right[1][k];
            pl[k] = q.alpha * left[0][k] + q.beta * left[1][k];
        }
        DecodeResult out = reduce_profiles(grid, pr, pl);
        out.fiber = {q.alpha * fiber[0][0] + q.beta * fiber[1][0], q.alpha * fiber[0][1] + q.beta * fiber[1][1]};
        return out;
    }
};

namespace detail {

inline std::array<VectorField, 2> transmitted_basis(const PhaseScreen& screen, int l) {
    const auto& grid = screen.grid;
    const auto encoded = memoize<std::tuple<int, double, int>, std::array<VectorField, 2>>(
        std::make_tuple(grid.n, grid.extent, l), [&] {
            return std::array<VectorField, 2>{encode({1.0, 0.0, l}, grid), encode({0.0, 1.0, l}, grid)};
        });
    return {apply_screen((*encoded)[0], screen), apply_screen((*encoded)[1], screen)};
}

// Charge-0 profile, skipping the sparse pass for an identically zero component.
inline std::vector<cplx> charge0_profile(const ScalarField& f) {
    const auto v = f.samples();
    if (std::all_of(v.begin(), v.end(), [](const cplx& z) { return z == cplx{}; })) {
        return std::vector<cplx>(static_cast<std::size_t>(polar_sampler(f.grid())->n_radial));
    }
    return oam_component_profile(f, 0);
}

inline DecodeBasis decode_basis_fields(const std::array<VectorField, 2>& fields, int l) {
    DecodeBasis out;
    out.grid = fields[0].grid();
    const auto& ref = *radial_reference(out.grid, l);
    for (int b = 0; b < 2; ++b) {
        const VectorField g = decode_optics(fields[b], l);
        out.right[b] = charge0_profile(g.right());
        out.left[b] = charge0_profile(g.left());
        out.fiber[b] = {overlap(ref, g.right()), overlap(ref, g.left())};
    }
    return out;
}

}  // namespace detail

/// Screen, optional frame rotation, then the decoder for both basis states.
inline DecodeBasis decode_basis(const PhaseScreen& screen, int l, double theta = 0.0) {
    auto fields = detail::transmitted_basis(screen, l);
    if (theta != 0.0) {
        fields = {rotate_frame(fields[0], theta), rotate_frame(fields[1], theta)};
    }
    return detail::decode_basis_fields(fields, l);
}

/// Per-cell summary: fidelity over accepted realizations, success
/// probability over all of them.
struct CellResult {
    double w_over_r0 = 0.0;
    double theta = 0.0;
    std::size_t state = 0;
    std::string label;
    EnsembleStats fidelity;
    EnsembleStats success_prob;
    EnsembleStats fiber_prob;
    std::size_t accepted = 0;
    std::size_t losses = 0;
    double min_purity = 1.0;

    [[nodiscard]] double loss_rate() const {
        return static_cast<double>(losses) / static_cast<double>(accepted + losses);
    }
};

namespace detail {

struct RealizationRecord {
    double fidelity = 0.0;
    double success = 0.0;
    double fiber = 0.0;
    double purity = 1.0;
    bool lost = false;
};

inline std::vector<CellResult> summarize(const ExperimentConfig& cfg, double a, double theta,
                                         const std::vector<std::vector<RealizationRecord>>& rec) {
    std::vector<CellResult> out;
    for (std::size_t q = 0; q < cfg.states.size(); ++q) {
        CellResult cell;
        cell.w_over_r0 = a;
        cell.theta = theta;
        cell.state = q;
        cell.label = cfg.labels[q];
        std::vector<double> fid;
        std::vector<double> succ;
        std::vector<double> fib;
        for (const auto& per_state : rec) {
            const auto& r = per_state[q];
            succ.push_back(r.success);
            fib.push_back(r.fiber);
            if (r.lost) {
                ++cell.losses;
            } else {
                ++cell.accepted;
                fid.push_back(r.fidelity);
                cell.min_purity = std::min(cell.min_purity, r.purity);
            }
        }
        cell.fidelity = EnsembleStats::of(fid);
        cell.success_prob = EnsembleStats::of(succ);
        cell.fiber_prob = EnsembleStats::of(fib);
        out.push_back(std::move(cell));
    }
    return out;
}

inline std::vector<RealizationRecord> evaluate_states(const DecodeBasis& basis, const ExperimentConfig& cfg) {
    std::vector<RealizationRecord> out;
    for (const auto& q : cfg.states) {
        const DecodeResult r = basis.decode(q);
        RealizationRecord rec;
        rec.success = r.success_prob;
        rec.fiber = std::norm(r.fiber[0]) + std::norm(r.fiber[1]);
        rec.purity = r.purity;
        rec.lost = r.success_prob < loss_threshold;
        if (!rec.lost) {
            rec.fidelity = fidelity(r.recovered, q);
        }
        out.push_back(rec);
    }
    return out;
}

}  // namespace detail

/// Fidelity and success probability per (strength, state), rows ordered by
/// strength then state.
inline std::vector<CellResult> run_fidelity_scan(const ExperimentConfig& cfg) {
    cfg.validate();
    const int l = cfg.charge();
    std::vector<CellResult> out;
    for (std::size_t s = 0; s < cfg.strengths.size(); ++s) {
        const TurbulenceParams params{cfg.strengths[s], cfg.outer_scale};
        std::vector<std::vector<detail::RealizationRecord>> rec(cfg.n_realizations);
        parallel_for(rec.size(), cfg.workers, [&](std::size_t k) {
            const auto screen = generate_screen(params, cfg.grid, screen_seed(cfg.master_seed, s, k));
            rec[k] = detail::evaluate_states(decode_basis(screen, l), cfg);
        });
        for (auto& cell : detail::summarize(cfg, cfg.strengths[s], 0.0, rec)) {
            out.push_back(std::move(cell));
        }
    }
    return out;
}

/// Same pipeline with rotate_frame(theta) between the screen and the
/// decoder. Rows ordered by strength, angle, state.
inline std::vector<CellResult> run_rotation_scan(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.angles.empty()) {
        throw range_error("rotation scan needs at least one angle");
    }
    const int l = cfg.charge();
    std::vector<CellResult> out;
    for (std::size_t s = 0; s < cfg.strengths.size(); ++s) {
        const TurbulenceParams params{cfg.strengths[s], cfg.outer_scale};
        const std::size_t n_angles = cfg.angles.size();
        // rec[angle][realization][state]
        std::vector<std::vector<std::vector<detail::RealizationRecord>>> rec(
            n_angles, std::vector<std::vector<detail::RealizationRecord>>(cfg.n_realizations));
        parallel_for(static_cast<std::size_t>(cfg.n_realizations), cfg.workers, [&](std::size_t k) {
            const auto screen = generate_screen(params, cfg.grid, screen_seed(cfg.master_seed, s, k));
            const auto fields = detail::transmitted_basis(screen, l);
            for (std::size_t t = 0; t < n_angles; ++t) {
                const std::array<VectorField, 2> rotated = {rotate_frame(fields[0], cfg.angles[t]),
                                                            rotate_frame(fields[1], cfg.angles[t])};
                rec[t][k] = detail::evaluate_states(detail::decode_basis_fields(rotated, l), cfg);
            }
        });
        for (std::size_t t = 0; t < n_angles; ++t) {
            for (auto& cell : detail::summarize(cfg, cfg.strengths[s], cfg.angles[t], rec[t])) {
                out.push_back(std::move(cell));
            }
        }
    }
    return out;
}

/// n angles evenly spaced on [0, 2 pi).
inline std::vector<double> preset_angles(int n = 16) {
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) {
        out[k] = 2.0 * std::numbers::pi * k / n;
    }
    return out;
}

/// Ensemble estimates of the coupling coefficients. c0 is the power that
/// psi_l keeps in charge l and c2l the power it moves to -l, i.e. the
/// charge-resolved matrix elements integrated over the radial coordinate.
struct CoefficientEstimate {
    EnsembleStats c0;
    EnsembleStats c2l;
    EnsembleStats c2l_mirror;      // power psi_{-l} moves to +l
    EnsembleStats c2l_difference;  // paired c2l - c2l_mirror
    EnsembleStats projection;      // |<LG_l | psi_l>|^2 onto the fixed mode
    double mirror_max_deviation = 0.0;  // max |<l|psi_l> - <-l|psi_{-l}>|
};

inline CoefficientEstimate run_coefficient_estimate(int l, const TurbulenceParams& params, int n,
                                                    std::uint64_t master_seed, const GridSpec& grid, int workers = 1) {
    if (n < static_cast<int>(min_screens_for_statistics)) {
        throw statistics_error("at least 100 realizations are required");
    }
    params.validate();
    const ScalarField plus = make_lg_mode({l}, grid);
    const ScalarField minus = make_lg_mode({-l}, grid);
    std::vector<double> c0(n);
    std::vector<double> c2l(n);
    std::vector<double> mirror(n);
    std::vector<double> diff(n);
    std::vector<double> proj(n);
    std::vector<double> dev(n);
    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t k) {
        const auto screen = generate_screen(params, grid, screen_seed(master_seed, 0, k));
        const ScalarField psi_plus = apply_screen(plus, screen);
        const ScalarField psi_minus = apply_screen(minus, screen);
        c0[k] = oam_component_power(psi_plus, l);
        c2l[k] = oam_component_power(psi_plus, -l);
        mirror[k] = oam_component_power(psi_minus, l);
        diff[k] = c2l[k] - mirror[k];
        const cplx a = overlap(plus, psi_plus);
        const cplx b = overlap(minus, psi_minus);
        proj[k] = std::norm(a);
        dev[k] = std::abs(a - b);
    });
    CoefficientEstimate out;
    out.c0 = EnsembleStats::of(c0);
    out.c2l = EnsembleStats::of(c2l);
    out.c2l_mirror = EnsembleStats::of(mirror);
    out.c2l_difference = EnsembleStats::of(diff);
    out.projection = EnsembleStats::of(proj);
    out.mirror_max_deviation = *std::max_element(dev.begin(), dev.end());
    return out;
}

}  // namespace hoam
