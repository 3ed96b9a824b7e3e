// Command-line front end: P_h curve, fidelity and rotation scans, screen
// validation and broadening calibration. Every run writes plot-ready CSV, a
// JSON summary and a run_manifest.json that replays it via --config.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hoam/analytic.hpp"
#include "hoam/montecarlo.hpp"
#include "hoam/screen_io.hpp"
#include "hoam/turbulence.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hoam;

namespace {

constexpr const char* artifact_version = "1.0.0";

enum exit_code { ok = 0, usage = 1, failure = 2 };

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- config

json preset_strength_list() { return preset_strengths(); }

json defaults_for(const std::string& cmd) {
    json c = {{"seed", 1}, {"grid_n", 256}, {"grid_extent", 8.0}, {"l", 1}};
    if (cmd == "ph-curve") {
        c["strengths"] = preset_strength_list();
        c["realizations"] = 500;
    } else if (cmd == "fidelity-scan") {
        c["strengths"] = preset_strength_list();
        c["realizations"] = 500;
    } else if (cmd == "rotation-scan") {
        c["strengths"] = json::array({0.6});
        c["realizations"] = 100;
        c["n_angles"] = 16;
    } else if (cmd == "screen-validate") {
        c["w_over_r0"] = 1.0;
        c["realizations"] = 2000;
        c["separations_r0"] = json::array({0.2, 0.3, 0.5, 0.7, 1.0, 1.4, 2.0});
        c["export_screen"] = false;
    } else if (cmd == "calibrate") {
        c["grid_extent"] = 32.0;
        c["strengths"] = json::array({0.0, 0.2, 0.6, 1.0, 1.4});
        c["realizations"] = 200;
        c["distance_rayleigh"] = 0.25;
        c["wavelength"] = 0.05;
        c["physical"] = nullptr;
    }
    return c;
}

// Overrides known keys of `base` with `over`, keeping each key's JSON type.
void merge_config(json& base, const json& over, const std::string& origin) {
    if (!over.is_object()) {
        throw usage_error(origin + ": configuration must be a JSON object");
    }
    for (const auto& [key, value] : over.items()) {
        if (!base.contains(key)) {
            throw usage_error(origin + ": unknown key '" + key + "'");
        }
        const json& current = base[key];
        const bool compatible = current.is_null() || value.is_null() ||
                                (current.is_number() && value.is_number()) ||
                                current.type() == value.type();
        if (!compatible) {
            throw usage_error(origin + ": key '" + key + "' has the wrong type");
        }
        if (current.is_number_integer() && !value.is_number_integer()) {
            throw usage_error(origin + ": key '" + key + "' must be an integer");
        }
        base[key] = value;
    }
}

json load_config_file(const std::string& path, const std::string& cmd) {
    std::ifstream in(path);
    if (!in) {
        throw usage_error("cannot read config file " + path);
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw usage_error("config file " + path + " is not valid JSON: " + e.what());
    }
    // A run manifest carries the resolved config under "config".
    if (doc.is_object() && doc.contains("subcommand") && doc.contains("config")) {
        if (doc["subcommand"] != cmd) {
            throw usage_error("manifest " + path + " belongs to '" + doc["subcommand"].get<std::string>() + "'");
        }
        return doc["config"];
    }
    return doc;
}

GridSpec grid_of(const json& c) { return {c["grid_n"].get<int>(), c["grid_extent"].get<double>()}; }

std::vector<double> doubles(const json& v, const std::string& key) {
    try {
        return v.get<std::vector<double>>();
    } catch (const json::exception&) {
        throw usage_error("'" + key + "' must be a list of numbers");
    }
}

void validate_common(const json& c) {
    grid_of(c).validate();
    if (c["realizations"].get<long long>() < 1) {
        throw usage_error("realizations must be at least 1");
    }
    const int l = c["l"].get<int>();
    if (l < 1 || l > max_supported_l) {
        throw usage_error("l must be in [1, " + std::to_string(max_supported_l) + "]");
    }
    if (c.contains("strengths")) {
        const auto s = doubles(c["strengths"], "strengths");
        if (s.empty()) {
            throw usage_error("strength list is empty");
        }
        for (double a : s) {
            if (!(a >= 0.0) || a > max_screen_strength) {
                throw usage_error("strengths must lie in [0, " + std::to_string(max_screen_strength) + "]");
            }
        }
    }
}

// ---------------------------------------------------------------- output

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : fp_(std::fopen(path.c_str(), "wb")) {
        if (fp_ == nullptr) {
            throw std::runtime_error("cannot write " + path.string());
        }
        for (std::size_t k = 0; k < header.size(); ++k) {
            std::fprintf(fp_, k == 0 ? "%s" : ",%s", header[k].c_str());
        }
        std::fputc('\n', fp_);
    }
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;
    ~CsvWriter() { std::fclose(fp_); }

    CsvWriter& num(double v) {
        sep();
        std::fprintf(fp_, "%.12g", v);
        return *this;
    }
    CsvWriter& num(std::size_t v) {
        sep();
        std::fprintf(fp_, "%zu", v);
        return *this;
    }
    CsvWriter& str(const std::string& v) {
        sep();
        std::fputs(v.c_str(), fp_);
        return *this;
    }
    void end() {
        std::fputc('\n', fp_);
        first_ = true;
    }

private:
    void sep() {
        if (!first_) {
            std::fputc(',', fp_);
        }
        first_ = false;
    }
    std::FILE* fp_;
    bool first_ = true;
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

json stats_json(const EnsembleStats& s) {
    return {{"mean", s.mean}, {"stderr", s.std_error}, {"n", s.n}, {"min", s.min}, {"max", s.max}};
}

// Population mean and standard deviation of a list.
std::pair<double, double> mean_and_spread(const std::vector<double>& v) {
    const auto s = EnsembleStats::of(v);
    return {s.mean, s.std_error * std::sqrt(static_cast<double>(s.n))};
}

// ---------------------------------------------------------------- commands

struct RunContext {
    json config;
    fs::path out_dir;
    int workers = 1;
};

ExperimentConfig experiment_of(const RunContext& ctx) {
    const json& c = ctx.config;
    ExperimentConfig cfg;
    cfg.strengths = doubles(c["strengths"], "strengths");
    cfg.states = mub_states(c["l"].get<int>());
    cfg.n_realizations = c["realizations"].get<int>();
    cfg.master_seed = c["seed"].get<std::uint64_t>();
    cfg.grid = grid_of(c);
    cfg.workers = ctx.workers;
    return cfg;
}

int cmd_ph_curve(const RunContext& ctx) {
    const int l = ctx.config["l"].get<int>();
    auto cfg = experiment_of(ctx);
    cfg.states = {cfg.states.front()};
    cfg.labels = {mub_labels().front()};
    std::vector<TurbulenceParams> params(cfg.strengths.begin(), cfg.strengths.end());
    const auto curve = ph_curve(params, l);
    std::sort(cfg.strengths.begin(), cfg.strengths.end());
    const auto mc = run_fidelity_scan(cfg);

    CsvWriter csv(ctx.out_dir / "ph_curve.csv",
                  {"w_over_r0", "ph_analytic", "ph_mc_mean", "ph_mc_stderr", "ph_analytic_full_angle", "fiber_mc_mean"});
    json rows = json::array();
    double worst = 0.0;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        const auto& p = curve[k];
        const auto& m = mc[k];
        csv.num(p.w_over_r0).num(p.ph).num(m.success_prob.mean).num(m.success_prob.std_error).num(p.ph_full_angle)
            .num(m.fiber_prob.mean);
        csv.end();
        const double rel = p.ph > 0.0 ? std::abs(m.success_prob.mean - p.ph) / p.ph : 0.0;
        worst = std::max(worst, rel);
        rows.push_back({{"w_over_r0", p.w_over_r0}, {"ph_analytic", p.ph}, {"ph_mc", stats_json(m.success_prob)},
                        {"relative_deviation", rel}});
    }
    write_json(ctx.out_dir / "summary.json", {{"subcommand", "ph-curve"},
                                              {"config", ctx.config},
                                              {"rows", rows},
                                              {"max_relative_deviation", worst}});
    return ok;
}

int cmd_fidelity_scan(const RunContext& ctx) {
    auto cfg = experiment_of(ctx);
    const auto rows = run_fidelity_scan(cfg);
    CsvWriter csv(ctx.out_dir / "fidelity_scan.csv",
                  {"w_over_r0", "state_label", "fidelity_mean", "fidelity_stderr", "loss_rate", "fidelity_min",
                   "success_prob_mean", "success_prob_stderr", "fiber_prob_mean"});
    std::vector<double> means;
    json cells = json::array();
    for (const auto& r : rows) {
        csv.num(r.w_over_r0).str(r.label).num(r.fidelity.mean).num(r.fidelity.std_error).num(r.loss_rate())
            .num(r.fidelity.min).num(r.success_prob.mean).num(r.success_prob.std_error).num(r.fiber_prob.mean);
        csv.end();
        if (r.accepted > 0) {
            means.push_back(r.fidelity.mean);
        }
        cells.push_back({{"w_over_r0", r.w_over_r0},
                         {"state", r.label},
                         {"fidelity", stats_json(r.fidelity)},
                         {"success_prob", stats_json(r.success_prob)},
                         {"losses", r.losses},
                         {"accepted", r.accepted}});
    }
    const auto [mean, spread] = mean_and_spread(means);
    const double lowest = means.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : *std::min_element(means.begin(), means.end());
    std::printf("fidelity over %zu cells: mean %.9f, dispersion %.3g, lowest %.9f (measured reference 0.985 +/- 0.006)\n",
                means.size(), mean, spread, lowest);
    write_json(ctx.out_dir / "summary.json",
               {{"subcommand", "fidelity-scan"},
                {"config", ctx.config},
                {"cells", cells},
                {"band", {{"mean", mean}, {"dispersion", spread}, {"lowest_cell_mean", lowest}, {"cells", means.size()}}},
                {"measured_reference", {{"mean", 0.985}, {"dispersion", 0.006}}}});
    return ok;
}

int cmd_rotation_scan(const RunContext& ctx) {
    auto cfg = experiment_of(ctx);
    const int n_angles = ctx.config["n_angles"].get<int>();
    if (n_angles < 1) {
        throw usage_error("n_angles must be at least 1");
    }
    cfg.angles = preset_angles(n_angles);
    const auto rows = run_rotation_scan(cfg);
    CsvWriter csv(ctx.out_dir / "rotation_scan.csv",
                  {"w_over_r0", "theta", "state_label", "fidelity_mean", "fidelity_stderr", "success_prob_mean"});
    std::vector<double> means;
    json per_state = json::object();
    for (std::size_t s = 0; s < cfg.strengths.size(); ++s) {
        for (std::size_t q = 0; q < cfg.states.size(); ++q) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (std::size_t t = 0; t < cfg.angles.size(); ++t) {
                const auto& r = rows[(s * cfg.angles.size() + t) * cfg.states.size() + q];
                lo = std::min(lo, r.fidelity.mean);
                hi = std::max(hi, r.fidelity.mean);
            }
            per_state[cfg.labels[q]].push_back({{"w_over_r0", cfg.strengths[s]}, {"variation", hi - lo}});
        }
    }
    for (const auto& r : rows) {
        csv.num(r.w_over_r0).num(r.theta).str(r.label).num(r.fidelity.mean).num(r.fidelity.std_error)
            .num(r.success_prob.mean);
        csv.end();
        means.push_back(r.fidelity.mean);
    }
    const auto [mean, spread] = mean_and_spread(means);
    write_json(ctx.out_dir / "summary.json", {{"subcommand", "rotation-scan"},
                                              {"config", ctx.config},
                                              {"angle_variation", per_state},
                                              {"points", means.size()},
                                              {"mean", mean},
                                              {"dispersion", spread},
                                              {"measured_reference", {{"mean", 0.98}, {"dispersion", 0.01}}}});
    return ok;
}

// Least-squares slope of log y on log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double lx = std::log(x[k]);
        const double ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int cmd_screen_validate(const RunContext& ctx) {
    const json& c = ctx.config;
    const GridSpec grid = grid_of(c);
    const TurbulenceParams params{c["w_over_r0"].get<double>()};
    params.validate();
    if (params.w_over_r0 > max_screen_strength) {
        throw usage_error("w_over_r0 above the validated screen range");
    }
    const auto n = static_cast<std::size_t>(c["realizations"].get<long long>());
    if (n < 100) {
        throw usage_error("screen-validate needs at least 100 realizations");
    }
    const std::uint64_t seed = c["seed"].get<std::uint64_t>();
    const auto rel = doubles(c["separations_r0"], "separations_r0");
    const bool zero = params.w_over_r0 == 0.0;
    // With no turbulence r0 is infinite; separations are then read in waists.
    const double r0 = zero ? 1.0 : 1.0 / params.w_over_r0;
    std::vector<double> seps;
    for (double s : rel) {
        seps.push_back(s * r0);
    }
    ScreenPairAccumulator acc(grid, seps);
    // Screens are generated in parallel batches and accumulated in index order.
    const std::size_t batch = 32;
    for (std::size_t start = 0; start < n; start += batch) {
        const std::size_t count = std::min(batch, n - start);
        std::vector<PhaseScreen> screens(count);
        parallel_for(count, ctx.workers,
                     [&](std::size_t k) { screens[k] = generate_screen(params, grid, stream_key(seed, 0, start + k)); });
        for (const auto& s : screens) {
            acc.add(s);
        }
        if (start == 0 && c["export_screen"].get<bool>()) {
            write_screen_binary(screens.front(), (ctx.out_dir / "screen_0.bin").string());
            write_screen_csv(screens.front(), (ctx.out_dir / "screen_0.csv").string());
        }
    }
    const auto sf = acc.structure_function();
    const auto coh = acc.coherence();

    CsvWriter csv(ctx.out_dir / "screen_validate.csv",
                  {"separation_over_r0", "separation", "d_empirical", "d_stderr", "d_theory", "coherence_empirical",
                   "coherence_stderr", "coherence_theory", "coherence_z"});
    std::vector<double> fit_x;
    std::vector<double> fit_y;
    bool coherence_ok = true;
    double d_at_r0 = std::numeric_limits<double>::quiet_NaN();
    double max_abs = 0.0;
    for (std::size_t k = 0; k < sf.size(); ++k) {
        const double d = sf[k].separation;
        const double theory_d = structure_function_theory(d, params);
        const double theory_c = coherence_at_separation(d, params);
        const double se = coh[k].stats.std_error;
        const double z = se > 0.0 ? (coh[k].stats.mean - theory_c) / se : 0.0;
        if (!zero && std::abs(z) > 3.0) {
            coherence_ok = false;
        }
        max_abs = std::max({max_abs, std::abs(sf[k].stats.mean), std::abs(1.0 - coh[k].stats.mean)});
        const double in_r0 = d / r0;
        if (in_r0 >= 0.2 - 1e-9 && in_r0 <= 2.0 + 1e-9 && sf[k].stats.mean > 0.0) {
            fit_x.push_back(d);
            fit_y.push_back(sf[k].stats.mean);
        }
        if (std::abs(rel[k] - 1.0) < 1e-12) {
            d_at_r0 = sf[k].stats.mean * structure_function_theory(r0, params) / theory_d;
        }
        csv.num(in_r0).num(d).num(sf[k].stats.mean).num(sf[k].stats.std_error).num(theory_d)
            .num(coh[k].stats.mean).num(se).num(theory_c).num(z);
        csv.end();
    }
    json checks;
    bool pass = true;
    if (zero) {
        checks["all_zero"] = max_abs == 0.0;
        pass = max_abs == 0.0;
    } else {
        const double slope = fit_x.size() >= 2 ? loglog_slope(fit_x, fit_y) : std::numeric_limits<double>::quiet_NaN();
        const double ratio = d_at_r0 / kolmogorov_coefficient;
        const bool d_ok = std::abs(ratio - 1.0) <= 0.1;
        const bool slope_ok = std::abs(slope - 5.0 / 3.0) <= 0.1;
        checks = {{"d_at_r0", d_at_r0},
                  {"d_at_r0_ratio", ratio},
                  {"d_at_r0_pass", d_ok},
                  {"slope", slope},
                  {"slope_pass", slope_ok},
                  {"coherence_pass", coherence_ok}};
        pass = d_ok && slope_ok && coherence_ok;
    }
    checks["pass"] = pass;
    write_json(ctx.out_dir / "summary.json",
               {{"subcommand", "screen-validate"}, {"config", ctx.config}, {"screens", acc.count()}, {"checks", checks}});
    if (!pass) {
        std::cerr << "screen statistics outside tolerance; see screen_validate.csv\n";
        return failure;
    }
    return ok;
}

// Average ranks (ties share the mean rank).
std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) {
            ++j;
        }
        for (std::size_t k = i; k <= j; ++k) {
            r[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
        }
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t k = 0; k < ra.size(); ++k) {
        sab += (ra[k] - ma) * (rb[k] - mb);
        saa += (ra[k] - ma) * (ra[k] - ma);
        sbb += (rb[k] - mb) * (rb[k] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

int cmd_calibrate(const RunContext& ctx) {
    const json& c = ctx.config;
    const GridSpec grid = grid_of(c);
    auto strengths = doubles(c["strengths"], "strengths");
    json physical = json::object();
    if (!c["physical"].is_null()) {
        const json& p = c["physical"];
        try {
            const PhysicalPath path{p.at("wavelength_nm").get<double>() * 1e-9, p.at("cn2").get<double>(),
                                    p.at("distance_m").get<double>(), p.at("waist_m").get<double>()};
            const double a = TurbulenceParams::from_physical(path).w_over_r0;
            physical = {{"input", p}, {"w_over_r0", a}};
            strengths.push_back(a);
        } catch (const json::exception&) {
            throw usage_error("physical needs wavelength_nm, cn2, distance_m and waist_m");
        } catch (const hoam::error& e) {
            throw usage_error(std::string("physical path: ") + e.what());
        }
    }
    const int n = c["realizations"].get<int>();
    if (n < 100) {
        throw usage_error("calibrate needs at least 100 realizations");
    }
    const std::uint64_t seed = c["seed"].get<std::uint64_t>();
    const double lambda = c["wavelength"].get<double>();
    const double distance = c["distance_rayleigh"].get<double>() * std::numbers::pi / lambda;
    const auto reference = beam_broadening_mc({0.0}, n, distance, lambda, seed, grid, ctx.workers);

    CsvWriter csv(ctx.out_dir / "calibration.csv", {"w_over_r0_true", "w_t_over_w", "w_t_stderr", "w_over_r0_inferred",
                                                    "inferred_stderr", "guard_ok"});
    std::vector<double> truth;
    std::vector<double> inferred;
    json cells = json::array();
    std::size_t violations = 0;
    for (std::size_t s = 0; s < strengths.size(); ++s) {
        json cell = {{"w_over_r0_true", strengths[s]}};
        try {
            const auto r = beam_broadening_mc({strengths[s]}, n, distance, lambda, stream_key(seed, 1, s), grid,
                                              ctx.workers);
            const double ratio = std::max(r.w_t_over_w / reference.w_t_over_w, 1.0);
            const double a = fried_from_broadening(ratio, 1.0);
            const double se_ratio = r.std_error / reference.w_t_over_w;
            const double se = a > 0.0 ? ratio * se_ratio / (9.0 * a) : 0.0;
            csv.num(strengths[s]).num(r.w_t_over_w).num(r.std_error).num(a).num(se).num(std::size_t{1});
            cell["w_t_over_w"] = r.w_t_over_w;
            cell["w_over_r0_inferred"] = a;
            cell["inferred_stderr"] = se;
            truth.push_back(strengths[s]);
            inferred.push_back(a);
        } catch (const aliasing_error& e) {
            ++violations;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            csv.num(strengths[s]).num(nan).num(nan).num(nan).num(nan).num(std::size_t{0});
            cell["guard_violation"] = e.what();
        }
        csv.end();
        cells.push_back(cell);
    }
    const double rho = truth.size() >= 2 ? spearman(truth, inferred) : std::numeric_limits<double>::quiet_NaN();
    write_json(ctx.out_dir / "summary.json",
               {{"subcommand", "calibrate"},
                {"config", ctx.config},
                {"free_space_w_over_w0", reference.w_t_over_w},
                {"cells", cells},
                {"physical", physical},
                {"spearman_rho", rho},
                {"guard_violations", violations},
                {"operating_range", {{"w_over_r0_min", 0.0}, {"w_over_r0_max", 1.4}, {"uncertainty", 0.2}}}});
    std::printf("Spearman rank correlation inferred vs true: %.6f\n", rho);
    return violations > 0 ? failure : ok;
}

// ---------------------------------------------------------------- main

struct CommonFlags {
    std::string config_path;
    std::string out_dir = "out";
    int workers = 1;
    std::uint64_t seed = 0;
    int grid_n = 0;
    double grid_extent = 0.0;
    long long realizations = 0;
    int l = 0;
    std::vector<double> strengths;
    int n_angles = 0;
    double w_over_r0 = 0.0;
    bool export_screen = false;
    double distance_rayleigh = 0.0;
    double wavelength_nm = 0.0;
    double cn2 = 0.0;
    double path_m = 0.0;
    double waist_m = 0.0;
};

struct Subcommand {
    std::string name;
    CLI::App* app = nullptr;
    int (*run)(const RunContext&) = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid polarization-OAM qubit transmission through Kolmogorov turbulence"};
    app.require_subcommand(1);
    CommonFlags f;
    std::vector<Subcommand> subs = {
        {"ph-curve", app.add_subcommand("ph-curve", "Analytic and Monte Carlo success probability vs w/r0"),
         cmd_ph_curve},
        {"fidelity-scan", app.add_subcommand("fidelity-scan", "Fidelity of the six MUB states vs w/r0"),
         cmd_fidelity_scan},
        {"rotation-scan", app.add_subcommand("rotation-scan", "Fidelity vs receiver frame angle"), cmd_rotation_scan},
        {"screen-validate", app.add_subcommand("screen-validate", "Screen structure function and coherence vs theory"),
         cmd_screen_validate},
        {"calibrate", app.add_subcommand("calibrate", "Infer w/r0 from long-exposure beam broadening"),
         cmd_calibrate},
    };
    std::map<std::string, std::map<std::string, CLI::Option*>> given;
    for (auto& s : subs) {
        auto* a = s.app;
        auto& o = given[s.name];
        o["config"] = a->add_option("--config", f.config_path, "JSON config or run_manifest.json to replay");
        a->add_option("--out-dir", f.out_dir, "Output directory")->capture_default_str();
        a->add_option("--workers", f.workers, "Worker threads (0 = all cores); results do not depend on it")
            ->capture_default_str();
        o["seed"] = a->add_option("--seed", f.seed, "Master seed");
        o["grid_n"] = a->add_option("--grid-n", f.grid_n, "Grid points per side");
        o["grid_extent"] = a->add_option("--grid-extent", f.grid_extent, "Grid side length in beam waists");
        o["realizations"] = a->add_option("--realizations", f.realizations, "Screens per cell");
        o["l"] = a->add_option("--l", f.l, "OAM charge of the hybrid qubit");
        if (s.name != "screen-validate") {
            o["strengths"] = a->add_option("--strengths", f.strengths, "Comma-separated w/r0 values")->delimiter(',');
        }
        if (s.name == "rotation-scan") {
            o["n_angles"] = a->add_option("--n-angles", f.n_angles, "Angles evenly spaced on [0, 2 pi)");
        }
        if (s.name == "screen-validate") {
            o["w_over_r0"] = a->add_option("--w-over-r0", f.w_over_r0, "Turbulence strength");
            o["export_screen"] = a->add_flag("--export-screen", f.export_screen, "Also write the first screen");
        }
        if (s.name == "calibrate") {
            o["distance_rayleigh"] =
                a->add_option("--distance", f.distance_rayleigh, "Propagation distance in Rayleigh ranges");
            o["wavelength_nm"] = a->add_option("--wavelength-nm", f.wavelength_nm, "Physical wavelength (nm)");
            o["cn2"] = a->add_option("--cn2", f.cn2, "Refractive-index structure constant (m^-2/3)");
            o["path_m"] = a->add_option("--path-m", f.path_m, "Turbulent path length (m)");
            o["waist_m"] = a->add_option("--waist-m", f.waist_m, "Beam waist (m)");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    const Subcommand* chosen = nullptr;
    for (const auto& s : subs) {
        if (s.app->parsed()) {
            chosen = &s;
        }
    }
    const std::string& name = chosen->name;
    auto& o = given[name];
    const auto set = [&](const std::string& key) { return o.count(key) != 0 && o[key]->count() > 0; };

    RunContext ctx;
    try {
        ctx.config = defaults_for(name);
        if (set("config")) {
            merge_config(ctx.config, load_config_file(f.config_path, name), f.config_path);
        }
        json flags = json::object();
        if (set("seed")) flags["seed"] = f.seed;
        if (set("grid_n")) flags["grid_n"] = f.grid_n;
        if (set("grid_extent")) flags["grid_extent"] = f.grid_extent;
        if (set("realizations")) flags["realizations"] = f.realizations;
        if (set("l")) flags["l"] = f.l;
        if (set("strengths")) flags["strengths"] = f.strengths;
        if (set("n_angles")) flags["n_angles"] = f.n_angles;
        if (set("w_over_r0")) flags["w_over_r0"] = f.w_over_r0;
        if (set("export_screen")) flags["export_screen"] = f.export_screen;
        if (set("distance_rayleigh")) flags["distance_rayleigh"] = f.distance_rayleigh;
        const bool any_physical = set("wavelength_nm") || set("cn2") || set("path_m") || set("waist_m");
        if (any_physical) {
            if (!(set("wavelength_nm") && set("cn2") && set("path_m") && set("waist_m"))) {
                throw usage_error("--wavelength-nm, --cn2, --path-m and --waist-m go together");
            }
            flags["physical"] = {{"wavelength_nm", f.wavelength_nm},
                                 {"cn2", f.cn2},
                                 {"distance_m", f.path_m},
                                 {"waist_m", f.waist_m}};
        }
        merge_config(ctx.config, flags, "flags");
        validate_common(ctx.config);
        if (f.workers < 0) {
            throw usage_error("workers must be non-negative");
        }
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const hoam::error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const json::exception& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage;
    }
    ctx.workers = resolve_workers(f.workers);
    ctx.out_dir = f.out_dir;

    try {
        fs::create_directories(ctx.out_dir);
        write_json(ctx.out_dir / "run_manifest.json", {{"subcommand", name},
                                                      {"config", ctx.config},
                                                      {"master_seed", ctx.config["seed"]},
                                                      {"artifact_version", artifact_version},
                                                      {"timestamp", utc_timestamp()},
                                                      {"execution", {{"workers", ctx.workers}}}});
        return chosen->run(ctx);
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
}
