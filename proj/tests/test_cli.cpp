#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "hoam_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir.parent_path());
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = std::string(HOAM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

const std::string small = " --grid-n 64 --realizations 12 ";

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
    const auto out = scratch("usage");
    EXPECT_EQ(run("fidelity-scan --bogus"), 1);
    EXPECT_EQ(run("no-such-command"), 1);
    EXPECT_EQ(run("fidelity-scan --strengths 2.5 --out-dir " + out.string()), 1);
    EXPECT_EQ(run("fidelity-scan --grid-n 63 --out-dir " + out.string()), 1);
    EXPECT_EQ(run("calibrate --wavelength-nm 1550 --out-dir " + out.string()), 1);

    const auto cfg = out.string() + ".json";
    std::ofstream(cfg) << R"({"unknown_key": 1})";
    EXPECT_EQ(run("fidelity-scan --config " + cfg + " --out-dir " + out.string()), 1);
    std::ofstream(cfg) << R"({"realizations": "many"})";
    EXPECT_EQ(run("fidelity-scan --config " + cfg + " --out-dir " + out.string()), 1);
}

TEST(Cli, ManifestReplayIsBitwiseAcrossWorkers) {
    const auto a = scratch("replay_a");
    const auto b = scratch("replay_b");
    ASSERT_EQ(run("fidelity-scan" + small + "--strengths 0.4,1.2 --seed 17 --workers 1 --out-dir " + a.string()), 0);
    ASSERT_EQ(run("fidelity-scan --config " + (a / "run_manifest.json").string() + " --workers 3 --out-dir " +
                  b.string()),
              0);
    EXPECT_EQ(slurp(a / "fidelity_scan.csv"), slurp(b / "fidelity_scan.csv"));
    EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json"));
    EXPECT_EQ(read_json(a / "run_manifest.json")["config"], read_json(b / "run_manifest.json")["config"]);
}

TEST(Cli, ManifestOfOtherCommandRejected) {
    const auto a = scratch("mismatch");
    ASSERT_EQ(run("fidelity-scan" + small + "--strengths 0.4 --out-dir " + a.string()), 0);
    EXPECT_EQ(run("ph-curve --config " + (a / "run_manifest.json").string() + " --out-dir " + a.string()), 1);
}

TEST(Cli, FlagsOverrideConfigFile) {
    const auto a = scratch("precedence");
    const auto cfg = a.string() + ".json";
    std::ofstream(cfg) << R"({"realizations": 5, "seed": 9, "grid_n": 64})";
    ASSERT_EQ(run("fidelity-scan --config " + cfg + " --realizations 7 --strengths 0.2 --out-dir " + a.string()), 0);
    const auto m = read_json(a / "run_manifest.json");
    EXPECT_EQ(m["subcommand"], "fidelity-scan");
    EXPECT_EQ(m["config"]["realizations"], 7);
    EXPECT_EQ(m["config"]["seed"], 9);
    EXPECT_EQ(m["master_seed"], 9);
    EXPECT_TRUE(m.contains("artifact_version"));
    EXPECT_TRUE(m.contains("timestamp"));
}

TEST(Cli, CsvLayout) {
    const auto a = scratch("layout");
    ASSERT_EQ(run("ph-curve" + small + "--strengths 0.6,0 --out-dir " + a.string()), 0);
    const auto text = slurp(a / "ph_curve.csv");
    EXPECT_EQ(text.find('\r'), std::string::npos);
    EXPECT_EQ(text.rfind("w_over_r0,ph_analytic,ph_mc_mean,ph_mc_stderr", 0), 0u);
    // Rows come out sorted by strength; zero turbulence gives P_h = 1.
    const auto second = text.substr(text.find('\n') + 1);
    EXPECT_EQ(second.rfind("0,1,", 0), 0u);

    const auto r = scratch("layout_rot");
    ASSERT_EQ(run("rotation-scan" + small + "--n-angles 3 --out-dir " + r.string()), 0);
    EXPECT_EQ(slurp(r / "rotation_scan.csv").rfind("w_over_r0,theta,state_label,fidelity_mean,fidelity_stderr", 0),
              0u);
}

TEST(Cli, ScreenValidateZeroTurbulence) {
    const auto a = scratch("sv0");
    ASSERT_EQ(run("screen-validate --grid-n 64 --realizations 100 --w-over-r0 0 --out-dir " + a.string()), 0);
    const auto s = read_json(a / "summary.json");
    EXPECT_TRUE(s["checks"]["all_zero"].get<bool>());
    EXPECT_EQ(run("screen-validate --grid-n 64 --realizations 20 --out-dir " + a.string()), 1);
}

TEST(Cli, CalibrateZeroStrengthInfersZero) {
    const auto a = scratch("cal");
    ASSERT_EQ(run("calibrate --grid-n 128 --grid-extent 16 --realizations 100 --strengths 0,0.6 --out-dir " +
                  a.string()),
              0);
    const auto s = read_json(a / "summary.json");
    EXPECT_EQ(s["cells"][0]["w_over_r0_inferred"], 0.0);
    EXPECT_GT(s["cells"][1]["w_over_r0_inferred"].get<double>(), 0.0);
}
