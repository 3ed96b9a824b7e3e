#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hoam/screen_io.hpp"

using namespace hoam;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "hoam_screen_io";
    fs::create_directories(dir);
    return dir / name;
}

PhaseScreen sample_screen() { return generate_screen({0.8}, {64, 8.0}, 4242); }

}  // namespace

TEST(ScreenIo, BinaryRoundTripIsExact) {
    const auto s = sample_screen();
    const auto path = scratch("s.bin").string();
    write_screen_binary(s, path);
    const auto t = read_screen_binary(path);
    EXPECT_EQ(t.grid.n, s.grid.n);
    EXPECT_EQ(t.grid.extent, s.grid.extent);
    EXPECT_EQ(t.seed, s.seed);
    EXPECT_EQ(t.params.w_over_r0, s.params.w_over_r0);
    EXPECT_EQ(t.phase, s.phase);
}

TEST(ScreenIo, CsvRoundTripIsExact) {
    const auto s = sample_screen();
    const auto path = scratch("s.csv").string();
    write_screen_csv(s, path);
    const auto t = read_screen_csv(path);
    EXPECT_EQ(t.grid.n, s.grid.n);
    EXPECT_EQ(t.seed, s.seed);
    EXPECT_EQ(t.phase, s.phase);
}

TEST(ScreenIo, RejectsForeignAndTruncatedFiles) {
    const auto path = scratch("bad.bin").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOTASCREEN";
    }
    EXPECT_THROW(read_screen_binary(path), shape_error);

    const auto s = sample_screen();
    const auto full = scratch("full.bin").string();
    write_screen_binary(s, full);
    fs::resize_file(full, fs::file_size(full) - 8);
    EXPECT_THROW(read_screen_binary(full), shape_error);
    EXPECT_THROW(read_screen_binary(scratch("missing.bin").string()), error);
}
