#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hoam/errors.hpp"
#include "hoam/turbulence.hpp"

namespace hoam {

// Binary layout, little-endian:
//   char[8] "HOAMSCR1" | uint32 n | float64 extent | float64 w_over_r0 |
//   uint64 seed | n*n float64 phase (row-major, radians)
inline constexpr char screen_magic[8] = {'H', 'O', 'A', 'M', 'S', 'C', 'R', '1'};

static_assert(std::endian::native == std::endian::little, "screen files are written in host byte order");

namespace detail {

template <typename T>
void write_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
        throw shape_error("truncated screen file");
    }
    return v;
}

}  // namespace detail

inline void write_screen_binary(const PhaseScreen& s, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw error("cannot open " + path);
    }
    os.write(screen_magic, sizeof screen_magic);
    detail::write_raw(os, static_cast<std::uint32_t>(s.grid.n));
    detail::write_raw(os, s.grid.extent);
    detail::write_raw(os, s.params.w_over_r0);
    detail::write_raw(os, s.seed);
    os.write(reinterpret_cast<const char*>(s.phase.data()),
             static_cast<std::streamsize>(s.phase.size() * sizeof(double)));
    if (!os) {
        throw error("failed writing " + path);
    }
}

inline PhaseScreen read_screen_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw error("cannot open " + path);
    }
    char magic[8];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, screen_magic, sizeof magic) != 0) {
        throw shape_error("not a screen file: " + path);
    }
    PhaseScreen s;
    s.grid.n = static_cast<int>(detail::read_raw<std::uint32_t>(is));
    s.grid.extent = detail::read_raw<double>(is);
    s.params.w_over_r0 = detail::read_raw<double>(is);
    s.seed = detail::read_raw<std::uint64_t>(is);
    s.grid.validate();
    s.phase.resize(s.grid.size());
    if (!is.read(reinterpret_cast<char*>(s.phase.data()),
                 static_cast<std::streamsize>(s.phase.size() * sizeof(double)))) {
        throw shape_error("truncated screen file");
    }
    return s;
}

/// CSV: header "n,extent,w_over_r0,seed", one line of values, then n rows of
/// n phases. Values use %.17g so they read back exactly.
inline void write_screen_csv(const PhaseScreen& s, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (fp == nullptr) {
        throw error("cannot open " + path);
    }
    std::fprintf(fp, "n,extent,w_over_r0,seed\n%d,%.17g,%.17g,%llu\n", s.grid.n, s.grid.extent, s.params.w_over_r0,
                 static_cast<unsigned long long>(s.seed));
    for (int j = 0; j < s.grid.n; ++j) {
        for (int i = 0; i < s.grid.n; ++i) {
            std::fprintf(fp, i == 0 ? "%.17g" : ",%.17g", s.phase[static_cast<std::size_t>(j) * s.grid.n + i]);
        }
        std::fputc('\n', fp);
    }
    const bool failed = std::ferror(fp) != 0;
    std::fclose(fp);
    if (failed) {
        throw error("failed writing " + path);
    }
}

inline PhaseScreen read_screen_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw error("cannot open " + path);
    }
    std::string line;
    if (!std::getline(is, line) || line != "n,extent,w_over_r0,seed") {
        throw shape_error("unexpected screen CSV header in " + path);
    }
    PhaseScreen s;
    if (!std::getline(is, line)) {
        throw shape_error("truncated screen CSV");
    }
    unsigned long long seed = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%llu", &s.grid.n, &s.grid.extent, &s.params.w_over_r0, &seed) != 4) {
        throw shape_error("malformed screen CSV header values");
    }
    s.seed = seed;
    s.grid.validate();
    s.phase.reserve(s.grid.size());
    for (int j = 0; j < s.grid.n; ++j) {
        if (!std::getline(is, line)) {
            throw shape_error("truncated screen CSV");
        }
        std::istringstream row(line);
        std::string cell;
        int count = 0;
        while (std::getline(row, cell, ',')) {
            s.phase.push_back(std::stod(cell));
            ++count;
        }
        if (count != s.grid.n) {
            throw shape_error("screen CSV row has the wrong length");
        }
    }
    return s;
}

}  // namespace hoam
