#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <span>

namespace hoam::fft {

using cplx = std::complex<double>;

enum class direction : int { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

namespace detail {

struct plan_key {
    int rank;
    int len;
    int howmany;
    int stride;
    int dist;
    int sign;
    auto operator<=>(const plan_key&) const = default;
};

// Plans are created once per shape and never destroyed. FFTW planning is not
// thread-safe, execution with fftw_execute_dft is. FFTW_UNALIGNED keeps the
// chosen codelets independent of buffer alignment, which keeps results
// bitwise reproducible across allocations and threads.
inline fftw_plan cached_plan(const plan_key& key) {
    static std::mutex mutex;
    static std::map<plan_key, fftw_plan> cache;
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) {
        return it->second;
    }
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::size_t span_len = 0;
    if (key.rank == 2) {
        span_len = static_cast<std::size_t>(key.len) * key.len;
    } else {
        span_len = static_cast<std::size_t>(key.howmany - 1) * key.dist +
                   static_cast<std::size_t>(key.len - 1) * key.stride + 1;
    }
    fftw_complex* buf = fftw_alloc_complex(span_len);
    fftw_plan plan = nullptr;
    if (key.rank == 2) {
        plan = fftw_plan_dft_2d(key.len, key.len, buf, buf, key.sign, flags);
    } else {
        int len = key.len;
        plan = fftw_plan_many_dft(1, &len, key.howmany, buf, nullptr, key.stride, key.dist, buf,
                                  nullptr, key.stride, key.dist, key.sign, flags);
    }
    fftw_free(buf);
    cache.emplace(key, plan);
    return plan;
}

inline void execute(const plan_key& key, std::span<cplx> data) {
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(cached_plan(key), ptr, ptr);
}

}  // namespace detail

/// Unnormalized in-place 2-D transform of a row-major n x n array.
inline void transform_2d(std::span<cplx> data, int n, direction dir) {
    detail::execute({2, n, 1, 1, 1, static_cast<int>(dir)}, data);
}

/// Unnormalized in-place transform of each contiguous row of an n x n array.
inline void transform_rows(std::span<cplx> data, int n, direction dir) {
    detail::execute({1, n, n, 1, n, static_cast<int>(dir)}, data);
}

/// Unnormalized in-place transform of each column of a row-major n x n array.
inline void transform_columns(std::span<cplx> data, int n, direction dir) {
    detail::execute({1, n, n, n, 1, static_cast<int>(dir)}, data);
}

/// Unnormalized in-place transform of `howmany` contiguous blocks of length `len`.
inline void transform_batch(std::span<cplx> data, int len, int howmany, direction dir) {
    detail::execute({1, len, howmany, 1, len, static_cast<int>(dir)}, data);
}

/// Angular frequency (radians per unit length) of FFT bin k for n samples at spacing dx.
inline double angular_frequency(int k, int n, double dx) {
    const int signed_k = k < n / 2 ? k : k - n;  // Nyquist bin counted as negative
    return 2.0 * std::numbers::pi * signed_k / (n * dx);
}

}  // namespace hoam::fft
