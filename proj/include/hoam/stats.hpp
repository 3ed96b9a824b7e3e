#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace hoam {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Mean, standard error (sample standard deviation / sqrt(n)), count and range.
struct EnsembleStats {
    double mean = 0.0;
    double std_error = 0.0;  // "stderr" in outputs; the bare name is a macro on some platforms
    std::size_t n = 0;
    double min = 0.0;
    double max = 0.0;

    /// Statistics of values in the given order. Two-pass with compensated
    /// sums, so the result depends only on the sequence, not on how it was
    /// produced.
    static EnsembleStats of(std::span<const double> values) {
        EnsembleStats s;
        s.n = values.size();
        if (s.n == 0) {
            s.mean = std::numeric_limits<double>::quiet_NaN();
            s.std_error = std::numeric_limits<double>::quiet_NaN();
            s.min = s.max = std::numeric_limits<double>::quiet_NaN();
            return s;
        }
        CompensatedSum sum;
        s.min = s.max = values[0];
        for (double v : values) {
            sum.add(v);
            s.min = std::min(s.min, v);
            s.max = std::max(s.max, v);
        }
        s.mean = sum.value() / static_cast<double>(s.n);
        if (s.n > 1) {
            CompensatedSum sq;
            for (double v : values) {
                sq.add((v - s.mean) * (v - s.mean));
            }
            const double var = sq.value() / static_cast<double>(s.n - 1);
            s.std_error = std::sqrt(var / static_cast<double>(s.n));
        }
        return s;
    }
};

}  // namespace hoam
