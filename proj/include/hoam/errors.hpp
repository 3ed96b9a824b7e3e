#pragma once

#include <stdexcept>
#include <string>

namespace hoam {

/// Base class of every error raised by the library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A parameter lies outside the supported or validated range.
struct range_error : error {
    using error::error;
};

/// Two fields (or a field and a screen) live on different grids.
struct shape_error : error {
    using error::error;
};

/// Input outside the mathematical domain of a formula.
struct domain_error : error {
    using error::error;
};

/// Too much energy reached the grid boundary for an FFT-based step.
struct aliasing_error : error {
    using error::error;
};

/// Not enough samples for a meaningful ensemble estimate.
struct statistics_error : error {
    using error::error;
};

/// Quadrature failed its node-doubling self-consistency check.
struct tolerance_error : error {
    using error::error;
};

/// Fidelity requested for an all-zero recovered state (total loss event).
struct undefined_fidelity_error : error {
    using error::error;
};

}  // namespace hoam
