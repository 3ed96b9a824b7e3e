#pragma once

#include <boost/math/special_functions/legendre.hpp>

#include <cmath>
#include <memory>
#include <vector>

#include "hoam/cache.hpp"
#include "hoam/errors.hpp"

namespace hoam {

struct GaussRule {
    std::vector<double> nodes;    // ascending, in (-1, 1)
    std::vector<double> weights;  // sum to 2
};

/// n-point Gauss-Legendre rule on [-1, 1]; cached per n.
inline std::shared_ptr<const GaussRule> gauss_legendre(int n) {
    if (n < 1) {
        throw range_error("Gauss-Legendre rule needs at least one node");
    }
    return detail::memoize<int, GaussRule>(n, [n] {
        const auto zeros = boost::math::legendre_p_zeros<double>(n);  // non-negative half
        GaussRule rule;
        rule.nodes.resize(n);
        rule.weights.resize(n);
        for (std::size_t k = 0; k < zeros.size(); ++k) {
            const double x = zeros[k];
            const double dp = boost::math::legendre_p_prime<double>(n, x);
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            // zeros ascend from the smallest non-negative root (x = 0 for odd n).
            const int upper = n / 2 + static_cast<int>(k);
            const int lower = n - 1 - upper;
            rule.nodes[upper] = x;
            rule.weights[upper] = w;
            rule.nodes[lower] = -x;
            rule.weights[lower] = w;
        }
        return rule;
    });
}

/// Rule mapped to [a, b].
inline GaussRule gauss_legendre(int n, double a, double b) {
    const auto& base = *gauss_legendre(n);
    GaussRule out = base;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (int k = 0; k < n; ++k) {
        out.nodes[k] = mid + half * base.nodes[k];
        out.weights[k] = half * base.weights[k];
    }
    return out;
}

}  // namespace hoam
