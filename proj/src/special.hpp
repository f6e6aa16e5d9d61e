#pragma once

#include <cmath>

namespace nmlc::detail {

/// log of the Gamma(shape, scale) density at x > 0.
inline double log_gamma_pdf(double shape, double scale, double x)
{
    return -std::lgamma(shape) - shape * std::log(scale) + (shape - 1.0) * std::log(x) - x / scale;
}

/// Regularized lower incomplete gamma P(n, x) for integer n >= 1.
inline double regularized_gamma_p(int n, double x)
{
    if (x <= 0.0) return 0.0;
    // 1 - e^{-x} sum_{k<n} x^k / k!
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < n; ++k) {
        term *= x / k;
        sum += term;
    }
    return 1.0 - std::exp(-x) * sum;
}

/// Regularized upper incomplete gamma Q(n, x) = 1 - P(n, x), computed
/// directly so it keeps relative accuracy in the tail.
inline double regularized_gamma_q(int n, double x)
{
    if (x <= 0.0) return 1.0;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < n; ++k) {
        term *= x / k;
        sum += term;
    }
    return std::exp(-x) * sum;
}

} // namespace nmlc::detail
