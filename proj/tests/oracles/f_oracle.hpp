// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

// Upper tail of F(d1, d2) by direct quadrature of the beta density.

#pragma once

#include <cmath>

namespace oracle {

/// P(F > f) = I_x(a, b) with a = d2/2, b = d1/2, x = d2 / (d2 + d1 f).
/// The beta integral over [0, x] is split at c = x/2. On [0, c] the
/// substitution u = t^a gives (1/a) (1 - u^(1/a))^(b-1) du; on [c, x] the
/// substitution v = (1-t)^b gives (1/b) (1 - v^(1/b))^(a-1) dv. Both
/// integrands are bounded, so Simpson's rule converges.
inline double f_upper_tail(double f, double d1, double d2, int intervals = 200000) {
    const double a = d2 / 2.0;
    const double b = d1 / 2.0;
    const double x = d2 / (d2 + d1 * f);
    const double c = x / 2.0;
    auto simpson = [intervals](auto g, double lo, double hi) {
        const double h = (hi - lo) / intervals;
        double sum = g(lo) + g(hi);
        for (int i = 1; i < intervals; ++i) sum += g(lo + i * h) * (i % 2 ? 4.0 : 2.0);
        return sum * h / 3.0;
    };
    const double left = simpson([&](double u) { return std::pow(1.0 - std::pow(u, 1.0 / a), b - 1.0) / a; }, 0.0,
                                std::pow(c, a));
    const double right = simpson([&](double v) { return std::pow(1.0 - std::pow(v, 1.0 / b), a - 1.0) / b; },
                                 std::pow(1.0 - x, b), std::pow(1.0 - c, b));
    const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    return (left + right) / std::exp(log_beta);
}

} // namespace oracle
