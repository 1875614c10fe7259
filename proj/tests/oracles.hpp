#pragma once

// Reference computations for tests. Only the C library and Boost are used
// here, never the merton numerics under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

inline double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

template <typename F>
double integrate(F f, double a, double b, double tol = 1e-13, unsigned depth = 15) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, depth, tol);
}

/// Phi2(h,k;rho) as a nested adaptive integral of the bivariate density,
/// truncated 12 standard deviations below each mean.
inline double bivariate_cdf(double h, double k, double rho) {
    const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
    auto outer = [&](double x) {
        const double lo = rho * x - 12.0 * s;
        if (k <= lo) return 0.0;
        auto inner = [&](double y) {
            const double q = (x * x - 2.0 * rho * x * y + y * y) / (s * s);
            return std::exp(-0.5 * q) / (2.0 * kPi * s);
        };
        return integrate(inner, lo, k, 1e-11, 12);
    };
    const double hi = std::min(h, 12.0);
    if (hi <= -12.0) return 0.0;
    return integrate(outer, -12.0, hi, 1e-12);
}

/// E[g(S)] for S ~ N(0,1) by adaptive quadrature on [-40, 40].
template <typename G>
double normal_expectation(G g) {
    return integrate([&](double s) { return g(s) * phi(s); }, -40.0, 0.0) +
           integrate([&](double s) { return g(s) * phi(s); }, 0.0, 40.0);
}

/// Binomial pmf from lgamma.
inline double binom_pmf(std::int64_t n, std::int64_t k, double g) {
    if (g <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (g >= 1.0) return k == n ? 1.0 : 0.0;
    const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    return std::exp(lc + k * std::log(g) + (n - k) * std::log1p(-g));
}

/// Phi^{-1} by bisection on Phi.
inline double quantile(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (Phi(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace oracle
