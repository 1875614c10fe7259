#include "merton/normal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "merton/error.hpp"

namespace merton {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt1_2 = 0.70710678118654752440;

// Phi without the finiteness check; +-inf map to 1/0.
double phi_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x * kSqrt1_2);
}

// Positive half of an n-point Gauss-Legendre rule on [-1,1], n even.
struct HalfRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

HalfRule gauss_legendre_half(int n) {
    HalfRule rule;
    for (int i = 1; i <= n / 2; ++i) {
        double x = std::cos(kPi * (i - 0.25) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int j = 2; j <= n; ++j) {
                double pj = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = pj;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes.push_back(x);
        rule.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
    }
    return rule;
}

const HalfRule& rule_for(double abs_rho) {
    static const HalfRule r6 = gauss_legendre_half(6);
    static const HalfRule r12 = gauss_legendre_half(12);
    static const HalfRule r20 = gauss_legendre_half(20);
    if (abs_rho < 0.3) return r6;
    if (abs_rho < 0.75) return r12;
    return r20;
}

// Plackett-integral part of P(X > h, Y > k) for |r| < 0.925, i.e. the
// upper-orthant probability minus Phi(-h)Phi(-k).
double upper_orthant_excess(double h, double k, double r) {
    const HalfRule& rule = rule_for(std::abs(r));
    const double hk = h * k;
    const double hs = 0.5 * (h * h + k * k);
    const double asr = 0.5 * std::asin(r);
    double sum = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        for (double x : {1.0 - rule.nodes[j], 1.0 + rule.nodes[j]}) {
            double sn = std::sin(asr * x);
            sum += rule.weights[j] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
    }
    return sum * asr / (2.0 * kPi);
}

// P(X > h, Y > k) for 0.925 <= |r| <= 1.
double upper_orthant_strong(double h, double k, double r) {
    const double tp = 2.0 * kPi;
    double hk = h * k;
    double bvn = 0.0;
    if (r < 0) {
        k = -k;
        hk = -hk;
    }
    if (std::abs(r) < 1.0) {
        const HalfRule& rule = rule_for(1.0);
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 80.0;
        double asr = -(bs / as + hk) / 2.0;
        if (asr > -100.0) {
            bvn = a * std::exp(asr) *
                  (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
        }
        if (hk > -100.0) {
            const double b = std::sqrt(bs);
            const double sp = std::sqrt(tp) * phi_cdf(-b / a);
            bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
        }
        a /= 2.0;
        double sum = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            for (double x : {1.0 - rule.nodes[j], 1.0 + rule.nodes[j]}) {
                double xs = (a * x) * (a * x);
                double asr_x = -(bs / xs + hk) / 2.0;
                if (asr_x <= -100.0) continue;
                double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                double rs = std::sqrt(1.0 - xs);
                double ep = std::exp(-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
                sum += rule.weights[j] * std::exp(asr_x) * (sp - ep);
            }
        }
        bvn = (a * sum - bvn) / tp;
    }
    if (r > 0) {
        bvn += phi_cdf(-std::max(h, k));
    } else if (h >= k) {
        bvn = -bvn;
    } else {
        double lower = h < 0 ? phi_cdf(k) - phi_cdf(h) : phi_cdf(-h) - phi_cdf(-k);
        bvn = lower - bvn;
    }
    return bvn;
}

void check_bivariate_args(double h, double k, double rho) {
    if (std::isnan(h) || std::isnan(k) || std::isnan(rho)) {
        throw DomainError("bivariate_normal_cdf: NaN argument");
    }
    if (rho < -1.0 || rho > 1.0) {
        throw DomainError("bivariate_normal_cdf: |rho| > 1 (rho = " + std::to_string(rho) + ")");
    }
}

}  // namespace

double std_normal_pdf(double x) noexcept {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) {
    if (!std::isfinite(x)) throw DomainError("std_normal_cdf: non-finite argument");
    return phi_cdf(x);
}

double std_normal_log_cdf(double x) noexcept {
    if (std::isnan(x)) return x;
    if (x == kInf) return 0.0;
    if (x == -kInf) return -kInf;
    if (x > 0.0) return std::log1p(-phi_cdf(-x));
    if (x > -30.0) return std::log(phi_cdf(x));
    // Asymptotic expansion of the Mills ratio.
    const double z = 1.0 / (x * x);
    const double series = 1.0 - z * (1.0 - z * (3.0 - z * (15.0 - z * 105.0)));
    return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * kPi) + std::log(series);
}

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("std_normal_quantile: p must lie in (0,1), got " + std::to_string(p));
    }
    double x = std_normal_quantile_as241(p);
    // Halley step; the residual is taken in whichever tail keeps it relative.
    const double e = x < 0 ? phi_cdf(x) - p : (1.0 - p) - phi_cdf(-x);
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    if (std::isfinite(u)) x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double std_normal_quantile_as241(double p) noexcept {
    const double q = p - 0.5;
    double x;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        x = q *
            (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
              4.2313330701600911252e+1) * r + 1.0);
    } else {
        double r = q < 0 ? p : 1.0 - p;
        r = std::sqrt(-std::log(r));
        if (r <= 5.0) {
            r -= 1.6;
            x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                    3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                  4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                    6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                  2.05319162663775882187e+0) * r + 1.0);
        } else {
            r -= 5.0;
            x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                    2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                  5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                    1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                  5.99832206555887937690e-1) * r + 1.0);
        }
        if (q < 0) x = -x;
    }
    return x;
}

double bivariate_normal_pdf(double h, double k, double rho) noexcept {
    const double one_minus = (1.0 - rho) * (1.0 + rho);
    const double quad = (h * h - 2.0 * rho * h * k + k * k) / one_minus;
    return std::exp(-0.5 * quad) / (2.0 * kPi * std::sqrt(one_minus));
}

double bivariate_normal_cdf(double h, double k, double rho) {
    check_bivariate_args(h, k, rho);
    if (h == -kInf || k == -kInf) return 0.0;
    if (h == kInf) return phi_cdf(k);
    if (k == kInf) return phi_cdf(h);
    if (rho == 0.0) return phi_cdf(h) * phi_cdf(k);
    if (rho == 1.0) return phi_cdf(std::min(h, k));
    if (rho == -1.0) return std::max(0.0, phi_cdf(h) - phi_cdf(-k));
    double p;
    if (std::abs(rho) < 0.925) {
        p = phi_cdf(h) * phi_cdf(k) + upper_orthant_excess(-h, -k, rho);
    } else {
        p = upper_orthant_strong(-h, -k, rho);
    }
    return std::clamp(p, 0.0, 1.0);
}

double bivariate_normal_excess(double h, double k, double rho) {
    check_bivariate_args(h, k, rho);
    if (std::isinf(h) || std::isinf(k) || rho == 0.0) return 0.0;
    if (std::abs(rho) < 0.925) return upper_orthant_excess(-h, -k, rho);
    return bivariate_normal_cdf(h, k, rho) - phi_cdf(h) * phi_cdf(k);
}

}  // namespace merton
