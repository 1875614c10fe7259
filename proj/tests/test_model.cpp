#include <cmath>

#include <doctest.h>

#include "merton/error.hpp"
#include "merton/model.hpp"
#include "oracles.hpp"

using namespace merton;

namespace {

// f from the quadrature oracle for Phi2
double f_oracle(double p, double rho) {
    const double y = oracle::quantile(p);
    return (oracle::bivariate_cdf(y, y, rho) - p * p) / (p * (1.0 - p));
}

}  // namespace

TEST_CASE("model parameters") {
    const ModelParams m(0.1, 0.3, DecayKernel::exponential(0.5));
    CHECK(std::abs(m.threshold() - oracle::quantile(0.1)) < 1e-12);
    CHECK_THROWS_AS(ModelParams(0.0, 0.2, DecayKernel::power(1.0)), DomainError);
    CHECK_THROWS_AS(ModelParams(1.0, 0.2, DecayKernel::power(1.0)), DomainError);
    CHECK_THROWS_AS(ModelParams(0.1, 1.0, DecayKernel::power(1.0)), DomainError);
    CHECK_THROWS_AS(ModelParams(0.1, -0.1, DecayKernel::power(1.0)), DomainError);
}

TEST_CASE("conditional default probability") {
    const ModelParams indep(0.07, 0.0, DecayKernel::exponential(0.5));
    for (double s : {-3.0, 0.0, 2.5}) CHECK(conditional_pd(indep, s) == doctest::Approx(0.07).epsilon(1e-14));

    CHECK(conditional_pd(ModelParams(0.5, 0.5, DecayKernel::power(1.0)), 0.0) == doctest::Approx(0.5).epsilon(1e-14));

    const ModelParams m(0.1, 0.25, DecayKernel::power(1.0));
    const double expected = oracle::Phi((oracle::quantile(0.1) + 0.5) / std::sqrt(0.75));
    CHECK(std::abs(conditional_pd(m, -1.0) - expected) < 1e-12);
    CHECK(std::abs(conditional_pd(m, -1.0) - 0.1834) < 1e-3);

    for (double s = -5.0; s < 5.0; s += 0.1) CHECK(conditional_pd(m, s + 0.1) < conditional_pd(m, s));

    for (double rho : {0.05, 0.4, 0.9}) {
        const ModelParams q(0.03, rho, DecayKernel::power(1.0));
        const double mean = oracle::normal_expectation([&](double s) { return conditional_pd(q, s); });
        CHECK(std::abs(mean - 0.03) < 1e-10);
    }
}

TEST_CASE("asset to default correlation mapping") {
    for (double p : {0.001, 0.01, 0.1, 0.3, 0.5}) {
        CHECK(std::abs(map_asset_to_default(p, 0.0)) < 1e-9);
        CHECK(std::abs(map_asset_to_default(p, 1.0) - 1.0) < 1e-9);
    }
    CHECK(std::abs(map_asset_to_default(0.5, 0.5) - 1.0 / 3.0) < 1e-8);
    for (double p : {0.01, 0.2}) {
        for (double rho : {0.05, 0.35, 0.8}) {
            CHECK(std::abs(map_asset_to_default(p, rho) - f_oracle(p, rho)) < 1e-7);
        }
    }
    CHECK_THROWS_AS(map_asset_to_default(0.0, 0.3), DomainError);
    CHECK_THROWS_AS(map_asset_to_default(1.0, 0.3), DomainError);
}

TEST_CASE("f is increasing and satisfies the scaling inequality") {
    for (double p : {0.005, 0.1, 0.5}) {
        double prev = -1.0;
        for (int i = 0; i <= 100; ++i) {
            const double v = map_asset_to_default(p, i / 100.0);
            CHECK(v > prev);
            prev = v;
        }
        for (int a = 0; a <= 20; ++a) {
            const double rho = a / 20.0;
            const double f_rho = map_asset_to_default(p, rho);
            for (int b = 0; b <= 20; ++b) {
                const double x = b / 20.0;
                CHECK(map_asset_to_default(p, x * rho) <= x * f_rho + 1e-9);
            }
        }
    }
}

TEST_CASE("inverse mapping") {
    CHECK(map_default_to_asset(0.2, 0.0) == 0.0);
    CHECK(map_default_to_asset(0.2, 1.0) == 1.0);
    CHECK(std::abs(map_default_to_asset(0.5, 1.0 / 3.0) - 0.5) < 1e-6);
    for (double p : {0.001, 0.02, 0.5}) {
        for (double rho = 0.0; rho <= 0.99; rho += 0.03) {
            const double d = map_asset_to_default(p, rho);
            const double back = map_default_to_asset(p, d);
            CHECK(std::abs(map_asset_to_default(p, back) - d) <= 1e-8);
            CHECK(std::abs(back - rho) < 1e-6);
        }
    }
    CHECK_THROWS_AS(map_default_to_asset(0.1, 1.2), DomainError);
    CHECK_THROWS_AS(map_default_to_asset(0.1, -0.01), DomainError);
}

TEST_CASE("tangent slope") {
    const double two_over_pi = 2.0 / oracle::kPi;
    CHECK(std::abs(tangent_slope_A(0.5) - two_over_pi) < 1e-6);
    // finite difference of f at the origin
    for (double p : {0.01, 0.1, 0.5}) {
        const double y = oracle::quantile(p);
        const double h = 1e-4;
        const double fd = (oracle::bivariate_cdf(y, y, h) - oracle::bivariate_cdf(y, y, -h)) / (2 * h) / (p * (1 - p));
        CHECK(std::abs(tangent_slope_A(p, SlopeMode::Plackett) - fd) < 1e-6);
    }
    CHECK(std::abs(tangent_slope_A(0.5, SlopeMode::SquaredCdf) - 1.0) < 1e-12);
    CHECK(std::abs(tangent_slope_A(0.2, SlopeMode::SquaredCdf) - 0.25) < 1e-12);
    for (double p : {1e-6, 0.01, 0.1, 0.5, 0.9}) CHECK(tangent_slope_A(p) > 0.0);
    for (double p : {0.01, 0.1, 0.5}) {
        const double a = tangent_slope_A(p);
        for (int i = 1; i <= 9; ++i) CHECK(a * (i / 10.0) <= map_asset_to_default(p, i / 10.0));
    }
    CHECK_THROWS_AS(tangent_slope_A(0.0), DomainError);
}

TEST_CASE("sandwich bounds") {
    for (double p : {0.01, 0.1, 0.5}) {
        const double a = tangent_slope_A(p);
        for (double rho : {0.1, 0.5, 0.9}) {
            const double f_rho = map_asset_to_default(p, rho);
            for (double d : {0.01, 0.2, 0.6, 0.95}) {
                const double v = map_asset_to_default(p, rho * d);
                CHECK(a * rho * d < v + 1e-9);
                CHECK(v < f_rho * d + 1e-9);
            }
        }
    }
}

TEST_CASE("cross-time default correlation") {
    const ModelParams zero(0.1, 0.0, DecayKernel::power(0.2));
    for (std::size_t t = 1; t < 10; ++t) CHECK(cross_time_default_correlation(zero, t) == doctest::Approx(0.0));

    const ModelParams e(0.05, 0.4, DecayKernel::exponential(0.8));
    for (std::size_t t = 1; t < 40; ++t)
        CHECK(cross_time_default_correlation(e, t + 1) < cross_time_default_correlation(e, t));

    const ModelParams m(0.5, 0.5, DecayKernel::power(1.0));
    const double oracle_value = (0.25 + std::asin(0.25) / (2 * oracle::kPi) - 0.25) / 0.25;
    CHECK(std::abs(cross_time_default_correlation(m, 1) - oracle_value) < 1e-9);
    CHECK(std::abs(cross_time_default_correlation(m, 1) - 0.16086) < 1e-4);

    for (double p : {0.01, 0.3}) {
        const ModelParams q(p, 0.3, DecayKernel::power(0.8));
        const double a = tangent_slope_A(p);
        for (std::size_t t = 1; t < 100000; t *= 3) {
            const double rd = 0.3 * q.kernel().value(t);
            if (rd >= 1e-3) continue;
            const double ratio = cross_time_default_correlation(q, t) / (a * rd);
            CHECK(ratio >= 0.99);
            CHECK(ratio <= 1.01);
        }
    }
}
