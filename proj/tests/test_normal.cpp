#include <cmath>
#include <limits>

#include <doctest.h>

#include "merton/error.hpp"
#include "merton/normal.hpp"
#include "oracles.hpp"

using namespace merton;

TEST_CASE("normal cdf basics") {
    CHECK(std_normal_cdf(0.0) == 0.5);
    for (double x : {-7.5, -3.0, -1.0, -0.1, 0.4, 2.0, 6.0}) {
        CHECK(std::abs(std_normal_cdf(x) - (1.0 - std_normal_cdf(-x))) < 1e-15);
    }
    const double tail = oracle::integrate([](double t) { return oracle::phi(t); }, -40.0, -1.959964);
    CHECK(std::abs(tail - 0.025) < 1e-6);
    CHECK(std::abs(std_normal_cdf(-1.959964) - tail) < 1e-12);
}

TEST_CASE("normal cdf matches quadrature and is monotone") {
    double prev = 0.0;
    for (double x = -9.0; x <= 9.0; x += 0.37) {
        const double v = std_normal_cdf(x);
        const double ref = oracle::integrate([](double t) { return oracle::phi(t); }, -40.0, x);
        CHECK(std::abs(v - ref) < 1e-12);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("normal cdf rejects non-finite input") {
    CHECK_THROWS_AS(std_normal_cdf(std::numeric_limits<double>::quiet_NaN()), DomainError);
    CHECK_THROWS_AS(std_normal_cdf(std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("log cdf in the far tail") {
    for (double x : {-5.0, -20.0, -35.0}) {
        CHECK(std_normal_log_cdf(x) == doctest::Approx(std::log(oracle::Phi(x))).epsilon(1e-12));
    }
    // Phi(-40) underflows in double; compare with the asymptotic series to leading orders
    const double x = -40.0;
    const double ref = -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * oracle::kPi) + std::log1p(-1.0 / (x * x) + 3.0 / std::pow(x, 4));
    CHECK(std_normal_log_cdf(x) == doctest::Approx(ref).epsilon(1e-10));
    CHECK(std_normal_log_cdf(-std::numeric_limits<double>::infinity()) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("quantile") {
    CHECK(std_normal_quantile(0.5) == 0.0);
    for (double x = -6.0; x <= 6.0; x += 0.25) {
        CHECK(std::abs(std_normal_quantile(std_normal_cdf(x)) - x) < 1e-8);
    }
    const double ref = oracle::quantile(0.0151);
    CHECK(std::abs(ref - (-2.16746)) < 1e-5);
    CHECK(std::abs(std_normal_quantile(0.0151) - ref) < 1e-12);
    CHECK_THROWS_AS(std_normal_quantile(0.0), DomainError);
    CHECK_THROWS_AS(std_normal_quantile(1.0), DomainError);
    CHECK(std::abs(std_normal_quantile_as241(0.0151) - ref) < 1e-13);
}

TEST_CASE("bivariate cdf closed forms") {
    CHECK(bivariate_normal_cdf(0, 0, 0) == doctest::Approx(0.25).epsilon(1e-15));
    const double third = 0.25 + std::asin(0.5) / (2.0 * oracle::kPi);
    CHECK(std::abs(third - 1.0 / 3.0) < 1e-15);
    CHECK(std::abs(bivariate_normal_cdf(0, 0, 0.5) - 1.0 / 3.0) < 1e-9);
    CHECK(std::abs(oracle::bivariate_cdf(0, 0, 0.5) - 1.0 / 3.0) < 1e-9);
    for (double h : {-2.0, 0.3, 1.7}) {
        for (double k : {-1.0, 0.0, 2.5}) {
            CHECK(bivariate_normal_cdf(h, k, 1.0) == doctest::Approx(oracle::Phi(std::min(h, k))).epsilon(1e-15));
            CHECK(bivariate_normal_cdf(h, k, -1.0) == doctest::Approx(std::max(0.0, oracle::Phi(h) + oracle::Phi(k) - 1.0)).epsilon(1e-15));
        }
    }
}

TEST_CASE("bivariate cdf invariants") {
    const double inf = std::numeric_limits<double>::infinity();
    for (double h : {-3.1, -0.4, 0.0, 0.9, 2.2}) {
        for (double k : {-2.0, 0.5, 1.1}) {
            CHECK(std::abs(bivariate_normal_cdf(h, k, 0.0) - oracle::Phi(h) * oracle::Phi(k)) < 1e-10);
            CHECK(std::abs(bivariate_normal_cdf(inf, k, 0.4) - oracle::Phi(k)) < 1e-10);
            CHECK(bivariate_normal_cdf(-inf, k, 0.4) == 0.0);
            for (double rho : {-0.97, -0.6, -0.1, 0.2, 0.7, 0.93, 0.995}) {
                CHECK(std::abs(bivariate_normal_cdf(h, k, rho) - bivariate_normal_cdf(k, h, rho)) < 1e-15);
                const double excess = bivariate_normal_excess(h, k, rho);
                CHECK(std::abs(excess - (bivariate_normal_cdf(h, k, rho) - oracle::Phi(h) * oracle::Phi(k))) < 1e-14);
            }
        }
    }
    CHECK_THROWS_AS(bivariate_normal_cdf(0, 0, 1.0001), DomainError);
    CHECK_THROWS_AS(bivariate_normal_cdf(std::nan(""), 0, 0.2), DomainError);
}

TEST_CASE("Plackett identity: d Phi2 / d rho equals the density") {
    const double step = 1e-5;
    for (double h : {-1.5, 0.0, 0.8}) {
        for (double k : {-0.7, 1.2}) {
            for (double rho : {-0.8, -0.3, 0.1, 0.5, 0.9, 0.95}) {
                const double fd = (bivariate_normal_cdf(h, k, rho + step) - bivariate_normal_cdf(h, k, rho - step)) / (2 * step);
                const double pdf = bivariate_normal_pdf(h, k, rho);
                CHECK(std::abs(fd - pdf) <= 1e-4 * pdf + 1e-10);
            }
        }
    }
}

TEST_CASE("bivariate cdf against two-dimensional quadrature") {
    for (double h : {-2.5, 0.0, 1.9}) {
        for (double k : {-1.1, 0.6, 3.0}) {
            for (double rho : {-0.9, -0.2, 0.45, 0.85, 0.96}) {
                CHECK(std::abs(bivariate_normal_cdf(h, k, rho) - oracle::bivariate_cdf(h, k, rho)) < 1e-10);
            }
        }
    }
}
