#include <cmath>
#include <vector>

#include <doctest.h>

#include "merton/error.hpp"
#include "merton/kernel.hpp"
#include "merton/random.hpp"
#include "merton/toeplitz.hpp"

using namespace merton;

TEST_CASE("kernel values") {
    CHECK(DecayKernel::power(1.0).value(1) == 0.5);
    CHECK(DecayKernel::exponential(0.8).value(3) == doctest::Approx(0.512).epsilon(1e-15));
    CHECK(DecayKernel::power(0.5).value(99) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(DecayKernel::exponential(0.0).value(0) == 1.0);
    CHECK(DecayKernel::power(3.0).value(0) == 1.0);
    for (const auto& k : {DecayKernel::exponential(0.7), DecayKernel::power(0.4)}) {
        for (std::size_t i = 1; i < 200; ++i) CHECK(k.value(i) <= k.value(i - 1));
    }
    CHECK_THROWS_AS(DecayKernel::exponential(1.2), DomainError);
    CHECK_THROWS_AS(DecayKernel::power(-0.1), DomainError);
    CHECK(parse_kernel_family("power") == KernelFamily::Power);
    CHECK(parse_kernel_family("exp") == KernelFamily::Exponential);
    CHECK_THROWS_AS(parse_kernel_family("gauss"), DomainError);
}

TEST_CASE("toeplitz matrices from kernels") {
    const auto id = toeplitz_from_kernel(DecayKernel::exponential(0.0), 3);
    const auto ones = toeplitz_from_kernel(DecayKernel::power(0.0), 3);
    for (std::size_t t = 0; t < 3; ++t) {
        for (std::size_t u = 0; u < 3; ++u) {
            CHECK(id(t, u) == (t == u ? 1.0 : 0.0));
            CHECK(ones(t, u) == 1.0);
        }
    }
    const auto s = toeplitz_from_kernel(DecayKernel::exponential(0.9), 3);
    CHECK(s(0, 1) == doctest::Approx(0.9));
    CHECK(s(2, 1) == doctest::Approx(0.9));
    CHECK(s(0, 2) == doctest::Approx(0.81));
    CHECK(s(2, 0) == doctest::Approx(0.81));
    CHECK_THROWS_AS(toeplitz_from_kernel(DecayKernel::exponential(0.5), 0), DomainError);
    CHECK_THROWS_AS(CorrelationMatrix({0.5, 0.1}), DomainError);
}

TEST_CASE("cholesky with jitter") {
    const auto id = cholesky_psd(toeplitz_from_kernel(DecayKernel::exponential(0.0), 4));
    CHECK(id.jitter_used() == 0.0);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(id(i, j) == (i == j ? 1.0 : 0.0));

    const auto two = cholesky_psd(CorrelationMatrix({1.0, 0.6}));
    CHECK(two.jitter_used() == 0.0);
    CHECK(two(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(two(1, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(two(1, 1) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(two(0, 1) == 0.0);

    const auto ones = cholesky_psd(toeplitz_from_kernel(DecayKernel::power(0.0), 3));
    CHECK(ones.jitter_used() <= 1e-8);

    // an indefinite matrix: lags (1, 0.9, -0.9)
    try {
        (void)cholesky_psd(CorrelationMatrix({1.0, 0.9, -0.9}), 1e-6);
        FAIL("expected NotPsdError");
    } catch (const NotPsdError& e) {
        CHECK(e.failed_jitter() > 0.0);
        CHECK(e.failed_jitter() <= 1e-6);
    }
}

TEST_CASE("kernel matrices factor with small jitter up to T = 2048") {
    const std::vector<DecayKernel> kernels{DecayKernel::exponential(0.5), DecayKernel::exponential(0.999),
                                           DecayKernel::power(1e-3), DecayKernel::power(0.3),
                                           DecayKernel::power(2.0)};
    for (const auto& k : kernels) {
        const auto sigma = toeplitz_from_kernel(k, 2048);
        const auto L = cholesky_psd(sigma, 1e-8);
        CHECK(L.jitter_used() <= 1e-8);
        // spot-check the reconstruction L L^T = sigma + jitter I
        for (std::size_t i : {0u, 17u, 1000u, 2047u}) {
            for (std::size_t j : {0u, 5u, 1999u}) {
                if (j > i) continue;
                double s = 0.0;
                for (std::size_t m = 0; m <= j; ++m) s += L(i, m) * L(j, m);
                CHECK(std::abs(s - sigma(i, j) - (i == j ? L.jitter_used() : 0.0)) < 1e-10);
            }
        }
    }
}

TEST_CASE("gaussian path sampling moments") {
    const std::size_t paths = 100000;
    const auto id = cholesky_psd(toeplitz_from_kernel(DecayKernel::exponential(0.0), 3));
    std::vector<double> sum(3, 0.0), sq(3, 0.0);
    for (std::size_t i = 0; i < paths; ++i) {
        const auto g = sample_gaussian_path(id, 42, i);
        for (std::size_t t = 0; t < 3; ++t) {
            sum[t] += g.values[t];
            sq[t] += g.values[t] * g.values[t];
        }
    }
    for (std::size_t t = 0; t < 3; ++t) {
        const double mean = sum[t] / paths;
        CHECK(std::abs(mean) < 0.02);
        CHECK(std::abs(sq[t] / paths - mean * mean - 1.0) < 0.02);
    }

    const auto a = sample_gaussian_path(id, 7, 3);
    const auto b = sample_gaussian_path(id, 7, 3);
    CHECK(a.values == b.values);
    CHECK(sample_gaussian_path(id, 7, 4).values != a.values);

    const auto pair = cholesky_psd(CorrelationMatrix({1.0, 0.9}));
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < paths; ++i) {
        const auto g = sample_gaussian_path(pair, 99, i);
        const double x = g.values[0], y = g.values[1];
        sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
    }
    const double n = static_cast<double>(paths);
    const double cov = sxy / n - sx * sy / n / n;
    const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
    CHECK(std::abs(corr - 0.9) < 0.01);
}

TEST_CASE("empirical lag correlations of sampled paths match the kernel") {
    // 3 sigma band for a sample correlation: 3 (1 - r^2) / sqrt(n)
    const std::size_t paths = 40000, T = 12;
    for (const auto& k : {DecayKernel::exponential(0.7), DecayKernel::power(0.4)}) {
        const PathGenerator gen(k, T);
        std::vector<double> s(T, 0.0), ss(T, 0.0), cross(T * T, 0.0);
        for (std::size_t i = 0; i < paths; ++i) {
            const auto g = gen.sample(5, i);
            for (std::size_t t = 0; t < T; ++t) {
                s[t] += g.values[t];
                ss[t] += g.values[t] * g.values[t];
                for (std::size_t u = 0; u < t; ++u) cross[t * T + u] += g.values[t] * g.values[u];
            }
        }
        const double n = static_cast<double>(paths);
        for (std::size_t t = 1; t < T; ++t) {
            for (std::size_t u : {std::size_t{0}, t - 1}) {
                const double cov = cross[t * T + u] / n - s[t] * s[u] / n / n;
                const double r = cov / std::sqrt((ss[t] / n - s[t] * s[t] / n / n) * (ss[u] / n - s[u] * s[u] / n / n));
                const double d = k.value(t - u);
                CHECK(std::abs(r - d) <= 3.0 * (1.0 - d * d) / std::sqrt(n));
            }
        }
    }
}

TEST_CASE("AR(1) recursion equals the exponential Cholesky factor") {
    const std::size_t T = 64;
    const auto k = DecayKernel::exponential(0.85);
    const PathGenerator chol(k, T);
    const PathGenerator ar1(k, T, 1e-6, true);
    CHECK(chol.method() == PathGenerator::Method::Cholesky);
    CHECK(ar1.method() == PathGenerator::Method::Ar1);
    CHECK(ar1.cholesky() == nullptr);
    CHECK(ar1.ar1_coefficient() == 0.85);
    std::vector<double> z(T), a(T), b(T);
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        standard_normal_fill(11, rep, z);
        chol.transform(z, a);
        ar1.transform(z, b);
        for (std::size_t t = 0; t < T; ++t) CHECK(std::abs(a[t] - b[t]) < 1e-10);
    }
    CHECK(PathGenerator(k, PathGenerator::kAr1Threshold + 1).method() == PathGenerator::Method::Ar1);
    CHECK(PathGenerator(DecayKernel::power(0.5), 10, 1e-6, true).method() == PathGenerator::Method::Cholesky);
}

TEST_CASE("counter streams do not depend on draw order") {
    CounterRng a(3, 9), b(3, 9);
    std::vector<double> first;
    for (int i = 0; i < 100; ++i) first.push_back(a.uniform());
    for (int i = 0; i < 100; ++i) CHECK(b.uniform() == first[i]);
    CHECK(derive_seed(1, 2) != derive_seed(2, 1));
    double mean = 0.0;
    CounterRng u(8, 0);
    for (int i = 0; i < 100000; ++i) {
        const double x = u.uniform();
        CHECK_UNARY(x > 0.0 && x < 1.0);
        mean += x;
    }
    CHECK(std::abs(mean / 100000 - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / 100000));
}
