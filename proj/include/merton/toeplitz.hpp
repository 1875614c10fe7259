#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "merton/kernel.hpp"

namespace merton {

/// Symmetric Toeplitz correlation matrix, entry(t,t') = lag(|t - t'|), lag(0) = 1.
class CorrelationMatrix {
  public:
    /// Takes d_0..d_{T-1}. Throws DomainError if empty, d_0 != 1 or any |d_i| > 1.
    explicit CorrelationMatrix(std::vector<double> lags);

    std::size_t dim() const noexcept { return lags_.size(); }
    double lag(std::size_t i) const { return lags_.at(i); }
    double operator()(std::size_t t, std::size_t u) const noexcept {
        return lags_[t > u ? t - u : u - t];
    }
    std::span<const double> lags() const noexcept { return lags_; }

  private:
    std::vector<double> lags_;
};

CorrelationMatrix toeplitz_from_kernel(const DecayKernel& kernel, std::size_t dim);

/// Lower-triangular L with L L^T = sigma + jitter_used * I, stored packed by rows.
class CholeskyFactor {
  public:
    CholeskyFactor(std::size_t dim, std::vector<double> packed, double jitter_used);

    std::size_t dim() const noexcept { return dim_; }
    double jitter_used() const noexcept { return jitter_used_; }

    double operator()(std::size_t i, std::size_t j) const noexcept {
        return j > i ? 0.0 : packed_[i * (i + 1) / 2 + j];
    }
    /// Entries L(i,0..i).
    std::span<const double> row(std::size_t i) const noexcept {
        return {packed_.data() + i * (i + 1) / 2, i + 1};
    }

    /// out = L z. Spans must have length dim().
    void apply(std::span<const double> z, std::span<double> out) const;

  private:
    std::size_t dim_;
    std::vector<double> packed_;
    double jitter_used_;
};

/// Cholesky factorization that tolerates semidefinite input by adding
/// jitter * I: first with no jitter, then 1e-12 * 2^j for j = 0, 1, ... while
/// the jitter stays <= max_jitter. Throws NotPsdError carrying the largest
/// jitter tried when every attempt fails.
CholeskyFactor cholesky_psd(const CorrelationMatrix& sigma, double max_jitter = 1e-6);

struct GaussianPath {
    std::vector<double> values;
};

/// L z with z drawn from the counter-based stream (seed, path_index).
GaussianPath sample_gaussian_path(const CholeskyFactor& factor, std::uint64_t seed,
                                  std::uint64_t path_index = 0);

/// Fills z with i.i.d. N(0,1) draws from stream (seed, path_index).
void standard_normal_fill(std::uint64_t seed, std::uint64_t path_index, std::span<double> z);

/*!
 * Maps i.i.d. standard normals to a path with Toeplitz correlation given by
 * a kernel. Exponential kernels use the AR(1) recursion
 *   S_0 = z_0,  S_t = theta S_{t-1} + sqrt(1 - theta^2) z_t
 * when the dimension exceeds ar1_threshold (or always, if forced); every
 * other case goes through cholesky_psd. The AR(1) map is the Cholesky
 * factor of the exponential Toeplitz matrix, so both routes agree up to
 * rounding for the same z.
 */
class PathGenerator {
  public:
    static constexpr std::size_t kAr1Threshold = 4096;

    enum class Method { Cholesky, Ar1 };

    PathGenerator(const DecayKernel& kernel, std::size_t dim, double max_jitter = 1e-6,
                  bool force_ar1 = false);

    std::size_t dim() const noexcept { return dim_; }
    Method method() const noexcept { return method_; }
    double jitter_used() const noexcept { return factor_ ? factor_->jitter_used() : 0.0; }
    /// The factor for Method::Cholesky, null for Method::Ar1.
    const CholeskyFactor* cholesky() const noexcept { return factor_ ? &*factor_ : nullptr; }
    /// theta for Method::Ar1.
    double ar1_coefficient() const noexcept { return theta_; }

    /// out = M z, with M the Cholesky factor or the AR(1) recursion.
    void transform(std::span<const double> z, std::span<double> out) const;

    GaussianPath sample(std::uint64_t seed, std::uint64_t path_index) const;

  private:
    std::size_t dim_;
    Method method_;
    double theta_ = 0.0;
    std::optional<CholeskyFactor> factor_;  // unset for Ar1
};

}  // namespace merton
