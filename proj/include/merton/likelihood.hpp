#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "merton/model.hpp"
#include "merton/portfolio.hpp"

namespace merton {

/// i.i.d. standard normal vectors, one per Monte-Carlo path. Path i comes
/// from counter stream (seed, i), so a fixed (seed, n_paths, T) always
/// yields the same draws; reusing one instance across parameter values gives
/// common random numbers.
class PathDraws {
  public:
    PathDraws(std::size_t n_paths, std::size_t dim, std::uint64_t seed);

    std::size_t n_paths() const noexcept { return n_paths_; }
    std::size_t dim() const noexcept { return dim_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::span<const double> path(std::size_t i) const noexcept {
        return {z_.data() + i * dim_, dim_};
    }

  private:
    std::size_t n_paths_;
    std::size_t dim_;
    std::uint64_t seed_;
    std::vector<double> z_;
};

struct LikelihoodEstimate {
    double loglik = 0.0;
    /// Delta-method standard error of loglik from the spread of path likelihoods.
    double mc_std_error = 0.0;
    /// Every path likelihood underflowed; loglik is -infinity.
    bool degenerate = false;
};

/// log C(n,k) + k log g + (n-k) log(1-g), with log g and log(1-g) supplied.
double binomial_log_pmf(std::int64_t n, std::int64_t k, double log_g, double log_1mg) noexcept;

/// (log Phi(x), log Phi(-x)) from a single erfc evaluation.
struct LogCdfPair {
    double lower;
    double upper;
};
LogCdfPair std_normal_log_cdf_pair(double x) noexcept;

/*!
 * Monte-Carlo marginal likelihood of a default history:
 *
 *   P(k_1..k_T) ~ (1/N) sum_i prod_t Binom(k_t; n_t, G(S_t^i))
 *
 * with S^i correlated factor paths built from the draws. Per-path log
 * products are combined by log-sum-exp. Binomial coefficients are included.
 */
LikelihoodEstimate mc_log_likelihood(const DefaultHistory& history, const ModelParams& params,
                                     const PathDraws& draws);

LikelihoodEstimate mc_log_likelihood(const DefaultHistory& history, const ModelParams& params,
                                     std::size_t n_paths, std::uint64_t seed);

struct SequentialEstimate {
    double loglik = 0.0;
    /// log p(k_t | k_1..k_{t-1}); sums to loglik.
    std::vector<double> log_predictive;
    /// Smallest effective sample size seen, as a fraction of the particle count.
    double min_ess_fraction = 1.0;
    bool degenerate = false;
};

/*!
 * Unbiased sequential Monte-Carlo estimate of the same probability
 * P(k_1..k_T) that mc_log_likelihood targets.
 *
 * Particles carry the factor path year by year. S_t given the particle's past
 * is N(m_t, sigma_t^2) (Cholesky rows, or the AR(1) recursion for
 * exponential kernels). S_t is proposed from a defensive mixture of that
 * prior (weight 0.1) and its product with a Gaussian approximation of the
 * year's binomial likelihood in S, weighted by prior * likelihood / proposal,
 * and particles are systematically resampled when the effective sample size
 * falls below half. The mixture keeps the weights bounded.
 */
SequentialEstimate smc_log_likelihood(const DefaultHistory& history, const ModelParams& params,
                                      std::size_t n_particles, std::uint64_t seed);

enum class LikelihoodEstimator {
    /// smc_log_likelihood
    Sequential,
    /// mc_log_likelihood
    PathAverage,
};

const char* to_string(LikelihoodEstimator estimator) noexcept;
/// "sequential"/"smc" or "path-average"/"naive".
LikelihoodEstimator parse_likelihood_estimator(std::string_view name);

/// Full-history log-likelihood with the chosen estimator and N paths or
/// particles. `log_predictive`, when given, receives the sequential
/// estimator's one-step terms (left empty for PathAverage).
double estimate_log_likelihood(const DefaultHistory& history, const ModelParams& params,
                               LikelihoodEstimator estimator, std::size_t n, std::uint64_t seed,
                               std::vector<double>* log_predictive = nullptr);

/// log of the per-year marginal likelihood p(k_t | p, rho_A), estimated as
/// the mean of Binom(k_t; n_t, G(s)) over the standard normal `nodes`. The
/// kernel does not enter: each S_t is marginally N(0,1).
std::vector<double> year_marginal_log_likelihoods(const DefaultHistory& history,
                                                  const ModelParams& params,
                                                  std::span<const double> nodes);

}  // namespace merton
