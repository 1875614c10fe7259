#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "merton/kernel.hpp"
#include "merton/likelihood.hpp"
#include "merton/model.hpp"
#include "merton/portfolio.hpp"

namespace merton {

/// Closed interval; lo == hi pins the parameter.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool pinned() const noexcept { return lo == hi; }
    double width() const noexcept { return hi - lo; }
    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

/*!
 * Estimation settings. The boxes are the support of the uniform prior, so
 * MAP is maximum likelihood inside them.
 *
 * map_fit evaluates every candidate with the same `seed` (common random
 * numbers, a smooth Monte-Carlo surface). pseudo_marginal_mcmc instead draws
 * a fresh path seed for every proposal, as the pseudo-marginal construction
 * requires.
 */
struct FitConfig {
    std::size_t n_paths = 4096;
    std::uint64_t seed = 1;
    Interval p{1e-6, 0.5};
    Interval rho_A{0.0, 0.999};
    Interval theta{0.0, 0.999};
    Interval gamma{1e-3, 20.0};
    std::size_t n_starts = 8;
    double simplex_tolerance = 1e-6;
    std::size_t max_evaluations = 2000;
    /// Estimator behind every likelihood evaluation; n_paths is its path or
    /// particle count.
    LikelihoodEstimator estimator = LikelihoodEstimator::Sequential;
    /// When nonzero, the multistart runs at this path count and only the best
    /// optimum is refined at n_paths.
    std::size_t screening_paths = 0;
    /// Discarded adaptation iterations before pseudo_marginal_mcmc records draws.
    std::size_t mcmc_warmup = 500;

    const Interval& kernel_bounds(KernelFamily family) const noexcept {
        return family == KernelFamily::Exponential ? theta : gamma;
    }

    /// Throws DomainError when a box is empty, non-finite or leaves the
    /// parameter's domain, or n_paths < 2.
    void validate() const;
};

/// (p, rho_A, kernel parameter).
using ParameterTriple = std::array<double, 3>;

/*!
 * Unconstrained coordinates for the free (non-pinned) parameters:
 * p, rho_A and theta use a logit of their position in the box; gamma uses a
 * logit of its position on a log scale.
 */
class ParameterSpace {
  public:
    ParameterSpace(KernelFamily family, const FitConfig& config);

    KernelFamily family() const noexcept { return family_; }
    std::size_t free_dim() const noexcept { return free_.size(); }
    const Interval& bounds(std::size_t j) const noexcept { return bounds_[j]; }

    ParameterTriple to_natural(std::span<const double> u) const;
    std::vector<double> to_unconstrained(const ParameterTriple& x) const;
    /// Position of each coordinate in its box as a fraction in [0,1].
    ParameterTriple from_fraction(const ParameterTriple& fraction) const;
    ParameterTriple to_fraction(const ParameterTriple& x) const;
    ModelParams params(const ParameterTriple& x) const;

    /// log |dx/du| for the free coordinates.
    double log_jacobian(std::span<const double> u) const;
    /// log density of the uniform prior on the free parameters.
    double log_prior_density() const noexcept;

  private:
    KernelFamily family_;
    std::array<Interval, 3> bounds_;
    std::vector<std::size_t> free_;
};

struct StartOutcome {
    ParameterTriple start{};
    ParameterTriple optimum{};
    double log_posterior = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

struct FitResult {
    KernelFamily family = KernelFamily::Exponential;
    ModelParams params_hat{0.5, 0.0, DecayKernel::exponential(0.0)};
    double rho_D_hat = 0.0;
    double log_likelihood = 0.0;
    /// log likelihood + log uniform prior density.
    double log_posterior = 0.0;
    bool converged = false;
    bool non_identifiable = false;
    std::size_t evaluations = 0;
    /// max - min of each parameter over the multistart optima.
    ParameterTriple parameter_spread{};
    /// Best minus median multistart log posterior.
    double log_posterior_gap = 0.0;
    std::vector<StartOutcome> starts;
    std::optional<double> waic;
    std::optional<double> wbic;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
};

/// Latin-hypercube start fractions in [0,1]^3 (pinned coordinates ignored later).
std::vector<ParameterTriple> latin_hypercube(std::size_t count, std::uint64_t seed);

/// MAP estimate of (p, rho_A, kernel parameter) by multistart Nelder-Mead on
/// the Monte-Carlo likelihood with common random numbers.
FitResult map_fit(const DefaultHistory& history, KernelFamily family, const FitConfig& config);

}  // namespace merton
