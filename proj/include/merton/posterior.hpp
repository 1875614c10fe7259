#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "merton/fit.hpp"
#include "merton/kernel.hpp"
#include "merton/portfolio.hpp"

namespace merton {

struct PosteriorDraw {
    ParameterTriple x{};
    /// Likelihood estimate carried by the chain at this state.
    double loglik = 0.0;
    /// One-step predictive terms of that estimate (sequential estimator only).
    std::vector<double> log_predictive;
};

struct PosteriorSample {
    KernelFamily family = KernelFamily::Exponential;
    double beta = 1.0;
    std::vector<PosteriorDraw> draws;
    /// Fraction of accepted proposals after warm-up.
    double acceptance_rate = 0.0;
    /// acceptance_rate < 0.05.
    bool low_acceptance = false;
    /// Proposal standard deviation per free coordinate after adaptation.
    std::vector<double> step_sizes;
};

/*!
 * Pseudo-marginal random-walk Metropolis on the unconstrained coordinates of
 * ParameterSpace, targeting uniform prior x (likelihood estimate)^beta.
 *
 * Each proposal gets its own likelihood seed, derive_seed(config.seed, i);
 * the current state's estimate is kept, never recomputed. The proposal
 * covariance is adapted during config.mcmc_warmup discarded iterations:
 * a global scale is tuned every 50 iterations toward acceptance in
 * [0.2, 0.5], and halfway through the shape is replaced by the covariance
 * of the warm-up draws so far.
 *
 * The chain starts at `start` or, by default, at moment estimates of p and
 * rho_A with the kernel parameter mid-box. Throws DomainError if n_draws < 100,
 * beta <= 0 or the history is empty.
 */
PosteriorSample pseudo_marginal_mcmc(const DefaultHistory& history, KernelFamily family,
                                     const FitConfig& config, std::size_t n_draws, double beta,
                                     std::optional<ParameterTriple> start = std::nullopt);

enum class WaicUnit {
    /// p(k_t | params) with S_t ~ N(0,1), ignoring the other years.
    YearMarginal,
    /// p(k_t | k_1..k_{t-1}, params) from the sequential estimator.
    OneStepPredictive,
};

const char* to_string(WaicUnit unit) noexcept;
/// "year-marginal"/"marginal" or "one-step"/"predictive".
WaicUnit parse_waic_unit(std::string_view name);

struct WaicResult {
    double waic = 0.0;
    double lppd = 0.0;
    double p_waic = 0.0;
};

/*!
 * WAIC = -2 (lppd - p_waic) over yearly pointwise likelihoods.
 *
 * YearMarginal evaluates every draw on n_paths stratified normal nodes
 * Phi^{-1}((i + 1/2) / n_paths). OneStepPredictive uses the terms stored in
 * the draws and needs a sample produced with the sequential estimator.
 * Sums over draws run in sorted order, so the result does not depend on the
 * order of the draws. Throws DomainError with fewer than 2 draws.
 */
WaicResult waic(const DefaultHistory& history, const PosteriorSample& sample, std::size_t n_paths,
                WaicUnit unit = WaicUnit::YearMarginal);

/// 1 / log m. Throws DomainError for m < 2.
double wbic_temperature(std::size_t years);

/// -2 x mean full-history log-likelihood over a pseudo-marginal chain at
/// beta = 1 / log m. Same -2 log scale as WAIC.
double wbic(const DefaultHistory& history, KernelFamily family, const FitConfig& config,
            std::size_t n_draws, std::optional<ParameterTriple> start = std::nullopt);

/// -2 x mean loglik of an existing tempered sample.
double wbic_from_sample(const PosteriorSample& sample);

struct FamilyCriteria {
    KernelFamily family = KernelFamily::Exponential;
    WaicResult waic;
    double wbic = 0.0;
    double acceptance_rate = 0.0;
    double wbic_acceptance_rate = 0.0;
};

/// WAIC and WBIC for both kernel families.
std::vector<FamilyCriteria> compare_families(const DefaultHistory& history, const FitConfig& config,
                                             std::size_t n_draws, WaicUnit unit = WaicUnit::YearMarginal);

}  // namespace merton
