#include "merton/fit.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "merton/error.hpp"
#include "merton/likelihood.hpp"
#include "merton/optimize.hpp"
#include "merton/random.hpp"

namespace merton {

namespace {

double logistic(double u) noexcept { return 1.0 / (1.0 + std::exp(-u)); }

double logit(double f) noexcept {
    f = std::clamp(f, 1e-15, 1.0 - 1e-15);
    return std::log(f / (1.0 - f));
}

void check_interval(const Interval& iv, const char* name, double min, double max, bool open_min,
                    bool open_max) {
    const std::string n(name);
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) throw DomainError(n + " bounds must be finite");
    if (iv.lo > iv.hi) throw DomainError(n + " bounds are empty (lo > hi)");
    if (iv.lo < min || (open_min && iv.lo == min)) throw DomainError(n + " lower bound outside the domain");
    if (iv.hi > max || (open_max && iv.hi == max)) throw DomainError(n + " upper bound outside the domain");
}

constexpr std::size_t kGammaIndex = 2;

}  // namespace

void FitConfig::validate() const {
    if (n_paths < 2) throw DomainError("n_paths must be >= 2");
    if (n_starts < 1) throw DomainError("n_starts must be >= 1");
    check_interval(p, "p", 0.0, 1.0, true, true);
    check_interval(rho_A, "rho_A", 0.0, 1.0, false, true);
    check_interval(theta, "theta", 0.0, 1.0, false, false);
    check_interval(gamma, "gamma", 0.0, std::numeric_limits<double>::max(), false, false);
    if (!gamma.pinned() && gamma.lo <= 0.0) {
        throw DomainError("gamma lower bound must be > 0 unless gamma is pinned");
    }
}

ParameterSpace::ParameterSpace(KernelFamily family, const FitConfig& config)
    : family_(family), bounds_{config.p, config.rho_A, config.kernel_bounds(family)} {
    config.validate();
    for (std::size_t j = 0; j < 3; ++j) {
        if (!bounds_[j].pinned()) free_.push_back(j);
    }
}

ParameterTriple ParameterSpace::from_fraction(const ParameterTriple& fraction) const {
    ParameterTriple x;
    for (std::size_t j = 0; j < 3; ++j) {
        const Interval& b = bounds_[j];
        if (b.pinned()) {
            x[j] = b.lo;
        } else if (j == kGammaIndex && family_ == KernelFamily::Power) {
            x[j] = std::exp(std::log(b.lo) + fraction[j] * (std::log(b.hi) - std::log(b.lo)));
        } else {
            x[j] = b.lo + fraction[j] * b.width();
        }
        x[j] = std::clamp(x[j], b.lo, b.hi);
    }
    return x;
}

ParameterTriple ParameterSpace::to_fraction(const ParameterTriple& x) const {
    ParameterTriple f{};
    for (std::size_t j = 0; j < 3; ++j) {
        const Interval& b = bounds_[j];
        if (b.pinned()) {
            f[j] = 0.5;
        } else if (j == kGammaIndex && family_ == KernelFamily::Power) {
            f[j] = (std::log(x[j]) - std::log(b.lo)) / (std::log(b.hi) - std::log(b.lo));
        } else {
            f[j] = (x[j] - b.lo) / b.width();
        }
    }
    return f;
}

ParameterTriple ParameterSpace::to_natural(std::span<const double> u) const {
    if (u.size() != free_.size()) throw DomainError("ParameterSpace: wrong coordinate count");
    ParameterTriple fraction{0.5, 0.5, 0.5};
    for (std::size_t i = 0; i < free_.size(); ++i) fraction[free_[i]] = logistic(u[i]);
    return from_fraction(fraction);
}

std::vector<double> ParameterSpace::to_unconstrained(const ParameterTriple& x) const {
    const ParameterTriple f = to_fraction(x);
    std::vector<double> u;
    for (std::size_t j : free_) u.push_back(logit(f[j]));
    return u;
}

ModelParams ParameterSpace::params(const ParameterTriple& x) const {
    return ModelParams(x[0], x[1], DecayKernel::of(family_, x[2]));
}

double ParameterSpace::log_jacobian(std::span<const double> u) const {
    const ParameterTriple x = to_natural(u);
    double s = 0.0;
    for (std::size_t i = 0; i < free_.size(); ++i) {
        const std::size_t j = free_[i];
        // log(sigma(u) (1 - sigma(u))), stable in both tails
        const double log_dsig = -std::abs(u[i]) - 2.0 * std::log1p(std::exp(-std::abs(u[i])));
        const Interval& b = bounds_[j];
        if (j == kGammaIndex && family_ == KernelFamily::Power) {
            s += std::log(x[j]) + std::log(std::log(b.hi) - std::log(b.lo)) + log_dsig;
        } else {
            s += std::log(b.width()) + log_dsig;
        }
    }
    return s;
}

double ParameterSpace::log_prior_density() const noexcept {
    double s = 0.0;
    for (std::size_t j : free_) s -= std::log(bounds_[j].width());
    return s;
}

std::vector<ParameterTriple> latin_hypercube(std::size_t count, std::uint64_t seed) {
    CounterRng rng(seed, 0x4c48u);
    std::vector<ParameterTriple> points(count);
    for (std::size_t dim = 0; dim < 3; ++dim) {
        std::vector<std::size_t> strata(count);
        std::iota(strata.begin(), strata.end(), 0);
        for (std::size_t i = count; i > 1; --i) {
            std::swap(strata[i - 1], strata[rng() % i]);
        }
        for (std::size_t i = 0; i < count; ++i) {
            points[i][dim] = (static_cast<double>(strata[i]) + rng.uniform()) / static_cast<double>(count);
        }
    }
    return points;
}

FitResult map_fit(const DefaultHistory& history, KernelFamily family, const FitConfig& config) {
    if (history.empty()) throw DomainError("map_fit: empty history");
    const ParameterSpace space(family, config);
    const bool screening = config.screening_paths >= 2 && config.screening_paths < config.n_paths;
    auto make_objective = [&](std::size_t n_paths) {
        auto draws = std::make_shared<std::optional<PathDraws>>();
        if (config.estimator == LikelihoodEstimator::PathAverage) {
            draws->emplace(n_paths, history.size(), config.seed);
        }
        return [&, draws, n_paths](std::span<const double> u) {
            const ModelParams params = space.params(space.to_natural(u));
            const double ll = *draws ? mc_log_likelihood(history, params, **draws).loglik
                                     : smc_log_likelihood(history, params, n_paths, config.seed).loglik;
            return std::isnan(ll) ? std::numeric_limits<double>::infinity() : -ll;
        };
    };
    const std::function<double(std::span<const double>)> objective =
        make_objective(screening ? config.screening_paths : config.n_paths);

    NelderMeadOptions options;
    options.size_tolerance = config.simplex_tolerance;
    options.max_evaluations = config.max_evaluations;

    FitResult result;
    result.family = family;
    result.seed = config.seed;
    result.n_paths = config.n_paths;
    for (const ParameterTriple& fraction : latin_hypercube(config.n_starts, config.seed)) {
        StartOutcome outcome;
        outcome.start = space.from_fraction(fraction);
        const NelderMeadResult nm =
            nelder_mead_minimize(objective, space.to_unconstrained(outcome.start), options);
        outcome.optimum = space.to_natural(nm.x);
        outcome.log_posterior = -nm.value + space.log_prior_density();
        outcome.evaluations = nm.evaluations;
        outcome.converged = nm.converged;
        result.evaluations += nm.evaluations;
        result.starts.push_back(outcome);
    }
    if (screening) {
        auto best_start = std::max_element(result.starts.begin(), result.starts.end(),
                                           [](const StartOutcome& a, const StartOutcome& b) {
                                               return a.log_posterior < b.log_posterior;
                                           });
        const std::function<double(std::span<const double>)> full = make_objective(config.n_paths);
        NelderMeadOptions polish = options;
        polish.initial_step = 0.1;
        const NelderMeadResult nm = nelder_mead_minimize(full, space.to_unconstrained(best_start->optimum), polish);
        StartOutcome refined;
        refined.start = best_start->optimum;
        refined.optimum = space.to_natural(nm.x);
        refined.log_posterior = -nm.value + space.log_prior_density();
        refined.evaluations = nm.evaluations;
        refined.converged = nm.converged;
        result.evaluations += nm.evaluations;
        // rescore the screened optima at n_paths
        for (auto& s : result.starts) s.log_posterior = -full(space.to_unconstrained(s.optimum)) + space.log_prior_density();
        result.starts.push_back(refined);
    }

    std::vector<double> posts;
    for (const auto& s : result.starts) posts.push_back(s.log_posterior);
    const auto best = std::max_element(result.starts.begin(), result.starts.end(),
                                       [](const StartOutcome& a, const StartOutcome& b) {
                                           return a.log_posterior < b.log_posterior;
                                       });
    result.params_hat = space.params(best->optimum);
    result.rho_D_hat = map_asset_to_default(result.params_hat.p(), result.params_hat.rho_A());
    result.log_posterior = best->log_posterior;
    result.log_likelihood = best->log_posterior - space.log_prior_density();
    result.converged = best->converged;

    std::sort(posts.begin(), posts.end());
    const std::size_t m = posts.size();
    const double median = m % 2 ? posts[m / 2] : 0.5 * (posts[m / 2 - 1] + posts[m / 2]);
    result.log_posterior_gap = result.log_posterior - median;
    double widest_fraction = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        double flo = lo, fhi = hi;
        for (const auto& s : result.starts) {
            lo = std::min(lo, s.optimum[j]);
            hi = std::max(hi, s.optimum[j]);
            const double f = space.to_fraction(s.optimum)[j];
            flo = std::min(flo, f);
            fhi = std::max(fhi, f);
        }
        result.parameter_spread[j] = hi - lo;
        if (!space.bounds(j).pinned()) widest_fraction = std::max(widest_fraction, fhi - flo);
    }
    const bool flat = result.log_posterior_gap < 0.5 && widest_fraction > 0.5;
    result.non_identifiable = history.total_defaults() == 0 || flat;
    return result;
}

}  // namespace merton
