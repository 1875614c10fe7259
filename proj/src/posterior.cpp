#include "merton/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "merton/error.hpp"
#include "merton/likelihood.hpp"
#include "merton/normal.hpp"
#include "merton/parallel.hpp"
#include "merton/random.hpp"

namespace merton {

namespace {

constexpr std::size_t kWindow = 50;
constexpr std::uint64_t kProposalStream = 0x4d434d43u;

ParameterTriple default_start(const DefaultHistory& history, const ParameterSpace& space) {
    double mean_rate = 0.0;
    double mean_sq = 0.0;
    double binomial_part = 0.0;
    for (const auto& r : history.rows()) {
        const double g = static_cast<double>(r.k) / static_cast<double>(r.n);
        mean_rate += g;
        mean_sq += g * g;
    }
    const double m = static_cast<double>(history.size());
    mean_rate /= m;
    mean_sq /= m;
    double pooled = static_cast<double>(history.total_defaults()) / static_cast<double>(history.total_obligors());
    pooled = std::clamp(pooled, 1e-4, 0.5);
    for (const auto& r : history.rows()) binomial_part += pooled * (1.0 - pooled) / static_cast<double>(r.n);
    binomial_part /= m;
    const double excess = mean_sq - mean_rate * mean_rate - binomial_part;
    double rho_A = 0.1;
    if (excess > 0.0) {
        const double rho_D = std::min(excess / (pooled * (1.0 - pooled)), 0.9);
        rho_A = map_default_to_asset(pooled, rho_D);
    }
    ParameterTriple fraction = space.to_fraction({pooled, rho_A, 0.0});
    fraction[2] = 0.5;
    for (double& f : fraction) {
        if (!std::isfinite(f)) f = 0.5;
        f = std::clamp(f, 0.02, 0.98);
    }
    return space.from_fraction(fraction);
}

// Lower-triangular Cholesky of a small dense matrix, row-major.
std::vector<double> small_cholesky(std::vector<double> a, std::size_t d) {
    for (std::size_t j = 0; j < d; ++j) {
        double diag = a[j * d + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
        if (!(diag > 0.0)) return {};
        diag = std::sqrt(diag);
        a[j * d + j] = diag;
        for (std::size_t i = j + 1; i < d; ++i) {
            double v = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * d + k] * a[j * d + k];
            a[i * d + j] = v / diag;
        }
        for (std::size_t k = j + 1; k < d; ++k) a[j * d + k] = 0.0;
    }
    return a;
}

// log-mean-exp and variance of a set of values, summed in sorted order.
void sorted_moments(std::vector<double>& v, double& log_mean_exp, double& variance) {
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    const double top = v.back();
    double sum_exp = 0.0;
    double sum = 0.0;
    for (double x : v) {
        sum_exp += std::exp(x - top);
        sum += x;
    }
    log_mean_exp = top + std::log(sum_exp / n);
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    variance = ss / (n - 1.0);
}

}  // namespace

PosteriorSample pseudo_marginal_mcmc(const DefaultHistory& history, KernelFamily family,
                                     const FitConfig& config, std::size_t n_draws, double beta,
                                     std::optional<ParameterTriple> start) {
    if (history.empty()) throw DomainError("pseudo_marginal_mcmc: empty history");
    if (n_draws < 100) throw DomainError("pseudo_marginal_mcmc: n_draws must be >= 100");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("pseudo_marginal_mcmc: beta must be > 0");
    const ParameterSpace space(family, config);
    const std::size_t d = space.free_dim();

    PosteriorSample sample;
    sample.family = family;
    sample.beta = beta;

    ParameterTriple x0 = start ? *start : default_start(history, space);
    for (std::size_t j = 0; j < 3; ++j) {
        if (!space.bounds(j).contains(x0[j])) throw DomainError("pseudo_marginal_mcmc: start outside the bounds");
    }
    std::vector<double> u = space.to_unconstrained(x0);
    std::uint64_t evaluation = 0;
    auto evaluate = [&](std::span<const double> point, std::vector<double>& predictive) {
        const ModelParams params = space.params(space.to_natural(point));
        return estimate_log_likelihood(history, params, config.estimator, config.n_paths,
                                       derive_seed(config.seed, evaluation++), &predictive);
    };
    std::vector<double> predictive;
    double loglik = evaluate(u, predictive);
    auto log_target = [&](std::span<const double> point, double ll) {
        return beta * ll + space.log_jacobian(point);
    };
    double current = log_target(u, loglik);

    if (d == 0) {
        for (std::size_t i = 0; i < n_draws; ++i) sample.draws.push_back({space.to_natural(u), loglik, predictive});
        sample.acceptance_rate = 1.0;
        return sample;
    }

    CounterRng rng(config.seed, kProposalStream);
    double scale = 2.38 / std::sqrt(static_cast<double>(d));
    std::vector<double> shape(d * d, 0.0);
    for (std::size_t j = 0; j < d; ++j) shape[j * d + j] = 0.1;
    std::vector<double> proposal(d), eps(d), proposed_predictive;
    std::vector<std::vector<double>> warm_points;

    const std::size_t warmup = config.mcmc_warmup;
    std::size_t window_accepted = 0;
    std::size_t accepted = 0;
    for (std::size_t it = 0; it < warmup + n_draws; ++it) {
        for (double& e : eps) e = rng.normal();
        for (std::size_t i = 0; i < d; ++i) {
            double step = 0.0;
            for (std::size_t k = 0; k <= i; ++k) step += shape[i * d + k] * eps[k];
            proposal[i] = u[i] + scale * step;
        }
        const double proposed_ll = evaluate(proposal, proposed_predictive);
        const double proposed = std::isnan(proposed_ll) ? -std::numeric_limits<double>::infinity()
                                                        : log_target(proposal, proposed_ll);
        const double log_u = std::log(rng.uniform());
        if (proposed > -std::numeric_limits<double>::infinity() && log_u < proposed - current) {
            u.swap(proposal);
            predictive.swap(proposed_predictive);
            loglik = proposed_ll;
            current = proposed;
            if (it < warmup) ++window_accepted; else ++accepted;
        }

        if (it < warmup) {
            if (it >= warmup / 4) warm_points.push_back(u);
            if ((it + 1) % kWindow == 0) {
                const double rate = static_cast<double>(window_accepted) / kWindow;
                if (rate < 0.2) scale *= rate < 0.05 ? 0.4 : 0.7;
                else if (rate > 0.5) scale *= rate > 0.8 ? 2.0 : 1.4;
                window_accepted = 0;
            }
            if (it + 1 == warmup / 2 && warm_points.size() > 4 * d) {
                std::vector<double> mean(d, 0.0), cov(d * d, 0.0);
                for (const auto& p : warm_points) {
                    for (std::size_t i = 0; i < d; ++i) mean[i] += p[i];
                }
                for (double& m : mean) m /= static_cast<double>(warm_points.size());
                for (const auto& p : warm_points) {
                    for (std::size_t i = 0; i < d; ++i) {
                        for (std::size_t k = 0; k < d; ++k) cov[i * d + k] += (p[i] - mean[i]) * (p[k] - mean[k]);
                    }
                }
                for (double& c : cov) c /= static_cast<double>(warm_points.size() - 1);
                for (std::size_t i = 0; i < d; ++i) cov[i * d + i] += 1e-6;
                std::vector<double> l = small_cholesky(cov, d);
                if (!l.empty()) {
                    shape = std::move(l);
                    scale = 2.38 / std::sqrt(static_cast<double>(d));
                }
            }
        } else {
            sample.draws.push_back({space.to_natural(u), loglik, predictive});
        }
    }
    sample.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(n_draws);
    sample.low_acceptance = sample.acceptance_rate < 0.05;
    for (std::size_t i = 0; i < d; ++i) {
        double var = 0.0;
        for (std::size_t k = 0; k <= i; ++k) var += shape[i * d + k] * shape[i * d + k];
        sample.step_sizes.push_back(scale * std::sqrt(var));
    }
    return sample;
}

const char* to_string(WaicUnit unit) noexcept {
    return unit == WaicUnit::YearMarginal ? "year-marginal" : "one-step";
}

WaicUnit parse_waic_unit(std::string_view name) {
    if (name == "year-marginal" || name == "marginal") return WaicUnit::YearMarginal;
    if (name == "one-step" || name == "predictive") return WaicUnit::OneStepPredictive;
    throw DomainError("unknown WAIC unit '" + std::string(name) + "'");
}

WaicResult waic(const DefaultHistory& history, const PosteriorSample& sample, std::size_t n_paths,
                WaicUnit unit) {
    const std::size_t S = sample.draws.size();
    if (S < 2) throw DomainError("waic: at least 2 posterior draws are required");
    if (history.empty()) throw DomainError("waic: empty history");
    const std::size_t T = history.size();

    std::vector<double> pointwise(S * T);
    if (unit == WaicUnit::YearMarginal) {
        if (n_paths < 1) throw DomainError("waic: n_paths must be >= 1");
        std::vector<double> nodes(n_paths);
        for (std::size_t i = 0; i < n_paths; ++i) {
            nodes[i] = std_normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n_paths));
        }
        parallel_for(S, [&](std::size_t begin, std::size_t end) {
            for (std::size_t s = begin; s < end; ++s) {
                const ParameterTriple& x = sample.draws[s].x;
                const ModelParams params(x[0], x[1], DecayKernel::of(sample.family, x[2]));
                const std::vector<double> ll = year_marginal_log_likelihoods(history, params, nodes);
                std::copy(ll.begin(), ll.end(), pointwise.begin() + static_cast<std::ptrdiff_t>(s * T));
            }
        });
    } else {
        for (std::size_t s = 0; s < S; ++s) {
            const auto& lp = sample.draws[s].log_predictive;
            if (lp.size() != T) {
                throw DomainError("waic: one-step terms missing; sample the posterior with the sequential estimator");
            }
            std::copy(lp.begin(), lp.end(), pointwise.begin() + static_cast<std::ptrdiff_t>(s * T));
        }
    }

    WaicResult out;
    std::vector<double> column(S);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t s = 0; s < S; ++s) column[s] = pointwise[s * T + t];
        if (column.end() != std::find_if(column.begin(), column.end(), [](double v) { return !std::isfinite(v); })) {
            throw NumericalError("waic: non-finite pointwise log-likelihood in year " +
                                 std::to_string(history[t].year));
        }
        double lme = 0.0, var = 0.0;
        sorted_moments(column, lme, var);
        out.lppd += lme;
        out.p_waic += var;
    }
    out.waic = -2.0 * (out.lppd - out.p_waic);
    return out;
}

double wbic_temperature(std::size_t years) {
    if (years < 2) throw DomainError("wbic: at least 2 years are required (log m must be > 0)");
    return 1.0 / std::log(static_cast<double>(years));
}

double wbic_from_sample(const PosteriorSample& sample) {
    if (sample.draws.empty()) throw DomainError("wbic: empty sample");
    std::vector<double> ll;
    for (const auto& d : sample.draws) ll.push_back(d.loglik);
    std::sort(ll.begin(), ll.end());
    double sum = 0.0;
    for (double v : ll) sum += v;
    return -2.0 * sum / static_cast<double>(ll.size());
}

double wbic(const DefaultHistory& history, KernelFamily family, const FitConfig& config,
            std::size_t n_draws, std::optional<ParameterTriple> start) {
    const double beta = wbic_temperature(history.size());
    return wbic_from_sample(pseudo_marginal_mcmc(history, family, config, n_draws, beta, start));
}

std::vector<FamilyCriteria> compare_families(const DefaultHistory& history, const FitConfig& config,
                                             std::size_t n_draws, WaicUnit unit) {
    const double beta = wbic_temperature(history.size());
    std::vector<FamilyCriteria> out;
    for (KernelFamily family : {KernelFamily::Exponential, KernelFamily::Power}) {
        FamilyCriteria c;
        c.family = family;
        const PosteriorSample posterior = pseudo_marginal_mcmc(history, family, config, n_draws, 1.0);
        c.waic = waic(history, posterior, config.n_paths, unit);
        c.acceptance_rate = posterior.acceptance_rate;
        const PosteriorSample tempered = pseudo_marginal_mcmc(history, family, config, n_draws, beta);
        c.wbic = wbic_from_sample(tempered);
        c.wbic_acceptance_rate = tempered.acceptance_rate;
        out.push_back(c);
    }
    return out;
}

}  // namespace merton
