#include "merton/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "merton/error.hpp"
#include "merton/normal.hpp"
#include "merton/parallel.hpp"
#include "merton/random.hpp"
#include "merton/toeplitz.hpp"

namespace merton {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_binomial_coefficient(std::int64_t n, std::int64_t k) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

struct YearTerms {
    std::vector<double> log_coef;
    std::vector<double> k;
    std::vector<double> n_minus_k;
};

YearTerms year_terms(const DefaultHistory& history) {
    YearTerms terms;
    for (const auto& r : history.rows()) {
        terms.log_coef.push_back(log_binomial_coefficient(r.n, r.k));
        terms.k.push_back(static_cast<double>(r.k));
        terms.n_minus_k.push_back(static_cast<double>(r.n - r.k));
    }
    return terms;
}

// k log g + (n-k) log(1-g) where a zero count suppresses its factor, so that
// g = 0 with k = 0 contributes log 1.
double count_log_term(double k, double n_minus_k, const LogCdfPair& lg) noexcept {
    double s = 0.0;
    if (k > 0.0) s += k * lg.lower;
    if (n_minus_k > 0.0) s += n_minus_k * lg.upper;
    return s;
}

double log_mean_exp(std::span<const double> values, double* std_error_of_log) {
    double top = kNegInf;
    for (double v : values) top = std::max(top, v);
    if (top == kNegInf) {
        if (std_error_of_log) *std_error_of_log = std::numeric_limits<double>::infinity();
        return kNegInf;
    }
    const double count = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - top);
    const double mean = sum / count;
    if (std_error_of_log) {
        double ss = 0.0;
        for (double v : values) {
            const double d = std::exp(v - top) - mean;
            ss += d * d;
        }
        const double var = values.size() > 1 ? ss / (count - 1.0) : 0.0;
        *std_error_of_log = std::sqrt(var / count) / mean;
    }
    return top + std::log(sum) - std::log(count);
}

}  // namespace

PathDraws::PathDraws(std::size_t n_paths, std::size_t dim, std::uint64_t seed)
    : n_paths_(n_paths), dim_(dim), seed_(seed), z_(n_paths * dim) {
    if (n_paths < 2) throw DomainError("PathDraws: at least 2 paths are required");
    if (dim == 0) throw DomainError("PathDraws: dimension must be >= 1");
    parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            standard_normal_fill(seed, i, {z_.data() + i * dim_, dim_});
        }
    });
}

double binomial_log_pmf(std::int64_t n, std::int64_t k, double log_g, double log_1mg) noexcept {
    return log_binomial_coefficient(n, k) +
           count_log_term(static_cast<double>(k), static_cast<double>(n - k), {log_g, log_1mg});
}

LogCdfPair std_normal_log_cdf_pair(double x) noexcept {
    const double a = std::abs(x);
    double log_small;
    double small;
    if (a < 30.0) {
        small = 0.5 * std::erfc(a * 0.70710678118654752440);
        log_small = std::log(small);
    } else {
        log_small = std_normal_log_cdf(-a);
        small = std::exp(log_small);
    }
    const double log_large = std::log1p(-small);
    return x >= 0.0 ? LogCdfPair{log_large, log_small} : LogCdfPair{log_small, log_large};
}

LikelihoodEstimate mc_log_likelihood(const DefaultHistory& history, const ModelParams& params,
                                     const PathDraws& draws) {
    if (history.empty()) throw DomainError("mc_log_likelihood: empty history");
    if (draws.dim() != history.size()) {
        throw DomainError("mc_log_likelihood: path dimension does not match the history length");
    }
    const std::size_t T = history.size();
    const YearTerms terms = year_terms(history);
    double coef_sum = 0.0;
    for (double c : terms.log_coef) coef_sum += c;

    const PathGenerator generator(params.kernel(), T);
    const double a = params.threshold() / std::sqrt(1.0 - params.rho_A());
    const double b = std::sqrt(params.rho_A() / (1.0 - params.rho_A()));

    std::vector<double> path_log(draws.n_paths());
    parallel_for(draws.n_paths(), [&](std::size_t begin, std::size_t end) {
        std::vector<double> s(T);
        for (std::size_t i = begin; i < end; ++i) {
            generator.transform(draws.path(i), s);
            double acc = coef_sum;
            for (std::size_t t = 0; t < T; ++t) {
                acc += count_log_term(terms.k[t], terms.n_minus_k[t],
                                      std_normal_log_cdf_pair(a - b * s[t]));
            }
            path_log[i] = acc;
        }
    });

    LikelihoodEstimate out;
    out.loglik = log_mean_exp(path_log, &out.mc_std_error);
    if (out.loglik == kNegInf) out.degenerate = true;
    return out;
}

LikelihoodEstimate mc_log_likelihood(const DefaultHistory& history, const ModelParams& params,
                                     std::size_t n_paths, std::uint64_t seed) {
    if (history.empty()) throw DomainError("mc_log_likelihood: empty history");
    return mc_log_likelihood(history, params, PathDraws(n_paths, history.size(), seed));
}

SequentialEstimate smc_log_likelihood(const DefaultHistory& history, const ModelParams& params,
                                      std::size_t n_particles, std::uint64_t seed) {
    if (history.empty()) throw DomainError("smc_log_likelihood: empty history");
    if (n_particles < 2) throw DomainError("smc_log_likelihood: at least 2 particles are required");
    constexpr double kDefensive = 0.1;
    const std::size_t T = history.size();
    const std::size_t N = n_particles;
    const YearTerms terms = year_terms(history);
    const PathGenerator generator(params.kernel(), T, 1e-6, /*force_ar1=*/true);
    const CholeskyFactor* factor = generator.cholesky();
    const double theta = generator.ar1_coefficient();
    const double a = params.threshold() / std::sqrt(1.0 - params.rho_A());
    const double b = std::sqrt(params.rho_A() / (1.0 - params.rho_A()));

    // Cholesky: innovations z (N x T); AR(1): last factor value per particle.
    std::vector<double> state(factor ? N * T : N, 0.0);
    std::vector<double> scratch(state.size());
    std::vector<double> log_w(N, 0.0);     // normalized log weights carried between years
    std::vector<double> log_inc(N);        // incremental weights of the current year
    std::vector<double> s_new(N);
    std::vector<std::size_t> ancestor(N);
    CounterRng rng(seed, 0);

    SequentialEstimate out;
    out.log_predictive.assign(T, 0.0);
    const double log_n = std::log(static_cast<double>(N));
    for (double& w : log_w) w = -log_n;

    for (std::size_t t = 0; t < T; ++t) {
        double sigma;
        if (factor) {
            sigma = (*factor)(t, t);
        } else {
            sigma = t == 0 ? 1.0 : std::sqrt((1.0 - theta) * (1.0 + theta));
        }
        // Gaussian approximation of the year's likelihood in S.
        bool guided = false;
        double s_hat = 0.0, v_hat = 0.0;
        const double k = terms.k[t];
        const double n = k + terms.n_minus_k[t];
        if (k > 0.0 && terms.n_minus_k[t] > 0.0 && b > 1e-8 && sigma > 0.0) {
            const double g = k / n;
            const double x_hat = std_normal_quantile(g);
            const double dens = std_normal_pdf(x_hat);
            const double var_x = g * (1.0 - g) / (n * dens * dens);
            s_hat = (a - x_hat) / b;
            v_hat = var_x / (b * b);
            guided = std::isfinite(s_hat) && v_hat > 0.0 && std::isfinite(v_hat);
        }
        double mix_prec = 0.0, mix_sd = 0.0, log_sigma = 0.0, log_sd_q = 0.0;
        if (guided) {
            mix_prec = 1.0 / (sigma * sigma) + 1.0 / v_hat;
            mix_sd = 1.0 / std::sqrt(mix_prec);
            log_sigma = std::log(sigma);
            log_sd_q = std::log(mix_sd);
        }
        const double log_defensive = std::log(kDefensive);
        const double log_guided = std::log1p(-kDefensive);
        for (std::size_t i = 0; i < N; ++i) {
            double m = 0.0;
            if (factor) {
                const auto row = factor->row(t);
                const double* z = state.data() + i * T;
                for (std::size_t j = 0; j < t; ++j) m += row[j] * z[j];
            } else if (t > 0) {
                m = theta * state[i];
            }
            double s;
            double log_ratio = 0.0;  // log prior(s) - log proposal(s)
            if (!(sigma > 0.0)) {
                s = m;
            } else if (!guided) {
                s = m + sigma * rng.normal();
            } else {
                const double mu_q = (m / (sigma * sigma) + s_hat / v_hat) / mix_prec;
                const double u = rng.uniform();
                const double eps = rng.normal();
                s = u < kDefensive ? m + sigma * eps : mu_q + mix_sd * eps;
                const double zp = (s - m) / sigma;
                const double zq = (s - mu_q) / mix_sd;
                const double a_prior = log_defensive - 0.5 * zp * zp - log_sigma;
                const double a_guide = log_guided - 0.5 * zq * zq - log_sd_q;
                const double hi = std::max(a_prior, a_guide);
                const double log_q = hi + std::log1p(std::exp(std::min(a_prior, a_guide) - hi));
                log_ratio = a_prior - log_defensive - log_q;
            }
            s_new[i] = s;
            log_inc[i] = log_ratio + terms.log_coef[t] +
                         count_log_term(k, terms.n_minus_k[t], std_normal_log_cdf_pair(a - b * s));
            if (factor) {
                state[i * T + t] = sigma > 0.0 ? (s - m) / sigma : 0.0;
            } else {
                state[i] = s;
            }
        }

        // log sum_i W_i w_i, then renormalize.
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < N; ++i) top = std::max(top, log_w[i] + log_inc[i]);
        if (top == kNegInf || std::isnan(top)) {
            out.degenerate = true;
            out.loglik = kNegInf;
            out.log_predictive[t] = kNegInf;
            return out;
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < N; ++i) sum += std::exp(log_w[i] + log_inc[i] - top);
        const double log_step = top + std::log(sum);
        out.log_predictive[t] = log_step;
        out.loglik += log_step;
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            log_w[i] = log_w[i] + log_inc[i] - log_step;
            const double w = std::exp(log_w[i]);
            sum_sq += w * w;
        }
        const double ess_fraction = 1.0 / (sum_sq * static_cast<double>(N));
        out.min_ess_fraction = std::min(out.min_ess_fraction, ess_fraction);

        if (ess_fraction < 0.5 && t + 1 < T) {
            // systematic resampling
            const double step = 1.0 / static_cast<double>(N);
            double target = rng.uniform() * step;
            double cumulative = 0.0;
            std::size_t j = 0;
            for (std::size_t i = 0; i < N; ++i) {
                while (j + 1 < N && cumulative + std::exp(log_w[j]) < target) {
                    cumulative += std::exp(log_w[j]);
                    ++j;
                }
                ancestor[i] = j;
                target += step;
            }
            const std::size_t width = factor ? T : 1;
            for (std::size_t i = 0; i < N; ++i) {
                std::copy_n(state.data() + ancestor[i] * width, factor ? t + 1 : 1,
                            scratch.data() + i * width);
            }
            state.swap(scratch);
            for (double& w : log_w) w = -log_n;
        }
    }
    return out;
}

const char* to_string(LikelihoodEstimator estimator) noexcept {
    return estimator == LikelihoodEstimator::Sequential ? "sequential" : "path-average";
}

LikelihoodEstimator parse_likelihood_estimator(std::string_view name) {
    if (name == "sequential" || name == "smc") return LikelihoodEstimator::Sequential;
    if (name == "path-average" || name == "naive") return LikelihoodEstimator::PathAverage;
    throw DomainError("unknown likelihood estimator '" + std::string(name) + "'");
}

double estimate_log_likelihood(const DefaultHistory& history, const ModelParams& params,
                               LikelihoodEstimator estimator, std::size_t n, std::uint64_t seed,
                               std::vector<double>* log_predictive) {
    if (estimator == LikelihoodEstimator::PathAverage) {
        if (log_predictive) log_predictive->clear();
        return mc_log_likelihood(history, params, n, seed).loglik;
    }
    SequentialEstimate e = smc_log_likelihood(history, params, n, seed);
    if (log_predictive) *log_predictive = std::move(e.log_predictive);
    return e.loglik;
}

std::vector<double> year_marginal_log_likelihoods(const DefaultHistory& history,
                                                  const ModelParams& params,
                                                  std::span<const double> nodes) {
    if (nodes.empty()) throw DomainError("year_marginal_log_likelihoods: no nodes");
    const YearTerms terms = year_terms(history);
    const double a = params.threshold() / std::sqrt(1.0 - params.rho_A());
    const double b = std::sqrt(params.rho_A() / (1.0 - params.rho_A()));
    std::vector<LogCdfPair> logs(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) logs[i] = std_normal_log_cdf_pair(a - b * nodes[i]);

    std::vector<double> out(history.size());
    std::vector<double> per_node(nodes.size());
    for (std::size_t t = 0; t < history.size(); ++t) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            per_node[i] = terms.log_coef[t] + count_log_term(terms.k[t], terms.n_minus_k[t], logs[i]);
        }
        out[t] = log_mean_exp(per_node, nullptr);
    }
    return out;
}

}  // namespace merton
