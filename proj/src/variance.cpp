#include "merton/variance.hpp"

#include <cmath>
#include <string>

#include "merton/error.hpp"
#include "merton/parallel.hpp"
#include "merton/portfolio.hpp"
#include "merton/random.hpp"

namespace merton {

TemporalCorrelationTable::TemporalCorrelationTable(const ModelParams& params)
    : params_(params),
      rho_D_(map_asset_to_default(params.p(), params.rho_A())),
      slope_(tangent_slope_A(params.p())),
      f_{0.0},
      sum_f_{0.0L},
      sum_if_{0.0L},
      sum_d_{0.0L},
      sum_id_{0.0L} {}

void TemporalCorrelationTable::extend(std::size_t max_lag) {
    const std::size_t old = f_.size();
    if (max_lag < old) return;
    f_.resize(max_lag + 1);
    const double p = params_.p();
    const double rho = params_.rho_A();
    const DecayKernel kernel = params_.kernel();
    parallel_for(max_lag + 1 - old, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const std::size_t lag = old + j;
            f_[lag] = map_asset_to_default(p, rho * kernel.value(lag));
        }
    });
    for (std::size_t lag = old; lag <= max_lag; ++lag) {
        const long double i = static_cast<long double>(lag);
        const long double d = kernel.value(lag);
        sum_f_.push_back(sum_f_.back() + f_[lag]);
        sum_if_.push_back(sum_if_.back() + i * f_[lag]);
        sum_d_.push_back(sum_d_.back() + d);
        sum_id_.push_back(sum_id_.back() + i * d);
    }
}

double TemporalCorrelationTable::default_correlation(std::size_t lag) {
    if (lag == 0) return rho_D_;
    extend(lag);
    return f_[lag];
}

VarianceBreakdown TemporalCorrelationTable::breakdown(std::size_t n, std::size_t T) {
    if (n == 0 || T == 0) throw DomainError("variance: n and T must be >= 1");
    const std::size_t m = T - 1;
    extend(m);
    const double p = params_.p();
    const double pq = p * (1.0 - p);
    const double nd = static_cast<double>(n);
    const double Td = static_cast<double>(T);
    const long double Tl = static_cast<long double>(T);

    // sum_{i=1}^{T-1} x_i (T - i) = T * sum x_i - sum i x_i
    const long double lag_sum_f = Tl * sum_f_[m] - sum_if_[m];
    const long double lag_sum_d = Tl * sum_d_[m] - sum_id_[m];
    const double scale = 2.0 * pq / (Td * Td);

    VarianceBreakdown v;
    v.term_binomial = pq / (nd * Td);
    v.term_intra_year = pq * (nd - 1.0) * rho_D_ / (nd * Td);
    v.term_temporal = scale * static_cast<double>(lag_sum_f);
    v.total = v.term_binomial + v.term_intra_year + v.term_temporal;
    const double head = v.term_binomial + v.term_intra_year;
    v.lower_bound = head + scale * slope_ * params_.rho_A() * static_cast<double>(lag_sum_d);
    v.upper_bound = head + scale * rho_D_ * static_cast<double>(lag_sum_d);
    return v;
}

VarianceBreakdown variance_exact(const ModelParams& params, std::size_t n, std::size_t T) {
    TemporalCorrelationTable table(params);
    return table.breakdown(n, T);
}

VarianceEstimate variance_mc(const ModelParams& params, std::size_t n, std::size_t T,
                             std::size_t replicas, std::uint64_t seed) {
    if (replicas < 2) throw DomainError("variance_mc: replicas must be >= 2");
    if (n == 0 || T == 0) throw DomainError("variance_mc: n and T must be >= 1");
    const PathGenerator paths(params.kernel(), T);
    const std::vector<std::int64_t> cohorts(T, static_cast<std::int64_t>(n));
    std::vector<double> z(replicas);
    parallel_for(replicas, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            z[r] = estimator_z(simulate_panel(params, paths, cohorts, derive_seed(seed, r))).z;
        }
    });
    const double R = static_cast<double>(replicas);
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= R;
    double m2 = 0.0, m4 = 0.0;
    for (double v : z) {
        const double d2 = (v - mean) * (v - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= R;
    m4 /= R;
    VarianceEstimate out;
    out.estimate = m2 * R / (R - 1.0);
    // Var(s^2) ~ (mu4 - (R-3)/(R-1) sigma^4) / R
    const double var_of_var = (m4 - (R - 3.0) / (R - 1.0) * m2 * m2) / R;
    out.std_error = std::sqrt(std::max(0.0, var_of_var));
    return out;
}

std::string_view to_string(AsymptoticRegime regime) noexcept {
    switch (regime) {
        case AsymptoticRegime::Exponential: return "EXP";
        case AsymptoticRegime::PowerAboveOne: return "POWER_GT1";
        case AsymptoticRegime::PowerAtOne: return "POWER_EQ1";
        case AsymptoticRegime::PowerBelowOne: return "POWER_LT1";
    }
    return "?";
}

AsymptoticVariance variance_asymptotic(const ModelParams& params, std::size_t n, std::size_t T,
                                       std::optional<double> c) {
    if (T < 2) throw DomainError("variance_asymptotic: T must be >= 2");
    if (n == 0) throw DomainError("variance_asymptotic: n must be >= 1");
    const double p = params.p();
    const double pq = p * (1.0 - p);
    const double rho_D = map_asset_to_default(p, params.rho_A());
    AsymptoticVariance out;
    out.c = c ? *c : std::sqrt(tangent_slope_A(p) * params.rho_A() * rho_D);
    const double nd = static_cast<double>(n);
    const double Td = static_cast<double>(T);
    const double head = pq / (nd * Td) + pq * (nd - 1.0) * rho_D / (nd * Td);
    const double x = params.kernel().parameter();
    double tail = 0.0;
    if (params.kernel().family() == KernelFamily::Exponential) {
        out.regime = AsymptoticRegime::Exponential;
        // sum_{i=1}^{T-1} theta^i (T - i)
        const double lag_sum = x < 1.0 ? x * (Td * (1.0 - x) - 1.0 + std::pow(x, Td)) /
                                             ((1.0 - x) * (1.0 - x))
                                       : Td * (Td - 1.0) / 2.0;
        tail = 2.0 * pq * out.c * lag_sum / (Td * Td);
    } else if (x > 1.0) {
        out.regime = AsymptoticRegime::PowerAboveOne;
        tail = 2.0 * pq * out.c * std::pow(Td, -x) / (x - 1.0);
    } else if (x == 1.0) {
        out.regime = AsymptoticRegime::PowerAtOne;
        tail = 2.0 * pq * out.c * ((Td + 1.0) * std::log(Td) - Td + 2.0) / (Td * Td);
    } else {
        out.regime = AsymptoticRegime::PowerBelowOne;
        tail = 2.0 * pq * out.c / ((1.0 - x) * (2.0 - x) * std::pow(Td, x));
    }
    out.value = head + tail;
    return out;
}

ScalingPoint scaling_exponent(const ModelParams& params, std::size_t n, std::size_t T) {
    if (T < 2) throw DomainError("scaling_exponent: T must be >= 2");
    TemporalCorrelationTable table(params);
    table.extend(2 * T - 1);
    const double v1 = table.breakdown(n, T).total;
    const double v2 = table.breakdown(n, 2 * T).total;
    return {params.kernel().parameter(), T, std::log2(v1 / v2)};
}

std::vector<ScalingPoint> delta_curve(std::span<const double> gammas, const ModelParams& base,
                                      std::size_t n, std::size_t T) {
    if (gammas.empty()) throw DomainError("delta_curve: gamma list is empty");
    std::vector<ScalingPoint> curve;
    curve.reserve(gammas.size());
    for (double g : gammas) {
        curve.push_back(scaling_exponent(ModelParams(base.p(), base.rho_A(), DecayKernel::power(g)), n, T));
    }
    return curve;
}

}  // namespace merton
