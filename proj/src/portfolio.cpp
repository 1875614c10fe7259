#include "merton/portfolio.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "merton/error.hpp"
#include "merton/random.hpp"

namespace merton {

DefaultHistory::DefaultHistory(std::vector<HistoryRow> rows) : rows_(std::move(rows)) {
    for (std::size_t t = 0; t < rows_.size(); ++t) {
        const HistoryRow& r = rows_[t];
        if (r.n < 1) {
            throw ValidationError("cohort size must be >= 1 in year " + std::to_string(r.year));
        }
        if (r.k < 0 || r.k > r.n) {
            throw ValidationError("default count outside [0, n] in year " + std::to_string(r.year));
        }
        if (t > 0 && r.year != rows_[t - 1].year + 1) {
            throw ValidationError("years must be consecutive: " + std::to_string(rows_[t - 1].year) +
                                  " is followed by " + std::to_string(r.year));
        }
    }
}

std::int64_t DefaultHistory::total_obligors() const noexcept {
    std::int64_t s = 0;
    for (const auto& r : rows_) s += r.n;
    return s;
}

std::int64_t DefaultHistory::total_defaults() const noexcept {
    std::int64_t s = 0;
    for (const auto& r : rows_) s += r.k;
    return s;
}

DefaultHistory simulate_panel(const ModelParams& params, std::span<const std::int64_t> cohort_sizes,
                              std::uint64_t seed, int first_year) {
    if (cohort_sizes.empty()) throw DomainError("simulate_panel: cohort list is empty");
    PathGenerator paths(params.kernel(), cohort_sizes.size());
    return simulate_panel(params, paths, cohort_sizes, seed, first_year);
}

DefaultHistory simulate_panel(const ModelParams& params, const PathGenerator& paths,
                              std::span<const std::int64_t> cohort_sizes, std::uint64_t seed,
                              int first_year) {
    if (cohort_sizes.empty()) throw DomainError("simulate_panel: cohort list is empty");
    if (paths.dim() != cohort_sizes.size()) {
        throw DomainError("simulate_panel: path generator dimension does not match cohort list");
    }
    const GaussianPath path = paths.sample(seed, 0);
    CounterRng rng(seed, 1);
    std::vector<HistoryRow> rows;
    rows.reserve(cohort_sizes.size());
    for (std::size_t t = 0; t < cohort_sizes.size(); ++t) {
        const std::int64_t n = cohort_sizes[t];
        if (n < 1) throw DomainError("simulate_panel: cohort sizes must be >= 1");
        const double g = conditional_pd(params, path.values[t]);
        std::binomial_distribution<std::int64_t> binom(n, g);
        rows.push_back({first_year + static_cast<int>(t), n, binom(rng)});
    }
    return DefaultHistory(std::move(rows));
}

PanelStats estimator_z(const DefaultHistory& history) {
    if (history.empty()) throw DomainError("estimator_z: empty history");
    PanelStats stats;
    stats.per_year_rates.reserve(history.size());
    for (const auto& r : history.rows()) {
        stats.per_year_rates.push_back(static_cast<double>(r.k) / static_cast<double>(r.n));
    }
    stats.z = static_cast<double>(history.total_defaults()) /
              static_cast<double>(history.total_obligors());
    return stats;
}

double empirical_autocorr(std::span<const DefaultHistory> histories, std::size_t lag) {
    if (lag == 0) throw DomainError("empirical_autocorr: lag must be >= 1");
    if (histories.empty()) throw DomainError("empirical_autocorr: no histories");
    for (const auto& h : histories) {
        if (lag >= h.size()) {
            throw DomainError("empirical_autocorr: lag " + std::to_string(lag) +
                              " requires more than " + std::to_string(h.size()) + " years");
        }
    }
    double sx = 0, sy = 0;
    std::size_t count = 0;
    bool x_constant = true, y_constant = true;
    const double x0 = static_cast<double>(histories[0][0].k) / static_cast<double>(histories[0][0].n);
    const double y0 = static_cast<double>(histories[0][lag].k) / static_cast<double>(histories[0][lag].n);
    for (const auto& h : histories) {
        for (std::size_t t = 0; t + lag < h.size(); ++t) {
            const double x = static_cast<double>(h[t].k) / static_cast<double>(h[t].n);
            const double y = static_cast<double>(h[t + lag].k) / static_cast<double>(h[t + lag].n);
            x_constant = x_constant && x == x0;
            y_constant = y_constant && y == y0;
            sx += x;
            sy += y;
            ++count;
        }
    }
    if (x_constant || y_constant) return std::numeric_limits<double>::quiet_NaN();
    const double mx = sx / static_cast<double>(count);
    const double my = sy / static_cast<double>(count);
    double sxx = 0, syy = 0, sxy = 0;
    for (const auto& h : histories) {
        for (std::size_t t = 0; t + lag < h.size(); ++t) {
            const double x = static_cast<double>(h[t].k) / static_cast<double>(h[t].n) - mx;
            const double y = static_cast<double>(h[t + lag].k) / static_cast<double>(h[t + lag].n) - my;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
    }
    if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace merton
