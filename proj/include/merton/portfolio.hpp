#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "merton/model.hpp"
#include "merton/toeplitz.hpp"

namespace merton {

struct HistoryRow {
    int year = 0;
    std::int64_t n = 0;  // cohort size
    std::int64_t k = 0;  // defaults

    friend bool operator==(const HistoryRow&, const HistoryRow&) = default;
};

/// Yearly cohort sizes and default counts over contiguous years.
class DefaultHistory {
  public:
    DefaultHistory() = default;

    /// Throws ValidationError unless n >= 1, 0 <= k <= n and the years are
    /// consecutive integers in increasing order.
    explicit DefaultHistory(std::vector<HistoryRow> rows);

    std::span<const HistoryRow> rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }
    const HistoryRow& operator[](std::size_t t) const { return rows_.at(t); }

    std::int64_t total_obligors() const noexcept;
    std::int64_t total_defaults() const noexcept;

    friend bool operator==(const DefaultHistory&, const DefaultHistory&) = default;

  private:
    std::vector<HistoryRow> rows_;
};

struct PanelStats {
    double z = 0.0;
    std::vector<double> per_year_rates;
};

/// One panel: a factor path S over T = cohort_sizes.size() years, then
/// k_t ~ Binomial(n_t, G(S_t)) independently given the path. Years are
/// labelled first_year, first_year + 1, ...
DefaultHistory simulate_panel(const ModelParams& params, std::span<const std::int64_t> cohort_sizes,
                              std::uint64_t seed, int first_year = 1);

/// Same, reusing a path generator built for params.kernel() and T years.
DefaultHistory simulate_panel(const ModelParams& params, const PathGenerator& paths,
                              std::span<const std::int64_t> cohort_sizes, std::uint64_t seed,
                              int first_year = 1);

/// Z = sum k_t / sum n_t. Throws DomainError for an empty history.
PanelStats estimator_z(const DefaultHistory& history);

/// Pearson correlation of (k_t/n_t, k_{t+lag}/n_{t+lag}) pairs pooled over
/// all histories. NaN when either side has zero variance. Throws DomainError
/// if lag is 0 or not smaller than every history's length.
double empirical_autocorr(std::span<const DefaultHistory> histories, std::size_t lag);

}  // namespace merton
