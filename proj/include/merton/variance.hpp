#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "merton/model.hpp"

namespace merton {

/*!
 * V(Z(T)) for the pooled estimator Z(T) = sum_{t,i} X_it / (nT):
 *
 *   p(1-p)/(nT)                                   binomial
 * + p(1-p)(n-1) f(rho_A)/(nT)                     same-year correlation
 * + 2p(1-p)/T^2 sum_{i=1}^{T-1} f(rho_A d_i)(T-i) cross-year correlation
 *
 * The bounds replace f(rho_A d_i) in the last term by A rho_A d_i (lower)
 * and f(rho_A) d_i (upper).
 */
struct VarianceBreakdown {
    double term_binomial = 0.0;
    double term_intra_year = 0.0;
    double term_temporal = 0.0;
    double total = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
};

/*!
 * Lag table of f(rho_A d_i) with running sums, so that V(Z(T)) for any T up
 * to the cached horizon costs O(1). Extending the horizon evaluates one
 * bivariate normal CDF per new lag.
 */
class TemporalCorrelationTable {
  public:
    explicit TemporalCorrelationTable(const ModelParams& params);

    const ModelParams& params() const noexcept { return params_; }
    std::size_t max_lag() const noexcept { return f_.size() - 1; }

    /// Makes lags 1..max_lag available.
    void extend(std::size_t max_lag);

    /// f(rho_A d_i); extends the table if needed.
    double default_correlation(std::size_t lag);

    VarianceBreakdown breakdown(std::size_t n, std::size_t T);

  private:
    ModelParams params_;
    double rho_D_;
    double slope_;
    // Index i holds lag i; entry 0 is a zero sentinel for the prefix sums.
    std::vector<double> f_;
    std::vector<long double> sum_f_, sum_if_, sum_d_, sum_id_;
};

VarianceBreakdown variance_exact(const ModelParams& params, std::size_t n, std::size_t T);

struct VarianceEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Sample variance of Z(T) over independently simulated panels of constant
/// cohort size n, with the moment-based standard error of a sample variance.
VarianceEstimate variance_mc(const ModelParams& params, std::size_t n, std::size_t T,
                             std::size_t replicas, std::uint64_t seed);

enum class AsymptoticRegime { Exponential, PowerAboveOne, PowerAtOne, PowerBelowOne };

std::string_view to_string(AsymptoticRegime regime) noexcept;

struct AsymptoticVariance {
    double value = 0.0;
    AsymptoticRegime regime = AsymptoticRegime::Exponential;
    /// Bracketing constant used in place of f(rho_A d_i)/d_i.
    double c = 0.0;
};

/// Large-T approximation of V(Z(T)). `c` defaults to sqrt(A rho_A rho_D),
/// the geometric mean of the slopes bounding f(rho_A d)/d.
AsymptoticVariance variance_asymptotic(const ModelParams& params, std::size_t n, std::size_t T,
                                       std::optional<double> c = std::nullopt);

struct ScalingPoint {
    double kernel_parameter = 0.0;
    std::size_t T = 0;
    /// log2(V(Z(T)) / V(Z(2T))).
    double delta = 0.0;
};

ScalingPoint scaling_exponent(const ModelParams& params, std::size_t n, std::size_t T);

/// delta for each gamma of a power kernel, with p and rho_A from `base`.
std::vector<ScalingPoint> delta_curve(std::span<const double> gammas, const ModelParams& base,
                                      std::size_t n, std::size_t T);

}  // namespace merton
