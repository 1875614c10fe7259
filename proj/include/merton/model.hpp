#pragma once

#include <cstddef>

#include "merton/kernel.hpp"

namespace merton {

/*!
 * Single-factor Merton model with a temporally correlated systematic factor.
 *
 * Obligor i defaults in year t when sqrt(rho_A) S_t + sqrt(1 - rho_A) eps_it
 * falls below the threshold Y = Phi^{-1}(p). The yearly factors S_t are
 * standard normal with Cor(S_t, S_t') = d_{|t - t'|} from the kernel.
 */
class ModelParams {
  public:
    /// Throws DomainError unless p in (0,1) and rho_A in [0,1).
    ModelParams(double p, double rho_A, DecayKernel kernel);

    double p() const noexcept { return p_; }
    double rho_A() const noexcept { return rho_A_; }
    const DecayKernel& kernel() const noexcept { return kernel_; }
    /// Default threshold Phi^{-1}(p).
    double threshold() const noexcept { return threshold_; }

  private:
    double p_;
    double rho_A_;
    DecayKernel kernel_;
    double threshold_;
};

/// G(s) = Phi((Y - sqrt(rho_A) s) / sqrt(1 - rho_A)): default probability given S_t = s.
double conditional_pd(const ModelParams& params, double s);

/// f(rho_A) = (Phi2(Y,Y;rho_A) - p^2) / (p(1-p)), the default correlation of
/// two obligors whose assets have correlation rho_A. rho_A in [-1,1] is
/// accepted; f(0) = 0 and f(1) = 1.
double map_asset_to_default(double p, double rho_A);

/// Inverse of map_asset_to_default on [0,1] by bisection; |f(result) - rho_D| <= 1e-8.
double map_default_to_asset(double p, double rho_D);

enum class SlopeMode {
    /// phi(Y)^2 / (p(1-p)), the derivative f'(0).
    Plackett,
    /// The closed form (1/(2 pi p(1-p))) (int_{-inf}^{Y} e^{-x^2/2} dx)^2 = p / (1-p),
    /// kept for comparison; it is not the tangent slope of f.
    SquaredCdf,
};

/// Slope A of the small-correlation approximation f(rho) ~ A rho.
double tangent_slope_A(double p, SlopeMode mode = SlopeMode::Plackett);

/// C(t) = f(rho_A d_t), the default correlation of obligors t years apart.
double cross_time_default_correlation(const ModelParams& params, std::size_t lag);

}  // namespace merton
