#include "merton/model.hpp"

#include <cmath>
#include <string>

#include "merton/error.hpp"
#include "merton/normal.hpp"

namespace merton {

namespace {

void require_probability(double p, const char* where) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError(std::string(where) + ": p must lie in (0,1), got " + std::to_string(p));
    }
}

}  // namespace

std::string_view to_string(KernelFamily family) noexcept {
    return family == KernelFamily::Exponential ? "exponential" : "power";
}

KernelFamily parse_kernel_family(std::string_view name) {
    if (name == "exponential" || name == "exp") return KernelFamily::Exponential;
    if (name == "power" || name == "pow") return KernelFamily::Power;
    throw DomainError("unknown kernel family '" + std::string(name) + "'");
}

DecayKernel DecayKernel::exponential(double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw DomainError("exponential kernel: theta must lie in [0,1], got " + std::to_string(theta));
    }
    return DecayKernel(KernelFamily::Exponential, theta);
}

DecayKernel DecayKernel::power(double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw DomainError("power kernel: gamma must be finite and >= 0, got " + std::to_string(gamma));
    }
    return DecayKernel(KernelFamily::Power, gamma);
}

DecayKernel DecayKernel::of(KernelFamily family, double parameter) {
    return family == KernelFamily::Exponential ? exponential(parameter) : power(parameter);
}

double DecayKernel::value(std::size_t lag) const noexcept {
    if (lag == 0) return 1.0;
    if (family_ == KernelFamily::Exponential) return std::pow(parameter_, static_cast<double>(lag));
    return std::pow(static_cast<double>(lag) + 1.0, -parameter_);
}

ModelParams::ModelParams(double p, double rho_A, DecayKernel kernel)
    : p_(p), rho_A_(rho_A), kernel_(kernel), threshold_(0.0) {
    require_probability(p, "ModelParams");
    if (!(rho_A >= 0.0 && rho_A < 1.0)) {
        throw DomainError("ModelParams: rho_A must lie in [0,1), got " + std::to_string(rho_A));
    }
    threshold_ = std_normal_quantile(p);
}

double conditional_pd(const ModelParams& params, double s) {
    if (!std::isfinite(s)) throw DomainError("conditional_pd: s must be finite");
    const double rho = params.rho_A();
    return std_normal_cdf((params.threshold() - std::sqrt(rho) * s) / std::sqrt(1.0 - rho));
}

double map_asset_to_default(double p, double rho_A) {
    require_probability(p, "map_asset_to_default");
    if (!(rho_A >= -1.0 && rho_A <= 1.0)) {
        throw DomainError("map_asset_to_default: rho_A must lie in [-1,1]");
    }
    if (rho_A == 0.0) return 0.0;
    if (rho_A == 1.0) return 1.0;
    const double y = std_normal_quantile(p);
    return bivariate_normal_excess(y, y, rho_A) / (p * (1.0 - p));
}

double map_default_to_asset(double p, double rho_D) {
    require_probability(p, "map_default_to_asset");
    if (!(rho_D >= 0.0 && rho_D <= 1.0)) {
        throw DomainError("map_default_to_asset: rho_D must lie in [0,1]");
    }
    if (rho_D == 0.0) return 0.0;
    if (rho_D == 1.0) return 1.0;
    double lo = 0.0;
    double hi = 1.0;
    // f is increasing; stop on the bracket width, which gives |f - rho_D| far
    // below 1e-8 because f' is bounded on [0, 1 - eps].
    for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (map_asset_to_default(p, mid) < rho_D) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double tangent_slope_A(double p, SlopeMode mode) {
    require_probability(p, "tangent_slope_A");
    if (mode == SlopeMode::SquaredCdf) return p / (1.0 - p);
    const double density = std_normal_pdf(std_normal_quantile(p));
    return density * density / (p * (1.0 - p));
}

double cross_time_default_correlation(const ModelParams& params, std::size_t lag) {
    if (lag == 0) throw DomainError("cross_time_default_correlation: lag must be >= 1");
    return map_asset_to_default(params.p(), params.rho_A() * params.kernel().value(lag));
}

}  // namespace merton
