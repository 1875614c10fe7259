#pragma once

// Univariate and bivariate standard normal distribution functions.

namespace merton {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double std_normal_pdf(double x) noexcept;

/// Phi(x). Throws DomainError for non-finite x.
double std_normal_cdf(double x);

/// log Phi(x), accurate deep into the lower tail where Phi underflows.
/// Accepts +-infinity.
double std_normal_log_cdf(double x) noexcept;

/// Inverse of Phi on (0,1). Wichura's AS241 rational approximation followed
/// by one Halley correction against erfc. Throws DomainError outside (0,1).
double std_normal_quantile(double p);

/// AS241 alone (about 1e-16 relative), for sampling. p must lie in (0,1).
double std_normal_quantile_as241(double p) noexcept;

/// Density of the standardized bivariate normal with correlation rho, |rho| < 1.
double bivariate_normal_pdf(double h, double k, double rho) noexcept;

/// P(X <= h, Y <= k) for standardized bivariate normal with correlation rho.
///
/// Genz's BVND adaptation of the Drezner-Wesolowsky method: Gauss-Legendre
/// quadrature of the Plackett integral in arcsin(rho) for |rho| < 0.925, and
/// of a series-corrected tail integral otherwise. Absolute error is near
/// double precision. h and k may be +-infinity; rho in {-1, 0, 1} uses the
/// exact limits. Throws DomainError for |rho| > 1 or NaN arguments.
double bivariate_normal_cdf(double h, double k, double rho);

/// Phi2(h,k;rho) - Phi(h)Phi(k) without forming the difference of two
/// near-equal numbers when |rho| is small. Same algorithm as
/// bivariate_normal_cdf.
double bivariate_normal_excess(double h, double k, double rho);

}  // namespace merton
