#include "merton/toeplitz.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "merton/error.hpp"
#include "merton/random.hpp"

namespace merton {

namespace {

// Attempts L L^T = sigma + jitter I; returns false on a nonpositive pivot.
bool try_factor(const CorrelationMatrix& sigma, double jitter, std::vector<double>& packed) {
    const std::size_t n = sigma.dim();
    packed.assign(n * (n + 1) / 2, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double* row_i = packed.data() + i * (i + 1) / 2;
        for (std::size_t j = 0; j <= i; ++j) {
            const double* row_j = packed.data() + j * (j + 1) / 2;
            double s = sigma(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= row_i[k] * row_j[k];
            if (i == j) {
                s += jitter;
                if (!(s > 0.0) || !std::isfinite(s)) return false;
                row_i[i] = std::sqrt(s);
            } else {
                row_i[j] = s / row_j[j];
            }
        }
    }
    return true;
}

}  // namespace

CorrelationMatrix::CorrelationMatrix(std::vector<double> lags) : lags_(std::move(lags)) {
    if (lags_.empty()) throw DomainError("correlation matrix dimension must be >= 1");
    if (lags_.front() != 1.0) throw DomainError("correlation matrix diagonal must be 1");
    for (double d : lags_) {
        if (!(d >= -1.0 && d <= 1.0)) throw DomainError("correlation entry outside [-1,1]");
    }
}

CorrelationMatrix toeplitz_from_kernel(const DecayKernel& kernel, std::size_t dim) {
    if (dim == 0) throw DomainError("toeplitz_from_kernel: T must be >= 1");
    std::vector<double> lags(dim);
    for (std::size_t i = 0; i < dim; ++i) lags[i] = kernel.value(i);
    return CorrelationMatrix(std::move(lags));
}

CholeskyFactor::CholeskyFactor(std::size_t dim, std::vector<double> packed, double jitter_used)
    : dim_(dim), packed_(std::move(packed)), jitter_used_(jitter_used) {
    if (packed_.size() != dim_ * (dim_ + 1) / 2) {
        throw DomainError("CholeskyFactor: packed storage has the wrong size");
    }
}

void CholeskyFactor::apply(std::span<const double> z, std::span<double> out) const {
    if (z.size() != dim_ || out.size() != dim_) {
        throw DomainError("CholeskyFactor::apply: dimension mismatch");
    }
    for (std::size_t i = dim_; i-- > 0;) {
        const double* r = packed_.data() + i * (i + 1) / 2;
        double s = 0.0;
        for (std::size_t j = 0; j <= i; ++j) s += r[j] * z[j];
        out[i] = s;
    }
}

CholeskyFactor cholesky_psd(const CorrelationMatrix& sigma, double max_jitter) {
    if (!(max_jitter >= 0.0)) throw DomainError("cholesky_psd: max_jitter must be >= 0");
    std::vector<double> packed;
    if (try_factor(sigma, 0.0, packed)) return CholeskyFactor(sigma.dim(), std::move(packed), 0.0);
    double last_failed = 0.0;
    for (double jitter = 1e-12; jitter <= max_jitter; jitter *= 2.0) {
        if (try_factor(sigma, jitter, packed)) {
            return CholeskyFactor(sigma.dim(), std::move(packed), jitter);
        }
        last_failed = jitter;
    }
    std::ostringstream msg;
    msg << "cholesky_psd: matrix of dimension " << sigma.dim()
        << " is not positive semidefinite within jitter " << last_failed;
    throw NotPsdError(msg.str(), last_failed);
}

void standard_normal_fill(std::uint64_t seed, std::uint64_t path_index, std::span<double> z) {
    CounterRng rng(seed, path_index);
    for (double& v : z) v = rng.normal();
}

GaussianPath sample_gaussian_path(const CholeskyFactor& factor, std::uint64_t seed,
                                  std::uint64_t path_index) {
    std::vector<double> z(factor.dim());
    standard_normal_fill(seed, path_index, z);
    GaussianPath path{std::vector<double>(factor.dim())};
    factor.apply(z, path.values);
    return path;
}

PathGenerator::PathGenerator(const DecayKernel& kernel, std::size_t dim, double max_jitter,
                             bool force_ar1)
    : dim_(dim) {
    if (dim == 0) throw DomainError("PathGenerator: T must be >= 1");
    const bool ar1 = kernel.family() == KernelFamily::Exponential &&
                     (force_ar1 || dim > kAr1Threshold);
    if (ar1) {
        method_ = Method::Ar1;
        theta_ = kernel.parameter();
    } else {
        method_ = Method::Cholesky;
        factor_ = cholesky_psd(toeplitz_from_kernel(kernel, dim), max_jitter);
    }
}

void PathGenerator::transform(std::span<const double> z, std::span<double> out) const {
    if (method_ == Method::Cholesky) {
        factor_->apply(z, out);
        return;
    }
    if (z.size() != dim_ || out.size() != dim_) {
        throw DomainError("PathGenerator::transform: dimension mismatch");
    }
    const double innovation = std::sqrt((1.0 - theta_) * (1.0 + theta_));
    double s = z[0];
    out[0] = s;
    for (std::size_t t = 1; t < dim_; ++t) {
        s = theta_ * s + innovation * z[t];
        out[t] = s;
    }
}

GaussianPath PathGenerator::sample(std::uint64_t seed, std::uint64_t path_index) const {
    std::vector<double> z(dim_);
    standard_normal_fill(seed, path_index, z);
    GaussianPath path{std::vector<double>(dim_)};
    transform(z, path.values);
    return path;
}

}  // namespace merton
