#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace merton {

enum class KernelFamily { Exponential, Power };

std::string_view to_string(KernelFamily family) noexcept;

/// Parses "exponential"/"exp" or "power"/"pow". Throws DomainError otherwise.
KernelFamily parse_kernel_family(std::string_view name);

/*!
 * Temporal correlation of the yearly systematic factor at lag i.
 *
 *   Exponential: d_i = theta^i,        0 <= theta <= 1
 *   Power:       d_i = (i+1)^(-gamma), gamma >= 0
 *
 * d_0 = 1 in both families and d_i is nonincreasing.
 */
class DecayKernel {
  public:
    static DecayKernel exponential(double theta);
    static DecayKernel power(double gamma);
    static DecayKernel of(KernelFamily family, double parameter);

    KernelFamily family() const noexcept { return family_; }
    /// theta or gamma.
    double parameter() const noexcept { return parameter_; }

    double value(std::size_t lag) const noexcept;

    friend bool operator==(const DecayKernel&, const DecayKernel&) = default;

  private:
    DecayKernel(KernelFamily family, double parameter) noexcept
        : family_(family), parameter_(parameter) {}

    KernelFamily family_;
    double parameter_;
};

inline double kernel_value(const DecayKernel& kernel, std::size_t lag) noexcept {
    return kernel.value(lag);
}

}  // namespace merton
