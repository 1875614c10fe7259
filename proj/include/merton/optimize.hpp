#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace merton {

struct NelderMeadOptions {
    /// Edge length of the initial simplex around the start point.
    double initial_step = 0.5;
    /// Stop when every vertex lies within this distance of the best one.
    double size_tolerance = 1e-6;
    std::size_t max_evaluations = 2000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Unconstrained Nelder-Mead minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2). +infinity is an
/// acceptable objective value and simply loses every comparison.
NelderMeadResult nelder_mead_minimize(const std::function<double(std::span<const double>)>& objective,
                                      std::vector<double> start,
                                      const NelderMeadOptions& options = {});

}  // namespace merton
