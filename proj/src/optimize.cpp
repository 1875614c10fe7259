#include "merton/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace merton {

NelderMeadResult nelder_mead_minimize(const std::function<double(std::span<const double>)>& objective,
                                      std::vector<double> start, const NelderMeadOptions& options) {
    const std::size_t dim = start.size();
    NelderMeadResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double v = objective(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    if (dim == 0) {
        result.value = eval(start);
        result.x = std::move(start);
        result.converged = true;
        return result;
    }

    std::vector<std::vector<double>> simplex(dim + 1, start);
    for (std::size_t j = 0; j < dim; ++j) simplex[j + 1][j] += options.initial_step;
    std::vector<double> values(dim + 1);
    for (std::size_t j = 0; j <= dim; ++j) values[j] = eval(simplex[j]);

    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), trial(dim), trial2(dim);
    auto point_along = [&](double coef, std::vector<double>& out) {
        const auto& worst = simplex[order.back()];
        for (std::size_t i = 0; i < dim; ++i) out[i] = centroid[i] + coef * (worst[i] - centroid[i]);
    };

    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const auto& best = simplex[order.front()];
        double size = 0.0;
        for (std::size_t j = 1; j <= dim; ++j) {
            const auto& v = simplex[order[j]];
            for (std::size_t i = 0; i < dim; ++i) size = std::max(size, std::abs(v[i] - best[i]));
        }
        if (size <= options.size_tolerance) {
            result.converged = true;
            break;
        }
        if (result.evaluations >= options.max_evaluations) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t j = 0; j < dim; ++j) {
            for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[order[j]][i];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);

        const std::size_t worst = order.back();
        const double f_best = values[order.front()];
        const double f_second = values[order[dim - 1]];
        const double f_worst = values[worst];

        point_along(-1.0, trial);
        const double f_reflect = eval(trial);
        if (f_reflect < f_best) {
            point_along(-2.0, trial2);
            const double f_expand = eval(trial2);
            if (f_expand < f_reflect) {
                simplex[worst] = trial2;
                values[worst] = f_expand;
            } else {
                simplex[worst] = trial;
                values[worst] = f_reflect;
            }
            continue;
        }
        if (f_reflect < f_second) {
            simplex[worst] = trial;
            values[worst] = f_reflect;
            continue;
        }
        const bool outside = f_reflect < f_worst;
        point_along(outside ? -0.5 : 0.5, trial2);
        const double f_contract = eval(trial2);
        if (f_contract < (outside ? f_reflect : f_worst)) {
            simplex[worst] = trial2;
            values[worst] = f_contract;
            continue;
        }
        const std::vector<double> anchor = simplex[order.front()];
        for (std::size_t j = 1; j <= dim; ++j) {
            auto& v = simplex[order[j]];
            for (std::size_t i = 0; i < dim; ++i) v[i] = anchor[i] + 0.5 * (v[i] - anchor[i]);
            values[order[j]] = eval(v);
        }
    }
    result.x = simplex[order.front()];
    result.value = values[order.front()];
    return result;
}

}  // namespace merton
