#include "msvl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace msvl {

double compute_mde(const std::vector<double>& errors) {
    if (errors.empty()) {
        throw std::invalid_argument("compute_mde: no errors");
    }
    double acc = 0.0;
    for (double e : errors) acc += e;
    return acc / static_cast<double>(errors.size());
}

double compute_rmse(const std::vector<double>& errors) {
    if (errors.empty()) {
        throw std::invalid_argument("compute_rmse: no errors");
    }
    double acc = 0.0;
    for (double e : errors) acc += e * e;
    return std::sqrt(acc / static_cast<double>(errors.size()));
}

std::vector<std::pair<double, double>> compute_cdf(
    const std::vector<double>& errors, std::size_t resolution) {
    if (errors.empty()) {
        throw std::invalid_argument("compute_cdf: no errors");
    }
    if (resolution < 2) {
        throw std::invalid_argument("compute_cdf: resolution must be >= 2");
    }
    std::vector<double> sorted(errors);
    std::sort(sorted.begin(), sorted.end());
    const double max_e = sorted.back();
    const double n = static_cast<double>(sorted.size());

    std::vector<std::pair<double, double>> cdf;
    cdf.reserve(resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
        const double e = max_e * static_cast<double>(i) /
                         static_cast<double>(resolution - 1);
        const auto cnt = static_cast<double>(
            std::upper_bound(sorted.begin(), sorted.end(), e) -
            sorted.begin());
        cdf.emplace_back(e, cnt / n);
    }
    cdf.back().second = 1.0;  // guard against max_e rounding
    return cdf;
}

}  // namespace msvl
