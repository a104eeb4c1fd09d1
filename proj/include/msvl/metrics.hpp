#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace msvl {

/// Mean distance error: arithmetic mean of per-fix errors (meters).
double compute_mde(const std::vector<double>& errors);

/// Root mean squared error (meters).
double compute_rmse(const std::vector<double>& errors);

/// Empirical CDF sampled at `resolution` equally spaced error values from
/// 0 to the maximum error. Nondecreasing; final fraction is 1.0.
std::vector<std::pair<double, double>> compute_cdf(
    const std::vector<double>& errors, std::size_t resolution = 100);

}  // namespace msvl
