#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "msvl/scenario.hpp"

namespace msvl {

/// Per-BS polynomial mapping RSS -> coordinate within one segment.
struct FittedCurve {
    int road_id = 0;
    int segment_id = 0;
    int bs_index = 0;
    int order = 1;
    std::vector<double> theta;  // x coefficients, ascending powers of RSS
    std::vector<double> alpha;  // y coefficients
    double fit_residual = 0.0;  // RMS Euclidean residual over the fit, meters

    double eval_x(double rss) const;
    double eval_y(double rss) const;
};

struct BoundingBox {
    Vec2 min;
    Vec2 max;

    BoundingBox expanded(double fraction) const;
    Vec2 clamp(Vec2 p) const;
};

BoundingBox bounding_box(const RoadSignalSequence& seq, std::size_t start,
                         std::size_t end);

/// Least-squares fit of 2K polynomials over [start, end]; one curve per BS
/// detected throughout the range. Falls back to the largest order the
/// segment supports; throws naming the BS when its RSS is constant.
std::vector<FittedCurve> fit_segment_curves(const RoadSignalSequence& seq,
                                            std::size_t start,
                                            std::size_t end, int order);

/// Mean of per-curve evaluations over BSs detected in the query vector,
/// optionally clamped to an extrapolation guard box.
Vec2 map_coordinate(const std::vector<FittedCurve>& curves,
                    const std::vector<double>& rss,
                    const std::optional<BoundingBox>& guard = std::nullopt);

}  // namespace msvl
