#pragma once

#include <cstddef>
#include <vector>

#include "msvl/scenario.hpp"

namespace msvl {

struct ReferencePoint {
    Vec2 coord;
    std::vector<double> rss;       // per-BS mean, kNotDetected if never seen
    std::vector<double> gradient;  // per-BS mean spatial gradient
    long cell_x = 0;
    long cell_y = 0;
};

struct FingerprintGrid {
    double grid_size_m = 2.0;
    std::vector<ReferencePoint> points;
};

/// Aggregates the dataset into grid cells: one reference point per occupied
/// cell with mean coordinate, mean RSS and mean gradient fingerprints.
FingerprintGrid build_fingerprint_grid(
    const std::vector<RoadSignalSequence>& dataset, double grid_size_m);

/// Restricted weighted KNN: candidates are limited to the cell cluster
/// (Chebyshev radius `cluster_radius_cells`) around the reference point
/// nearest in signal space, then the k nearest candidates are averaged
/// with inverse signal-distance weights.
Vec2 rwknn_locate(const FingerprintGrid& grid,
                  const std::vector<double>& query_rss, int k = 3,
                  int cluster_radius_cells = 2);

struct GiftResult {
    Vec2 coord;
    bool ambiguous = false;  // query gradients carry no information
};

/// Nearest neighbor in gradient-fingerprint space.
GiftResult gift_locate(const FingerprintGrid& grid,
                       const std::vector<double>& query_gradient);

/// Per-BS spatial gradient between two consecutive RSS samples.
std::vector<double> gradient_query(const std::vector<double>& prev_rss,
                                   const std::vector<double>& cur_rss,
                                   double sample_interval_m);

struct CfElsResult {
    Vec2 coord;
    double residual = 0.0;
};

/// Curve-fit exhaustive location search: scans the road bounding region at
/// step_m and returns the point minimizing the RSS prediction residual of
/// the scenario's propagation model.
CfElsResult cf_els_locate(const Scenario& scenario,
                          const std::vector<double>& query_rss,
                          double step_m);

/// Residual of the query against the model prediction at one point
/// (sum of squared dB differences over detected query entries).
double cf_els_residual(const Scenario& scenario,
                       const std::vector<double>& query_rss, Vec2 point);

}  // namespace msvl
