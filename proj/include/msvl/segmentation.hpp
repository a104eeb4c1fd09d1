#pragma once

#include <cstddef>
#include <vector>

#include "msvl/scenario.hpp"

namespace msvl {

struct SegmentationConfig {
    double tau = 0.0005;       // gradient change threshold, dB/m
    int min_segment_len = 5;   // positions
    double penalty = -1.0;     // cost increase tolerated per merge;
                               // negative = calibrate from the merge trace
};

struct SegmentBound {
    std::size_t start = 0;  // inclusive position indices
    std::size_t end = 0;
    double cost = 0.0;
};

struct SegmentPartition {
    int road_id = 0;
    std::vector<std::size_t> sp_indices;       // strictly increasing
    std::vector<SegmentBound> segments;        // contiguous, exhaustive

    std::size_t sp_count() const { return sp_indices.size(); }
    double total_cost() const;
};

/// sgn(P_{j+1,k} - P_{j,k}) * g_{j,k}^2; NaN when either RSS is missing.
double signed_sq_gradient(const RoadSignalSequence& seq, std::size_t j,
                          std::size_t k);

struct SegmentCostResult {
    double cost = 0.0;
    bool skipped_bs = false;  // some BS had undetected samples in the range
};

/// Sum over BSs of the variance of the signed square gradient over
/// [start, end]. A BS contributes only where it is detected throughout.
SegmentCostResult segment_cost(const RoadSignalSequence& seq,
                               std::size_t start, std::size_t end);

/// Gradient sign flip or |delta g| >= tau for at least one BS at position j.
bool is_singular_point(const RoadSignalSequence& seq, std::size_t j,
                       double tau);

/// Bottom-up merge over the finest partition whose boundaries all satisfy
/// the singular-point condition; stops when the cheapest merge costs more
/// than the penalty.
SegmentPartition bottom_up_partition(const RoadSignalSequence& seq,
                                     const SegmentationConfig& config);

/// Globally cost-minimal partition into exactly n_segments (dynamic
/// programming; sequences up to 40 positions). Test oracle.
SegmentPartition exhaustive_partition_oracle(const RoadSignalSequence& seq,
                                             std::size_t n_segments,
                                             int min_segment_len = 2);

/// Partition export: road_id, sp_indices, per-segment (start, end, cost).
std::string partition_to_text(const SegmentPartition& partition);

}  // namespace msvl
