#pragma once

#include <cstddef>
#include <vector>

#include "msvl/features.hpp"
#include "msvl/profile.hpp"

namespace msvl {

/// Trailing window of online RSS samples, oldest first. Positions are
/// spaced by the profile's sample interval; no ground truth is kept.
struct OnlineBuffer {
    std::size_t capacity = 128;
    std::vector<std::vector<double>> samples;

    void push(std::vector<double> rss);
    std::size_t size() const { return samples.size(); }
};

struct MultiScalePosition {
    bool located = false;  // false = incomparable against every road
    int road_id = -1;
    int segment_id = -1;
    Vec2 coord;
    double posterior = 0.0;
    double latency_us = 0.0;
    std::size_t comparisons = 0;   // masked feature comparisons performed
    bool uniform_fallback = false; // all segment likelihoods were zero
};

struct RoadMatch {
    double probability = 0.0;
    bool comparable = false;  // some selected feature detected on both sides
    std::size_t comparisons = 0;
};

/// exp(-l2 distance) between the masked, road-normalized user features and
/// the road's stored vector. The mask is intersected with the user's
/// detected features; an empty intersection is flagged incomparable.
RoadMatch road_match_probability(const FeatureSet& user,
                                 const RoadProfile& road);

struct SegmentPosterior {
    std::vector<double> posterior;  // sums to 1 over the road's segments
    int argmax = 0;
    bool uniform_fallback = false;
    std::size_t comparisons = 0;
};

/// Per-segment posterior on one road: road match probability x prior x
/// exp(-l2 distance in segment feature space), normalized.
SegmentPosterior segment_posterior(const FeatureSet& user,
                                   const RoadProfile& road,
                                   double road_probability = 1.0);

/// One multi-scale fix from the trailing buffer: delimit the window at the
/// most recent online singular point, match the road, maximize the segment
/// posterior, map the newest sample through that segment's curves. When the
/// SP is so recent that fewer than three samples follow it, the window ends
/// at the SP and the fix reports the segment after the matched one.
MultiScalePosition locate(const OnlineBuffer& buffer,
                          const RoadProfileDB& db);

/// Worst-case comparison count qK(m + max n_i + 1) of one locate call.
std::size_t matching_cost(const RoadProfileDB& db);

/// The buffer viewed as a straight-line sequence at the DB sample
/// interval (used for window delimitation and feature extraction).
RoadSignalSequence buffer_as_sequence(const OnlineBuffer& buffer,
                                      double sample_interval_m);

}  // namespace msvl
