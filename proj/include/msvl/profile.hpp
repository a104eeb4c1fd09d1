#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "msvl/curvefit.hpp"
#include "msvl/features.hpp"
#include "msvl/segmentation.hpp"

namespace msvl {

struct SegmentProfile {
    int segment_id = 0;
    std::size_t start = 0;  // position range in the build sequence
    std::size_t end = 0;
    SelectionMask mask;
    std::vector<double> sf;  // normalized, masked feature values
    double prior = 0.0;
    std::vector<FittedCurve> curves;
    BoundingBox guard;        // extrapolation guard for coordinate mapping
    double fit_residual = 0.0;  // mean RMS residual over the curves, meters
};

struct RoadProfile {
    int road_id = 0;
    SelectionMask mask;
    std::vector<double> sf;
    NormalizationParams norm;          // road-scale feature normalization
    NormalizationParams segment_norm;  // this road's segment-scale corpus
    std::vector<SegmentProfile> segments;
};

struct BuildConfig {
    SegmentationConfig segmentation;
    SFConfig sf;
    int curve_order = 3;
    double guard_expand = 0.1;  // bounding-box expansion fraction
    bool length_priors = false; // priors from segment length shares
};

struct RoadProfileDB {
    int schema_version = 1;
    std::uint64_t digest = 0;  // of the build dataset
    std::size_t n_bs = 0;
    double sample_interval_m = 1.0;
    BuildConfig config;
    std::vector<RoadProfile> roads;

    std::size_t road_count() const { return roads.size(); }
    std::size_t max_segments() const;
    const RoadProfile& road(int road_id) const;

    void validate() const;  // structural invariants; throws on violation
};

/// Stable digest of a dataset (its canonical file serialization).
std::uint64_t dataset_digest(const std::vector<RoadSignalSequence>& seqs);

/// Full offline pipeline: segmentation -> feature extraction -> salient
/// feature selection -> per-segment curve fitting. Deterministic.
/// Stage errors are rethrown with road/segment context.
RoadProfileDB build_profile_db(const std::vector<RoadSignalSequence>& dataset,
                               const BuildConfig& config);

void save_profile_db(const RoadProfileDB& db,
                     const std::filesystem::path& path);
RoadProfileDB load_profile_db(const std::filesystem::path& path);

/// Build settings from a JSON config file; missing keys keep defaults.
BuildConfig load_build_config(const std::filesystem::path& path);

}  // namespace msvl
