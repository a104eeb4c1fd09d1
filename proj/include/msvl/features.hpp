#pragma once

#include <cstddef>
#include <vector>

#include "msvl/scenario.hpp"

namespace msvl {

/// Feature kinds, row order of the flattened q x K feature set.
enum FeatureKind {
    kSignedMeanSqGradient = 0,
    kMeanRss = 1,
    kRssVariance = 2,
    kMeanDiffToMacro = 3,  // mean of P_{j,k} - P_{j,1} (macro BS reference)
    kRssRange = 4,
};
inline constexpr std::size_t kFeatureKinds = 5;

struct FeatureSet {
    std::size_t n_bs = 0;
    std::vector<double> values;  // kind-major, size kFeatureKinds * n_bs;
                                 // NaN column = BS not detected in scope
    int road_id = 0;
    int segment_id = -1;  // -1 = road scope

    std::size_t dim() const { return values.size(); }
    double at(FeatureKind kind, std::size_t bs) const {
        return values[static_cast<std::size_t>(kind) * n_bs + bs];
    }
};

struct SelectionMask {
    std::vector<std::uint8_t> diag;  // length qK, entries 0/1

    std::size_t count() const;
    bool operator==(const SelectionMask&) const = default;
};

struct SFVector {
    SelectionMask mask;
    std::vector<double> values;  // zero at unselected positions
    int road_id = 0;
    int segment_id = -1;
};

struct NormalizationParams {
    std::vector<double> mean;
    std::vector<double> std;  // 1.0 where the feature is degenerate

    std::vector<double> normalize(const std::vector<double>& raw) const;
};

struct SFConfig {
    double gamma = 0.1;        // normalized-feature saliency threshold
    int bins = 8;              // histogram bins for entropy estimation
    int max_exact_subset = 16; // exhaustive search cap on candidate count
};

/// Five statistical features per BS over the position range [start, end].
FeatureSet extract_feature_set(const RoadSignalSequence& seq,
                               std::size_t start, std::size_t end);
FeatureSet extract_feature_set(const RoadSignalSequence& seq);

/// H(class) - H(class | selected features), in bits, with uniform class
/// priors and equal-width joint histogram binning. Each corpus entry is
/// its own class.
double information_gain(const SelectionMask& mask,
                        const std::vector<FeatureSet>& corpus, int bins);

NormalizationParams normalization_params(
    const std::vector<FeatureSet>& corpus);

/// Indices of features whose normalized values change by >= gamma between
/// some pair of adjacent corpus entries (and are finite everywhere).
std::vector<std::size_t> saliency_prefilter(
    const std::vector<FeatureSet>& corpus, double gamma);

struct SelectionResult {
    SelectionMask mask;
    double gain = 0.0;
    bool fallback_full = false;  // prefilter removed everything
};

/// Information-gain-maximizing mask over the prefiltered candidates:
/// exhaustive when few enough, greedy forward selection otherwise.
/// Ties prefer the smaller mask, then the lexicographically smaller one.
SelectionResult select_salient(const std::vector<FeatureSet>& corpus,
                               const SFConfig& config);

SFVector apply_mask(const SelectionMask& mask,
                    const std::vector<double>& values);
SFVector apply_mask(const SelectionMask& mask, const FeatureSet& features);

}  // namespace msvl
