#include "msvl/locator.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "msvl/segmentation.hpp"

namespace msvl {

void OnlineBuffer::push(std::vector<double> rss) {
    if (!samples.empty() && rss.size() != samples.front().size()) {
        throw std::invalid_argument("OnlineBuffer: sample dimension changed");
    }
    samples.push_back(std::move(rss));
    if (samples.size() > capacity) {
        samples.erase(samples.begin(),
                      samples.begin() +
                          static_cast<std::ptrdiff_t>(samples.size() -
                                                      capacity));
    }
}

RoadSignalSequence buffer_as_sequence(const OnlineBuffer& buffer,
                                      double sample_interval_m) {
    RoadSignalSequence seq;
    seq.road_id = -1;
    seq.records.reserve(buffer.samples.size());
    for (std::size_t j = 0; j < buffer.samples.size(); ++j) {
        seq.records.push_back(
            {{static_cast<double>(j) * sample_interval_m, 0.0},
             buffer.samples[j]});
    }
    return seq;
}

namespace {

struct MaskedDistance {
    double dist = 0.0;
    std::size_t overlap = 0;
};

// l2 distance over the mask entries where the user feature is finite
MaskedDistance masked_distance(const SelectionMask& mask,
                               const NormalizationParams& norm,
                               const std::vector<double>& user_raw,
                               const std::vector<double>& stored_sf) {
    MaskedDistance out;
    double sq = 0.0;
    for (std::size_t i = 0; i < mask.diag.size(); ++i) {
        if (!mask.diag[i] || !std::isfinite(user_raw[i])) continue;
        const double u = (user_raw[i] - norm.mean[i]) / norm.std[i];
        const double d = u - stored_sf[i];
        sq += d * d;
        ++out.overlap;
    }
    out.dist = std::sqrt(sq);
    return out;
}

}  // namespace

RoadMatch road_match_probability(const FeatureSet& user,
                                 const RoadProfile& road) {
    if (user.dim() != road.mask.diag.size()) {
        throw std::invalid_argument(
            "road_match_probability: dimension mismatch");
    }
    const auto md = masked_distance(road.mask, road.norm, user.values,
                                    road.sf);
    RoadMatch match;
    match.comparisons = road.mask.count();
    if (md.overlap == 0) return match;
    match.comparable = true;
    match.probability = std::exp(-md.dist);
    return match;
}

SegmentPosterior segment_posterior(const FeatureSet& user,
                                   const RoadProfile& road,
                                   double road_probability) {
    if (road.segments.empty()) {
        throw std::invalid_argument("segment_posterior: road has no segments");
    }
    SegmentPosterior out;
    out.posterior.resize(road.segments.size(), 0.0);
    double total = 0.0;
    for (std::size_t s = 0; s < road.segments.size(); ++s) {
        const auto& seg = road.segments[s];
        const auto md = masked_distance(seg.mask, road.segment_norm,
                                        user.values, seg.sf);
        out.comparisons += seg.mask.count();
        const double likelihood =
            md.overlap > 0 ? std::exp(-md.dist) : 0.0;
        out.posterior[s] = road_probability * seg.prior * likelihood;
        total += out.posterior[s];
    }
    if (total <= 0.0) {
        out.uniform_fallback = true;
        const double u = 1.0 / static_cast<double>(road.segments.size());
        for (auto& p : out.posterior) p = u;
    } else {
        for (auto& p : out.posterior) p /= total;
    }
    out.argmax = 0;
    for (std::size_t s = 1; s < out.posterior.size(); ++s) {
        if (out.posterior[s] > out.posterior[static_cast<std::size_t>(
                                   out.argmax)]) {
            out.argmax = static_cast<int>(s);
        }
    }
    return out;
}

std::size_t matching_cost(const RoadProfileDB& db) {
    return kFeatureKinds * db.n_bs * (db.road_count() + db.max_segments() + 1);
}

MultiScalePosition locate(const OnlineBuffer& buffer,
                          const RoadProfileDB& db) {
    const auto t0 = std::chrono::steady_clock::now();
    MultiScalePosition fix;

    const auto seq = buffer_as_sequence(buffer, db.sample_interval_m);
    const std::size_t len = seq.size();
    const auto min_len = static_cast<std::size_t>(
        std::max(3, db.config.segmentation.min_segment_len));
    if (len < min_len) {
        throw std::invalid_argument("locate: buffer shorter than a segment");
    }

    // trailing window delimited at the most recent online singular point
    const double tau = db.config.segmentation.tau;
    std::size_t last_sp = 0;
    bool has_sp = false;
    for (std::size_t j = len - 2; j >= 1; --j) {
        if (is_singular_point(seq, j, tau)) {
            last_sp = j;
            has_sp = true;
            break;
        }
        if (j == 1) break;
    }

    std::size_t start = 0;
    std::size_t end = len - 1;
    bool crossing = false;
    if (has_sp) {
        if (last_sp + 3 <= len - 1) {
            // enough samples since the SP for a pure window
            start = last_sp + 1;
        } else {
            // the SP just happened: match the window that ends at it and
            // report the segment that follows it
            end = last_sp;
            crossing = true;
            for (std::size_t j = last_sp >= 2 ? last_sp - 1 : 0; j >= 1;
                 --j) {
                if (is_singular_point(seq, j, tau)) {
                    start = j + 1;
                    break;
                }
                if (j == 1) break;
            }
        }
    }
    if (end - start + 1 < 3) {
        start = end >= 2 ? end - 2 : 0;
    }
    if (end - start + 1 < 3) {
        throw std::invalid_argument("locate: buffer shorter than a segment");
    }
    const auto user = extract_feature_set(seq, start, end);

    const RoadProfile* best_road = nullptr;
    double best_prob = 0.0;
    for (const auto& road : db.roads) {
        const auto match = road_match_probability(user, road);
        fix.comparisons += match.comparisons;
        if (!match.comparable) continue;
        if (best_road == nullptr || match.probability > best_prob ||
            (match.probability == best_prob &&
             road.road_id < best_road->road_id)) {
            best_road = &road;
            best_prob = match.probability;
        }
    }
    if (best_road == nullptr) {
        fix.latency_us = std::chrono::duration<double, std::micro>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
        return fix;  // unlocatable
    }

    const auto post = segment_posterior(user, *best_road, best_prob);
    fix.comparisons += post.comparisons;
    std::size_t seg_idx = static_cast<std::size_t>(post.argmax);
    if (crossing && seg_idx + 1 < best_road->segments.size()) {
        // newest samples lie past the matched window's closing SP
        ++seg_idx;
    }
    const auto& seg = best_road->segments[seg_idx];

    fix.located = true;
    fix.road_id = best_road->road_id;
    fix.segment_id = seg.segment_id;
    fix.posterior = post.posterior[static_cast<std::size_t>(post.argmax)];
    fix.uniform_fallback = post.uniform_fallback;
    fix.coord = map_coordinate(seg.curves, buffer.samples.back(), seg.guard);
    fix.comparisons += kFeatureKinds * db.n_bs;  // coordinate mapping stage
    fix.latency_us = std::chrono::duration<double, std::micro>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    return fix;
}

}  // namespace msvl
