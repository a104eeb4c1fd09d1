#include "msvl/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "msvl/kernels.hpp"

namespace msvl {

double SegmentPartition::total_cost() const {
    double total = 0.0;
    for (const auto& s : segments) total += s.cost;
    return total;
}

double signed_sq_gradient(const RoadSignalSequence& seq, std::size_t j,
                          std::size_t k) {
    const double g = signal_gradient(seq, j, k);
    if (!is_detected(g)) return kNotDetected;
    const double dp = seq.records[j + 1].rss[k] - seq.records[j].rss[k];
    const double s = (dp > 0.0) ? 1.0 : (dp < 0.0 ? -1.0 : 0.0);
    return s * g * g;
}

SegmentCostResult segment_cost(const RoadSignalSequence& seq,
                               std::size_t start, std::size_t end) {
    const std::size_t len = seq.size();
    if (start >= end || end >= len) {
        throw std::invalid_argument("segment_cost: bad range");
    }
    // only gradients between positions inside the segment count; the
    // boundary position's outgoing gradient belongs to the next segment
    const std::size_t gend = end - 1;
    const std::size_t n_grad = gend - start + 1;
    const std::size_t n_bs = seq.bs_count();

    std::vector<double> p(n_grad + 1), inv_d(n_grad), v(n_grad);
    for (std::size_t j = 0; j < n_grad; ++j) {
        const double d = distance(seq.records[start + j].coord,
                                  seq.records[start + j + 1].coord);
        if (d == 0.0) {
            throw std::domain_error("segment_cost: zero inter-sample distance");
        }
        inv_d[j] = 1.0 / d;
    }

    SegmentCostResult result;
    for (std::size_t k = 0; k < n_bs; ++k) {
        bool detected = true;
        for (std::size_t j = start; j <= gend + 1; ++j) {
            if (!is_detected(seq.records[j].rss[k])) {
                detected = false;
                break;
            }
        }
        if (!detected) {
            result.skipped_bs = true;
            continue;
        }
        for (std::size_t j = 0; j <= n_grad; ++j) {
            p[j] = seq.records[start + j].rss[k];
        }
        kernels::signed_sq_gradient(p.data(), inv_d.data(), v.data(), n_grad);
        double mean = 0.0, var = 0.0;
        kernels::mean_var(v.data(), n_grad, mean, var);
        result.cost += var;
    }
    return result;
}

bool is_singular_point(const RoadSignalSequence& seq, std::size_t j,
                       double tau) {
    if (j == 0 || j + 1 >= seq.size()) return false;
    const std::size_t n_bs = seq.bs_count();
    for (std::size_t k = 0; k < n_bs; ++k) {
        const double g_prev = signal_gradient(seq, j - 1, k);
        const double g_next = signal_gradient(seq, j, k);
        if (!is_detected(g_prev) || !is_detected(g_next)) continue;
        if (g_prev * g_next < 0.0) return true;
        if (std::abs(g_next - g_prev) >= tau) return true;
    }
    return false;
}

namespace {

struct MergeState {
    std::vector<SegmentBound> segments;
};

// one bottom-up merge pass; returns the sequence of accepted cost increases
std::vector<double> run_merges(const RoadSignalSequence& seq,
                               std::vector<SegmentBound>& segments,
                               double penalty, bool stop_at_penalty) {
    std::vector<double> increases;
    while (segments.size() > 1) {
        double best_inc = std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        double best_merged_cost = 0.0;
        for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
            const double merged =
                segment_cost(seq, segments[i].start, segments[i + 1].end).cost;
            const double inc =
                merged - segments[i].cost - segments[i + 1].cost;
            if (inc < best_inc) {
                best_inc = inc;
                best_i = i;
                best_merged_cost = merged;
            }
        }
        if (stop_at_penalty && best_inc > penalty) break;
        segments[best_i].end = segments[best_i + 1].end;
        segments[best_i].cost = best_merged_cost;
        segments.erase(segments.begin() +
                       static_cast<std::ptrdiff_t>(best_i) + 1);
        increases.push_back(best_inc);
    }
    return increases;
}

std::vector<SegmentBound> finest_partition(const RoadSignalSequence& seq,
                                           const SegmentationConfig& config) {
    const std::size_t len = seq.size();
    const auto min_len = static_cast<std::size_t>(config.min_segment_len);
    std::vector<std::size_t> boundaries;
    std::size_t prev_end = static_cast<std::size_t>(-1);
    for (std::size_t j = 1; j + 1 < len; ++j) {
        if (!is_singular_point(seq, j, config.tau)) continue;
        const std::size_t left_len = j - prev_end;
        const std::size_t tail_len = len - 1 - j;
        if (left_len >= min_len && tail_len >= min_len) {
            boundaries.push_back(j);
            prev_end = j;
        }
    }
    std::vector<SegmentBound> segments;
    std::size_t start = 0;
    for (std::size_t b : boundaries) {
        segments.push_back({start, b, segment_cost(seq, start, b).cost});
        start = b + 1;
    }
    segments.push_back({start, len - 1, segment_cost(seq, start, len - 1).cost});
    return segments;
}

SegmentPartition to_partition(const RoadSignalSequence& seq,
                              std::vector<SegmentBound> segments) {
    SegmentPartition part;
    part.road_id = seq.road_id;
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
        part.sp_indices.push_back(segments[i].end);
    }
    part.segments = std::move(segments);
    return part;
}

}  // namespace

SegmentPartition bottom_up_partition(const RoadSignalSequence& seq,
                                     const SegmentationConfig& config) {
    if (seq.size() < 3) {
        throw std::invalid_argument("bottom_up_partition: sequence too short");
    }
    if (config.min_segment_len < 2) {
        throw std::invalid_argument(
            "bottom_up_partition: min_segment_len must be >= 2");
    }

    double penalty = config.penalty;
    if (penalty < 0.0) {
        // calibration pass: split each finest segment at its midpoint and
        // measure the cost increase of re-merging the two halves. Those
        // merges are homogeneous by construction, so the median increase is
        // the noise scale of a single merge; half of it tolerates noise
        // splits while keeping every genuine boundary (whose increase sits
        // far above the noise scale).
        const auto segments = finest_partition(seq, config);
        std::vector<double> increases;
        const auto min_len = static_cast<std::size_t>(config.min_segment_len);
        for (const auto& s : segments) {
            if (s.end - s.start + 1 < 2 * min_len) continue;
            const std::size_t mid = s.start + (s.end - s.start) / 2;
            const double left = segment_cost(seq, s.start, mid).cost;
            const double right = segment_cost(seq, mid + 1, s.end).cost;
            increases.push_back(s.cost - left - right);
        }
        if (increases.empty()) {
            penalty = 0.0;
        } else {
            std::sort(increases.begin(), increases.end());
            penalty = std::max(0.0, 0.5 * increases[increases.size() / 2]);
        }
    }

    auto segments = finest_partition(seq, config);
    run_merges(seq, segments, penalty, true);
    return to_partition(seq, std::move(segments));
}

SegmentPartition exhaustive_partition_oracle(const RoadSignalSequence& seq,
                                             std::size_t n_segments,
                                             int min_segment_len) {
    const std::size_t len = seq.size();
    if (len > 40) {
        throw std::invalid_argument(
            "exhaustive_partition_oracle: sequence longer than 40 positions");
    }
    const auto min_len = static_cast<std::size_t>(min_segment_len);
    if (n_segments == 0 || n_segments * min_len > len) {
        throw std::invalid_argument(
            "exhaustive_partition_oracle: infeasible segment count");
    }

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> cost(len, std::vector<double>(len, inf));
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t j = i + min_len - 1; j < len; ++j) {
            cost[i][j] = segment_cost(seq, i, j).cost;
        }
    }

    // dp[s][j]: best cost covering [0, j] with s+1 segments
    std::vector<std::vector<double>> dp(n_segments,
                                        std::vector<double>(len, inf));
    std::vector<std::vector<std::size_t>> from(
        n_segments, std::vector<std::size_t>(len, 0));
    for (std::size_t j = 0; j < len; ++j) dp[0][j] = cost[0][j];
    for (std::size_t s = 1; s < n_segments; ++s) {
        for (std::size_t j = 0; j < len; ++j) {
            for (std::size_t i = 1; i <= j; ++i) {
                if (dp[s - 1][i - 1] == inf || cost[i][j] == inf) continue;
                const double c = dp[s - 1][i - 1] + cost[i][j];
                if (c < dp[s][j]) {
                    dp[s][j] = c;
                    from[s][j] = i;
                }
            }
        }
    }
    if (dp[n_segments - 1][len - 1] == inf) {
        throw std::invalid_argument(
            "exhaustive_partition_oracle: no feasible partition");
    }

    std::vector<SegmentBound> segments;
    std::size_t j = len - 1;
    for (std::size_t s = n_segments; s-- > 0;) {
        const std::size_t i = (s == 0) ? 0 : from[s][j];
        segments.push_back({i, j, cost[i][j]});
        if (s > 0) j = i - 1;
    }
    std::reverse(segments.begin(), segments.end());
    return to_partition(seq, std::move(segments));
}

std::string partition_to_text(const SegmentPartition& partition) {
    std::ostringstream out;
    out << "road_id " << partition.road_id << "\n";
    out << "sp_indices";
    for (std::size_t b : partition.sp_indices) out << ' ' << b;
    out << "\n";
    out << "segments start end cost\n";
    for (const auto& s : partition.segments) {
        out << s.start << ' ' << s.end << ' ' << s.cost << "\n";
    }
    return out.str();
}

}  // namespace msvl
