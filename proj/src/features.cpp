#include "msvl/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "msvl/kernels.hpp"
#include "msvl/segmentation.hpp"

namespace msvl {

std::size_t SelectionMask::count() const {
    std::size_t n = 0;
    for (auto b : diag) n += b;
    return n;
}

std::vector<double> NormalizationParams::normalize(
    const std::vector<double>& raw) const {
    if (raw.size() != mean.size()) {
        throw std::invalid_argument("normalize: dimension mismatch");
    }
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out[i] = (raw[i] - mean[i]) / std[i];
    }
    return out;
}

FeatureSet extract_feature_set(const RoadSignalSequence& seq,
                               std::size_t start, std::size_t end) {
    const std::size_t len = seq.size();
    if (start >= end || end >= len || end - start + 1 < 3) {
        throw std::invalid_argument("extract_feature_set: need >= 3 positions");
    }
    const std::size_t n_bs = seq.bs_count();
    FeatureSet fs;
    fs.n_bs = n_bs;
    fs.road_id = seq.road_id;
    fs.values.assign(kFeatureKinds * n_bs, kNotDetected);

    std::vector<bool> detected(n_bs, true);
    for (std::size_t k = 0; k < n_bs; ++k) {
        for (std::size_t j = start; j <= end; ++j) {
            if (!is_detected(seq.records[j].rss[k])) {
                detected[k] = false;
                break;
            }
        }
    }
    if (std::none_of(detected.begin(), detected.end(),
                     [](bool d) { return d; })) {
        throw std::runtime_error("extract_feature_set: no BS detected");
    }

    // gradients strictly inside the slice: samples start..end give
    // n_pos - 1 of them
    const std::size_t n_pos = end - start + 1;
    const std::size_t n_grad = n_pos - 1;
    std::vector<double> inv_d(n_grad), v(n_grad), rssbuf(n_pos);
    for (std::size_t j = 0; j < n_grad; ++j) {
        inv_d[j] = 1.0 / distance(seq.records[start + j].coord,
                                  seq.records[start + j + 1].coord);
    }

    for (std::size_t k = 0; k < n_bs; ++k) {
        if (!detected[k]) continue;
        for (std::size_t j = 0; j < n_pos; ++j) {
            rssbuf[j] = seq.records[start + j].rss[k];
        }
        kernels::signed_sq_gradient(rssbuf.data(), inv_d.data(), v.data(),
                                    n_grad);
        double gmean = 0.0, gvar = 0.0;
        kernels::mean_var(v.data(), n_grad, gmean, gvar);
        double mean = 0.0, var = 0.0;
        kernels::mean_var(rssbuf.data(), n_pos, mean, var);
        const auto [mn, mx] = std::minmax_element(rssbuf.begin(), rssbuf.end());

        fs.values[kSignedMeanSqGradient * n_bs + k] = gmean;
        fs.values[kMeanRss * n_bs + k] = mean;
        fs.values[kRssVariance * n_bs + k] = var;
        fs.values[kRssRange * n_bs + k] = *mx - *mn;
        if (k == 0) {
            fs.values[kMeanDiffToMacro * n_bs + k] = 0.0;
        } else if (detected[0]) {
            double acc = 0.0;
            for (std::size_t j = start; j <= end; ++j) {
                acc += seq.records[j].rss[k] - seq.records[j].rss[0];
            }
            fs.values[kMeanDiffToMacro * n_bs + k] =
                acc / static_cast<double>(n_pos);
        }
    }
    return fs;
}

FeatureSet extract_feature_set(const RoadSignalSequence& seq) {
    return extract_feature_set(seq, 0, seq.size() - 1);
}

namespace {

std::vector<std::size_t> selected_indices(const SelectionMask& mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < mask.diag.size(); ++i) {
        if (mask.diag[i]) idx.push_back(i);
    }
    return idx;
}

}  // namespace

double information_gain(const SelectionMask& mask,
                        const std::vector<FeatureSet>& corpus, int bins) {
    if (corpus.size() < 2) {
        throw std::invalid_argument("information_gain: corpus needs >= 2 entries");
    }
    if (bins < 2) {
        throw std::invalid_argument("information_gain: bins must be >= 2");
    }
    const std::size_t dim = corpus.front().dim();
    for (const auto& fs : corpus) {
        if (fs.dim() != dim) {
            throw std::invalid_argument("information_gain: ragged corpus");
        }
    }
    if (mask.diag.size() != dim) {
        throw std::invalid_argument("information_gain: mask dimension mismatch");
    }
    const auto idx = selected_indices(mask);
    if (idx.empty()) return 0.0;

    // equal-width bins over the finite corpus range of each feature
    std::vector<double> lo(idx.size()), hi(idx.size());
    for (std::size_t f = 0; f < idx.size(); ++f) {
        double mn = std::numeric_limits<double>::infinity();
        double mx = -mn;
        for (const auto& fs : corpus) {
            const double v = fs.values[idx[f]];
            if (!std::isfinite(v)) continue;
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        lo[f] = mn;
        hi[f] = mx;
    }

    std::map<std::vector<int>, int> groups;
    for (const auto& fs : corpus) {
        std::vector<int> key(idx.size());
        for (std::size_t f = 0; f < idx.size(); ++f) {
            const double v = fs.values[idx[f]];
            if (!std::isfinite(v)) {
                key[f] = -1;  // missing feature forms its own bin
            } else if (hi[f] <= lo[f]) {
                key[f] = 0;
            } else {
                const double t = (v - lo[f]) / (hi[f] - lo[f]);
                key[f] = std::min(bins - 1,
                                  static_cast<int>(t * bins));
            }
        }
        ++groups[key];
    }

    const double n = static_cast<double>(corpus.size());
    double h_cond = 0.0;
    for (const auto& [key, cnt] : groups) {
        // classes are uniform within a group of indistinguishable entries
        h_cond += (cnt / n) * std::log2(static_cast<double>(cnt));
    }
    return std::log2(n) - h_cond;
}

NormalizationParams normalization_params(
    const std::vector<FeatureSet>& corpus) {
    if (corpus.empty()) {
        throw std::invalid_argument("normalization_params: empty corpus");
    }
    const std::size_t dim = corpus.front().dim();
    NormalizationParams np;
    np.mean.assign(dim, 0.0);
    np.std.assign(dim, 1.0);
    for (std::size_t i = 0; i < dim; ++i) {
        double sum = 0.0;
        std::size_t cnt = 0;
        for (const auto& fs : corpus) {
            const double v = fs.values[i];
            if (std::isfinite(v)) {
                sum += v;
                ++cnt;
            }
        }
        if (cnt == 0) continue;
        const double mean = sum / static_cast<double>(cnt);
        double sq = 0.0;
        for (const auto& fs : corpus) {
            const double v = fs.values[i];
            if (std::isfinite(v)) sq += (v - mean) * (v - mean);
        }
        const double sd = std::sqrt(sq / static_cast<double>(cnt));
        np.mean[i] = mean;
        np.std[i] = sd > 0.0 ? sd : 1.0;
    }
    return np;
}

std::vector<std::size_t> saliency_prefilter(
    const std::vector<FeatureSet>& corpus, double gamma) {
    const auto np = normalization_params(corpus);
    const std::size_t dim = corpus.front().dim();
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < dim; ++i) {
        bool finite = true;
        for (const auto& fs : corpus) {
            if (!std::isfinite(fs.values[i])) {
                finite = false;
                break;
            }
        }
        if (!finite) continue;
        bool salient = false;
        for (std::size_t e = 0; e + 1 < corpus.size(); ++e) {
            const double a = (corpus[e].values[i] - np.mean[i]) / np.std[i];
            const double b =
                (corpus[e + 1].values[i] - np.mean[i]) / np.std[i];
            if (std::abs(b - a) >= gamma) {
                salient = true;
                break;
            }
        }
        if (salient) kept.push_back(i);
    }
    return kept;
}

namespace {

SelectionMask mask_from_indices(std::size_t dim,
                                const std::vector<std::size_t>& idx) {
    SelectionMask m;
    m.diag.assign(dim, 0);
    for (auto i : idx) m.diag[i] = 1;
    return m;
}

bool better_selection(double gain, const SelectionMask& mask, double best_gain,
                      const SelectionMask& best_mask) {
    constexpr double eps = 1e-12;
    if (gain > best_gain + eps) return true;
    if (gain < best_gain - eps) return false;
    const std::size_t c = mask.count(), bc = best_mask.count();
    if (c != bc) return c < bc;
    return selected_indices(mask) < selected_indices(best_mask);
}

}  // namespace

SelectionResult select_salient(const std::vector<FeatureSet>& corpus,
                               const SFConfig& config) {
    const std::size_t dim = corpus.front().dim();
    const auto candidates = saliency_prefilter(corpus, config.gamma);

    SelectionResult result;
    if (candidates.empty()) {
        // nothing passed the saliency threshold; keep every finite feature
        std::vector<std::size_t> finite;
        for (std::size_t i = 0; i < dim; ++i) {
            if (std::all_of(corpus.begin(), corpus.end(),
                            [i](const FeatureSet& fs) {
                                return std::isfinite(fs.values[i]);
                            })) {
                finite.push_back(i);
            }
        }
        result.mask = mask_from_indices(dim, finite);
        result.gain = information_gain(result.mask, corpus, config.bins);
        result.fallback_full = true;
        return result;
    }

    if (candidates.size() <=
        static_cast<std::size_t>(config.max_exact_subset)) {
        SelectionMask best = mask_from_indices(dim, {});
        double best_gain = 0.0;
        const std::size_t subsets = std::size_t{1} << candidates.size();
        for (std::size_t bits = 1; bits < subsets; ++bits) {
            std::vector<std::size_t> idx;
            for (std::size_t f = 0; f < candidates.size(); ++f) {
                if (bits & (std::size_t{1} << f)) idx.push_back(candidates[f]);
            }
            const auto mask = mask_from_indices(dim, idx);
            const double gain = information_gain(mask, corpus, config.bins);
            if (better_selection(gain, mask, best_gain, best)) {
                best = mask;
                best_gain = gain;
            }
        }
        result.mask = best;
        result.gain = best_gain;
        return result;
    }

    // greedy forward selection
    std::vector<std::size_t> chosen;
    double current_gain = 0.0;
    std::vector<bool> used(candidates.size(), false);
    for (;;) {
        double best_gain = current_gain;
        std::size_t best_f = candidates.size();
        for (std::size_t f = 0; f < candidates.size(); ++f) {
            if (used[f]) continue;
            auto idx = chosen;
            idx.push_back(candidates[f]);
            const double gain =
                information_gain(mask_from_indices(dim, idx), corpus,
                                 config.bins);
            if (gain > best_gain + 1e-12) {
                best_gain = gain;
                best_f = f;
            }
        }
        if (best_f == candidates.size()) break;
        used[best_f] = true;
        chosen.push_back(candidates[best_f]);
        std::sort(chosen.begin(), chosen.end());
        current_gain = best_gain;
    }
    result.mask = mask_from_indices(dim, chosen);
    result.gain = current_gain;
    return result;
}

SFVector apply_mask(const SelectionMask& mask,
                    const std::vector<double>& values) {
    if (mask.diag.size() != values.size()) {
        throw std::invalid_argument("apply_mask: dimension mismatch");
    }
    SFVector sf;
    sf.mask = mask;
    sf.values.assign(values.size(), 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (mask.diag[i]) sf.values[i] = values[i];
    }
    return sf;
}

SFVector apply_mask(const SelectionMask& mask, const FeatureSet& features) {
    auto sf = apply_mask(mask, features.values);
    sf.road_id = features.road_id;
    sf.segment_id = features.segment_id;
    return sf;
}

}  // namespace msvl
