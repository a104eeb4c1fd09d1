#include "msvl/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace msvl {

namespace {

using nlohmann::json;

std::string mask_to_bits(const SelectionMask& mask) {
    std::string s(mask.diag.size(), '0');
    for (std::size_t i = 0; i < mask.diag.size(); ++i) {
        if (mask.diag[i]) s[i] = '1';
    }
    return s;
}

SelectionMask mask_from_bits(const std::string& s) {
    SelectionMask m;
    m.diag.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1') {
            throw std::runtime_error("profile: bad mask bit string");
        }
        m.diag.push_back(c == '1' ? 1 : 0);
    }
    return m;
}

SelectionMask finite_intersection(const SelectionMask& mask,
                                  const std::vector<double>& values) {
    SelectionMask out = mask;
    for (std::size_t i = 0; i < out.diag.size(); ++i) {
        if (!std::isfinite(values[i])) out.diag[i] = 0;
    }
    return out;
}

SelectionMask all_finite_mask(const std::vector<FeatureSet>& corpus) {
    SelectionMask m;
    m.diag.assign(corpus.front().dim(), 1);
    for (const auto& fs : corpus) {
        for (std::size_t i = 0; i < fs.dim(); ++i) {
            if (!std::isfinite(fs.values[i])) m.diag[i] = 0;
        }
    }
    return m;
}

std::vector<double> masked_normalized(const SelectionMask& mask,
                                      const NormalizationParams& norm,
                                      const std::vector<double>& raw) {
    std::vector<double> out(raw.size(), 0.0);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (mask.diag[i]) out[i] = (raw[i] - norm.mean[i]) / norm.std[i];
    }
    return out;
}

}  // namespace

std::size_t RoadProfileDB::max_segments() const {
    std::size_t m = 0;
    for (const auto& r : roads) m = std::max(m, r.segments.size());
    return m;
}

const RoadProfile& RoadProfileDB::road(int road_id) const {
    for (const auto& r : roads) {
        if (r.road_id == road_id) return r;
    }
    throw std::invalid_argument("profile: unknown road id " +
                                std::to_string(road_id));
}

void RoadProfileDB::validate() const {
    if (schema_version != 1) {
        throw std::runtime_error("profile: unsupported schema version " +
                                 std::to_string(schema_version));
    }
    const std::size_t dim = kFeatureKinds * n_bs;
    for (const auto& r : roads) {
        if (r.mask.diag.size() != dim || r.sf.size() != dim ||
            r.norm.mean.size() != dim || r.segment_norm.mean.size() != dim) {
            throw std::runtime_error("profile: road " +
                                     std::to_string(r.road_id) +
                                     " has inconsistent dimensions");
        }
        double prior_sum = 0.0;
        for (const auto& s : r.segments) {
            if (s.mask.diag.size() != dim || s.sf.size() != dim) {
                throw std::runtime_error(
                    "profile: road " + std::to_string(r.road_id) +
                    " segment " + std::to_string(s.segment_id) +
                    " has inconsistent dimensions");
            }
            prior_sum += s.prior;
        }
        if (!r.segments.empty() && std::abs(prior_sum - 1.0) > 1e-9) {
            throw std::runtime_error("profile: road " +
                                     std::to_string(r.road_id) +
                                     " priors do not sum to 1");
        }
    }
}

std::uint64_t dataset_digest(const std::vector<RoadSignalSequence>& seqs) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& seq : seqs) {
        mix(&seq.road_id, sizeof(seq.road_id));
        for (const auto& rec : seq.records) {
            mix(&rec.coord.x, sizeof(double));
            mix(&rec.coord.y, sizeof(double));
            for (double v : rec.rss) mix(&v, sizeof(double));
        }
    }
    return h;
}

RoadProfileDB build_profile_db(const std::vector<RoadSignalSequence>& dataset,
                               const BuildConfig& config) {
    if (dataset.empty()) {
        throw std::invalid_argument("build_profile_db: empty dataset");
    }
    RoadProfileDB db;
    db.digest = dataset_digest(dataset);
    db.n_bs = dataset.front().bs_count();
    db.config = config;
    if (dataset.front().size() >= 2) {
        db.sample_interval_m = distance(dataset.front().records[0].coord,
                                        dataset.front().records[1].coord);
    }

    // road-scale features across the corpus
    std::vector<FeatureSet> road_corpus;
    std::vector<SegmentPartition> partitions;
    for (const auto& seq : dataset) {
        try {
            road_corpus.push_back(extract_feature_set(seq));
            partitions.push_back(bottom_up_partition(seq,
                                                     config.segmentation));
        } catch (const std::exception& e) {
            throw std::runtime_error("build_profile_db: road " +
                                     std::to_string(seq.road_id) + ": " +
                                     e.what());
        }
    }
    SelectionMask road_mask;
    if (road_corpus.size() >= 2) {
        road_mask = select_salient(road_corpus, config.sf).mask;
    } else {
        road_mask = all_finite_mask(road_corpus);
    }
    const NormalizationParams road_norm = normalization_params(road_corpus);

    for (std::size_t r = 0; r < dataset.size(); ++r) {
        const auto& seq = dataset[r];
        RoadProfile road;
        road.road_id = seq.road_id;
        road.norm = road_norm;
        road.mask = finite_intersection(road_mask, road_corpus[r].values);
        road.sf = masked_normalized(road.mask, road_norm,
                                    road_corpus[r].values);

        // segment-scale corpus of this road
        std::vector<FeatureSet> seg_corpus;
        for (std::size_t s = 0; s < partitions[r].segments.size(); ++s) {
            const auto& bound = partitions[r].segments[s];
            try {
                auto fs = extract_feature_set(seq, bound.start, bound.end);
                fs.segment_id = static_cast<int>(s);
                seg_corpus.push_back(std::move(fs));
            } catch (const std::exception& e) {
                throw std::runtime_error(
                    "build_profile_db: road " + std::to_string(seq.road_id) +
                    " segment " + std::to_string(s) + ": " + e.what());
            }
        }
        SelectionMask seg_mask;
        if (seg_corpus.size() >= 2) {
            seg_mask = select_salient(seg_corpus, config.sf).mask;
        } else {
            seg_mask = all_finite_mask(seg_corpus);
        }
        road.segment_norm = normalization_params(seg_corpus);

        double length_total = 0.0;
        for (const auto& bound : partitions[r].segments) {
            length_total += static_cast<double>(bound.end - bound.start + 1);
        }
        for (std::size_t s = 0; s < partitions[r].segments.size(); ++s) {
            const auto& bound = partitions[r].segments[s];
            SegmentProfile seg;
            seg.segment_id = static_cast<int>(s);
            seg.start = bound.start;
            seg.end = bound.end;
            seg.mask = finite_intersection(seg_mask, seg_corpus[s].values);
            seg.sf = masked_normalized(seg.mask, road.segment_norm,
                                       seg_corpus[s].values);
            seg.prior =
                config.length_priors
                    ? static_cast<double>(bound.end - bound.start + 1) /
                          length_total
                    : 1.0 / static_cast<double>(partitions[r].segments.size());
            try {
                seg.curves = fit_segment_curves(seq, bound.start, bound.end,
                                                config.curve_order);
            } catch (const std::exception& e) {
                throw std::runtime_error(
                    "build_profile_db: road " + std::to_string(seq.road_id) +
                    " segment " + std::to_string(s) + ": " + e.what());
            }
            seg.guard = bounding_box(seq, bound.start, bound.end)
                            .expanded(config.guard_expand);
            double res = 0.0;
            for (auto& c : seg.curves) {
                c.segment_id = seg.segment_id;
                res += c.fit_residual;
            }
            seg.fit_residual = res / static_cast<double>(seg.curves.size());
            road.segments.push_back(std::move(seg));
        }
        db.roads.push_back(std::move(road));
    }
    db.validate();
    return db;
}

void save_profile_db(const RoadProfileDB& db,
                     const std::filesystem::path& path) {
    json j;
    j["schema_version"] = db.schema_version;
    j["digest"] = db.digest;
    j["n_bs"] = db.n_bs;
    j["sample_interval_m"] = db.sample_interval_m;
    j["config"] = {
        {"tau", db.config.segmentation.tau},
        {"min_segment_len", db.config.segmentation.min_segment_len},
        {"penalty", db.config.segmentation.penalty},
        {"gamma", db.config.sf.gamma},
        {"bins", db.config.sf.bins},
        {"max_exact_subset", db.config.sf.max_exact_subset},
        {"curve_order", db.config.curve_order},
        {"guard_expand", db.config.guard_expand},
        {"length_priors", db.config.length_priors},
    };
    j["roads"] = json::array();
    for (const auto& r : db.roads) {
        json jr;
        jr["road_id"] = r.road_id;
        jr["mask"] = mask_to_bits(r.mask);
        jr["sf"] = r.sf;
        jr["norm_mean"] = r.norm.mean;
        jr["norm_std"] = r.norm.std;
        jr["segment_norm_mean"] = r.segment_norm.mean;
        jr["segment_norm_std"] = r.segment_norm.std;
        jr["segments"] = json::array();
        for (const auto& s : r.segments) {
            json js;
            js["segment_id"] = s.segment_id;
            js["start"] = s.start;
            js["end"] = s.end;
            js["mask"] = mask_to_bits(s.mask);
            js["sf"] = s.sf;
            js["prior"] = s.prior;
            js["fit_residual"] = s.fit_residual;
            js["guard"] = {s.guard.min.x, s.guard.min.y, s.guard.max.x,
                           s.guard.max.y};
            js["curves"] = json::array();
            for (const auto& c : s.curves) {
                js["curves"].push_back({{"bs", c.bs_index},
                                        {"order", c.order},
                                        {"theta", c.theta},
                                        {"alpha", c.alpha},
                                        {"residual", c.fit_residual}});
            }
            jr["segments"].push_back(std::move(js));
        }
        j["roads"].push_back(std::move(jr));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("save_profile_db: cannot open " +
                                 path.string());
    }
    out << j.dump(2) << "\n";
}

RoadProfileDB load_profile_db(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("load_profile_db: cannot open " +
                                 path.string());
    }
    json j;
    in >> j;
    RoadProfileDB db;
    db.schema_version = j.at("schema_version").get<int>();
    db.digest = j.at("digest").get<std::uint64_t>();
    db.n_bs = j.at("n_bs").get<std::size_t>();
    db.sample_interval_m = j.at("sample_interval_m").get<double>();
    const auto& jc = j.at("config");
    db.config.segmentation.tau = jc.at("tau").get<double>();
    db.config.segmentation.min_segment_len =
        jc.at("min_segment_len").get<int>();
    db.config.segmentation.penalty = jc.at("penalty").get<double>();
    db.config.sf.gamma = jc.at("gamma").get<double>();
    db.config.sf.bins = jc.at("bins").get<int>();
    db.config.sf.max_exact_subset = jc.at("max_exact_subset").get<int>();
    db.config.curve_order = jc.at("curve_order").get<int>();
    db.config.guard_expand = jc.at("guard_expand").get<double>();
    db.config.length_priors = jc.at("length_priors").get<bool>();
    for (const auto& jr : j.at("roads")) {
        RoadProfile r;
        r.road_id = jr.at("road_id").get<int>();
        r.mask = mask_from_bits(jr.at("mask").get<std::string>());
        r.sf = jr.at("sf").get<std::vector<double>>();
        r.norm.mean = jr.at("norm_mean").get<std::vector<double>>();
        r.norm.std = jr.at("norm_std").get<std::vector<double>>();
        r.segment_norm.mean =
            jr.at("segment_norm_mean").get<std::vector<double>>();
        r.segment_norm.std =
            jr.at("segment_norm_std").get<std::vector<double>>();
        for (const auto& js : jr.at("segments")) {
            SegmentProfile s;
            s.segment_id = js.at("segment_id").get<int>();
            s.start = js.at("start").get<std::size_t>();
            s.end = js.at("end").get<std::size_t>();
            s.mask = mask_from_bits(js.at("mask").get<std::string>());
            s.sf = js.at("sf").get<std::vector<double>>();
            s.prior = js.at("prior").get<double>();
            s.fit_residual = js.at("fit_residual").get<double>();
            const auto& g = js.at("guard");
            s.guard = {{g.at(0).get<double>(), g.at(1).get<double>()},
                       {g.at(2).get<double>(), g.at(3).get<double>()}};
            for (const auto& jcur : js.at("curves")) {
                FittedCurve c;
                c.road_id = r.road_id;
                c.segment_id = s.segment_id;
                c.bs_index = jcur.at("bs").get<int>();
                c.order = jcur.at("order").get<int>();
                c.theta = jcur.at("theta").get<std::vector<double>>();
                c.alpha = jcur.at("alpha").get<std::vector<double>>();
                c.fit_residual = jcur.at("residual").get<double>();
                s.curves.push_back(std::move(c));
            }
            r.segments.push_back(std::move(s));
        }
        db.roads.push_back(std::move(r));
    }
    db.validate();
    return db;
}

BuildConfig load_build_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_build_config: cannot open " +
                                 path.string());
    }
    json j;
    in >> j;
    BuildConfig c;
    c.segmentation.tau = j.value("tau", c.segmentation.tau);
    c.segmentation.min_segment_len =
        j.value("min_segment_len", c.segmentation.min_segment_len);
    c.segmentation.penalty = j.value("penalty", c.segmentation.penalty);
    c.sf.gamma = j.value("gamma", c.sf.gamma);
    c.sf.bins = j.value("bins", c.sf.bins);
    c.sf.max_exact_subset = j.value("max_exact_subset", c.sf.max_exact_subset);
    c.curve_order = j.value("curve_order", c.curve_order);
    c.guard_expand = j.value("guard_expand", c.guard_expand);
    c.length_priors = j.value("length_priors", c.length_priors);
    return c;
}

}  // namespace msvl
