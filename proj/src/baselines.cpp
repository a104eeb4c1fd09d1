#include "msvl/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "msvl/kernels.hpp"

namespace msvl {

namespace {

// RMS dB distance over BSs detected on both sides; infinity when disjoint
double signal_distance(const std::vector<double>& a,
                       const std::vector<double>& b) {
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (!is_detected(a[k]) || !is_detected(b[k])) continue;
        const double d = a[k] - b[k];
        sq += d * d;
        ++n;
    }
    if (n == 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(sq / static_cast<double>(n));
}

double raw_model_rss(const BaseStation& bs, Vec2 p) {
    const double d = distance(p, bs.position);
    if (d <= 0.0) return 1e9;  // on top of the BS; never a residual minimum
    return bs.p0_dbm - 10.0 * bs.beta * std::log10(d);
}

}  // namespace

FingerprintGrid build_fingerprint_grid(
    const std::vector<RoadSignalSequence>& dataset, double grid_size_m) {
    if (grid_size_m <= 0.0) {
        throw std::invalid_argument(
            "build_fingerprint_grid: grid size must be > 0");
    }
    if (dataset.empty()) {
        throw std::invalid_argument("build_fingerprint_grid: empty dataset");
    }
    const std::size_t n_bs = dataset.front().bs_count();

    struct CellAcc {
        Vec2 coord_sum{0.0, 0.0};
        std::size_t n = 0;
        std::vector<double> rss_sum, grad_sum;
        std::vector<std::size_t> rss_n, grad_n;
    };
    std::map<std::pair<long, long>, CellAcc> cells;
    auto cell_of = [grid_size_m](Vec2 c) {
        return std::pair<long, long>{
            static_cast<long>(std::floor(c.x / grid_size_m)),
            static_cast<long>(std::floor(c.y / grid_size_m))};
    };
    for (const auto& seq : dataset) {
        for (std::size_t j = 0; j < seq.size(); ++j) {
            auto& acc = cells[cell_of(seq.records[j].coord)];
            if (acc.rss_sum.empty()) {
                acc.rss_sum.assign(n_bs, 0.0);
                acc.grad_sum.assign(n_bs, 0.0);
                acc.rss_n.assign(n_bs, 0);
                acc.grad_n.assign(n_bs, 0);
            }
            acc.coord_sum = acc.coord_sum + seq.records[j].coord;
            ++acc.n;
            for (std::size_t k = 0; k < n_bs; ++k) {
                const double v = seq.records[j].rss[k];
                if (is_detected(v)) {
                    acc.rss_sum[k] += v;
                    ++acc.rss_n[k];
                }
                if (j + 1 < seq.size()) {
                    const double g = signal_gradient(seq, j, k);
                    if (is_detected(g)) {
                        acc.grad_sum[k] += g;
                        ++acc.grad_n[k];
                    }
                }
            }
        }
    }

    FingerprintGrid grid;
    grid.grid_size_m = grid_size_m;
    for (const auto& [key, acc] : cells) {
        ReferencePoint rp;
        rp.cell_x = key.first;
        rp.cell_y = key.second;
        rp.coord = (1.0 / static_cast<double>(acc.n)) * acc.coord_sum;
        rp.rss.assign(n_bs, kNotDetected);
        rp.gradient.assign(n_bs, kNotDetected);
        bool any = false;
        for (std::size_t k = 0; k < n_bs; ++k) {
            if (acc.rss_n[k] > 0) {
                rp.rss[k] = acc.rss_sum[k] /
                            static_cast<double>(acc.rss_n[k]);
                any = true;
            }
            if (acc.grad_n[k] > 0) {
                rp.gradient[k] = acc.grad_sum[k] /
                                 static_cast<double>(acc.grad_n[k]);
            }
        }
        if (any) grid.points.push_back(std::move(rp));
    }
    if (grid.points.empty()) {
        throw std::runtime_error("build_fingerprint_grid: no reference points");
    }
    return grid;
}

Vec2 rwknn_locate(const FingerprintGrid& grid,
                  const std::vector<double>& query_rss, int k,
                  int cluster_radius_cells) {
    if (k < 1) throw std::invalid_argument("rwknn_locate: k must be >= 1");
    std::vector<double> dist(grid.points.size());
    std::size_t nearest = grid.points.size();
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        dist[i] = signal_distance(query_rss, grid.points[i].rss);
        if (std::isfinite(dist[i]) &&
            (nearest == grid.points.size() || dist[i] < dist[nearest])) {
            nearest = i;
        }
    }
    if (nearest == grid.points.size()) {
        throw std::runtime_error("rwknn_locate: no comparable reference point");
    }

    // candidate cluster around the nearest RP
    std::vector<std::size_t> cand;
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        if (!std::isfinite(dist[i])) continue;
        if (std::abs(grid.points[i].cell_x - grid.points[nearest].cell_x) <=
                cluster_radius_cells &&
            std::abs(grid.points[i].cell_y - grid.points[nearest].cell_y) <=
                cluster_radius_cells) {
            cand.push_back(i);
        }
    }
    std::sort(cand.begin(), cand.end(), [&dist](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return a < b;
    });
    if (cand.size() > static_cast<std::size_t>(k)) {
        cand.resize(static_cast<std::size_t>(k));
    }
    if (dist[cand.front()] < 1e-12) return grid.points[cand.front()].coord;

    double wsum = 0.0;
    Vec2 acc{0.0, 0.0};
    for (auto i : cand) {
        const double w = 1.0 / dist[i];
        acc = acc + w * grid.points[i].coord;
        wsum += w;
    }
    return (1.0 / wsum) * acc;
}

std::vector<double> gradient_query(const std::vector<double>& prev_rss,
                                   const std::vector<double>& cur_rss,
                                   double sample_interval_m) {
    if (prev_rss.size() != cur_rss.size()) {
        throw std::invalid_argument("gradient_query: dimension mismatch");
    }
    if (sample_interval_m <= 0.0) {
        throw std::invalid_argument("gradient_query: interval must be > 0");
    }
    std::vector<double> g(cur_rss.size(), kNotDetected);
    for (std::size_t k = 0; k < cur_rss.size(); ++k) {
        if (is_detected(prev_rss[k]) && is_detected(cur_rss[k])) {
            g[k] = (cur_rss[k] - prev_rss[k]) / sample_interval_m;
        }
    }
    return g;
}

GiftResult gift_locate(const FingerprintGrid& grid,
                       const std::vector<double>& query_gradient) {
    std::size_t best = grid.points.size();
    double best_dist = 0.0;
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const double d = signal_distance(query_gradient,
                                         grid.points[i].gradient);
        if (!std::isfinite(d)) continue;
        if (best == grid.points.size() || d < best_dist) {
            best = i;
            best_dist = d;
        }
    }
    if (best == grid.points.size()) {
        throw std::runtime_error("gift_locate: no comparable fingerprint");
    }
    GiftResult out;
    out.coord = grid.points[best].coord;
    bool informative = false;
    for (double g : query_gradient) {
        if (is_detected(g) && std::abs(g) > 1e-12) {
            informative = true;
            break;
        }
    }
    out.ambiguous = !informative;
    return out;
}

double cf_els_residual(const Scenario& scenario,
                       const std::vector<double>& query_rss, Vec2 point) {
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < scenario.base_stations.size(); ++k) {
        if (k >= query_rss.size() || !is_detected(query_rss[k])) continue;
        const double d = query_rss[k] -
                         raw_model_rss(scenario.base_stations[k], point);
        acc += d * d;
        ++n;
    }
    if (n == 0) {
        throw std::runtime_error("cf_els_residual: nothing detected in query");
    }
    return acc;
}

CfElsResult cf_els_locate(const Scenario& scenario,
                          const std::vector<double>& query_rss,
                          double step_m) {
    if (step_m <= 0.0) {
        throw std::invalid_argument("cf_els_locate: step must be > 0");
    }
    bool any = false;
    for (double v : query_rss) any = any || is_detected(v);
    if (!any) {
        throw std::runtime_error("cf_els_locate: nothing detected in query");
    }

    // bounding region over every road polyline
    Vec2 lo = scenario.roads.front().polyline.front();
    Vec2 hi = lo;
    for (const auto& rd : scenario.roads) {
        for (const auto& w : rd.polyline) {
            lo.x = std::min(lo.x, w.x);
            lo.y = std::min(lo.y, w.y);
            hi.x = std::max(hi.x, w.x);
            hi.y = std::max(hi.y, w.y);
        }
    }
    const auto nx = static_cast<std::size_t>(
                        std::floor((hi.x - lo.x) / step_m + 1e-9)) + 1;
    const auto ny = static_cast<std::size_t>(
                        std::floor((hi.y - lo.y) / step_m + 1e-9)) + 1;

    std::vector<double> plane(nx), acc(nx);
    CfElsResult best;
    best.residual = std::numeric_limits<double>::infinity();
    for (std::size_t iy = 0; iy < ny; ++iy) {
        const double y = lo.y + static_cast<double>(iy) * step_m;
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t k = 0; k < scenario.base_stations.size(); ++k) {
            if (k >= query_rss.size() || !is_detected(query_rss[k])) continue;
            const auto& bs = scenario.base_stations[k];
            for (std::size_t ix = 0; ix < nx; ++ix) {
                plane[ix] = raw_model_rss(
                    bs, {lo.x + static_cast<double>(ix) * step_m, y});
            }
            kernels::add_squared_diff(plane.data(), query_rss[k], acc.data(),
                                      nx);
        }
        const std::size_t ix = kernels::argmin(acc.data(), nx);
        if (acc[ix] < best.residual) {
            best.residual = acc[ix];
            best.coord = {lo.x + static_cast<double>(ix) * step_m, y};
        }
    }
    return best;
}

}  // namespace msvl
