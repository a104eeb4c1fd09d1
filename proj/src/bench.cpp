#include "msvl/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "msvl/baselines.hpp"
#include "msvl/locator.hpp"

namespace msvl {

std::string method_name(Method m) {
    switch (m) {
        case Method::Msvl: return "msvl";
        case Method::Rwknn: return "rwknn";
        case Method::Gift: return "gift";
        case Method::CfEls: return "cfels";
    }
    throw std::invalid_argument("method_name: bad method");
}

Method method_from_name(const std::string& name) {
    if (name == "msvl") return Method::Msvl;
    if (name == "rwknn") return Method::Rwknn;
    if (name == "gift") return Method::Gift;
    if (name == "cfels") return Method::CfEls;
    throw std::invalid_argument("unknown method '" + name + "'");
}

double noise_sigma_for_snr(const Scenario& scenario, double snr_db) {
    Scenario clean = scenario;
    for (auto& bs : clean.base_stations) bs.noise_sigma_db = 0.0;
    const auto dataset = generate_dataset(clean, 0);

    // pooled per-BS signal variance of the noiseless traces
    double var_sum = 0.0;
    std::size_t var_n = 0;
    const std::size_t n_bs = dataset.front().bs_count();
    for (std::size_t k = 0; k < n_bs; ++k) {
        double sum = 0.0, sq = 0.0;
        std::size_t n = 0;
        for (const auto& seq : dataset) {
            for (const auto& rec : seq.records) {
                if (!is_detected(rec.rss[k])) continue;
                sum += rec.rss[k];
                sq += rec.rss[k] * rec.rss[k];
                ++n;
            }
        }
        if (n < 2) continue;
        const double mean = sum / static_cast<double>(n);
        var_sum += sq / static_cast<double>(n) - mean * mean;
        ++var_n;
    }
    if (var_n == 0) {
        throw std::runtime_error("noise_sigma_for_snr: no detected signal");
    }
    const double signal_var = var_sum / static_cast<double>(var_n);
    return std::sqrt(signal_var / std::pow(10.0, snr_db / 10.0));
}

namespace {

struct Setting {
    std::string suffix;  // "" or "@value"
    Scenario scenario;
    double grid_size_m;
};

std::vector<Setting> expand_sweep(const RunConfig& config) {
    std::vector<Setting> out;
    if (config.sweep == SweepAxis::None) {
        out.push_back({"", config.scenario, config.grid_size_m});
        return out;
    }
    if (config.sweep_values.empty()) {
        throw std::invalid_argument("run_benchmark: sweep without values");
    }
    for (double v : config.sweep_values) {
        Setting s{"", config.scenario, config.grid_size_m};
        char buf[32];
        std::snprintf(buf, sizeof(buf), "@%g", v);
        s.suffix = buf;
        switch (config.sweep) {
            case SweepAxis::BsCount: {
                const auto n = static_cast<std::size_t>(v);
                if (n < 2 || n > config.scenario.base_stations.size()) {
                    throw std::invalid_argument(
                        "run_benchmark: BS count sweep value out of range");
                }
                s.scenario.base_stations.resize(n);
                break;
            }
            case SweepAxis::GridSize:
                s.grid_size_m = v;
                break;
            case SweepAxis::Snr: {
                const double sigma = noise_sigma_for_snr(config.scenario, v);
                for (auto& bs : s.scenario.base_stations) {
                    bs.noise_sigma_db = sigma;
                }
                break;
            }
            case SweepAxis::None:
                break;
        }
        out.push_back(std::move(s));
    }
    return out;
}

double elapsed_us(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::micro>(
               std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

std::map<std::string, BenchmarkMetrics> run_benchmark(
    const RunConfig& config) {
    if (config.trials < 1) {
        throw std::invalid_argument("run_benchmark: trials must be >= 1");
    }
    if (config.buffer_len < 4 || config.query_stride < 1) {
        throw std::invalid_argument("run_benchmark: bad window parameters");
    }
    std::map<std::string, BenchmarkMetrics> out;

    for (const auto& setting : expand_sweep(config)) {
        const auto train = generate_dataset(setting.scenario, config.seed);
        RoadProfileDB db;
        FingerprintGrid grid;
        bool need_grid = false;
        for (auto m : config.methods) {
            need_grid = need_grid || m == Method::Rwknn || m == Method::Gift;
        }
        bool need_db = false;
        for (auto m : config.methods) need_db = need_db || m == Method::Msvl;
        if (need_db) db = build_profile_db(train, config.build);
        if (need_grid) grid = build_fingerprint_grid(train,
                                                     setting.grid_size_m);
        const double interval =
            setting.scenario.roads.front().sample_interval_m;

        std::map<std::string, std::vector<double>> errors;
        std::map<std::string, std::vector<TrialRecord>> records;
        std::map<std::string, double> delay_sum;
        std::map<std::string, std::size_t> delay_n;

        for (int trial = 0; trial < config.trials; ++trial) {
            const auto heldout = generate_dataset(
                setting.scenario,
                config.seed + 1000 + static_cast<std::uint64_t>(trial));
            for (const auto& seq : heldout) {
                for (std::size_t j = config.buffer_len - 1; j < seq.size();
                     j += config.query_stride) {
                    const Vec2 truth = seq.records[j].coord;
                    OnlineBuffer buffer;
                    buffer.capacity = config.buffer_len;
                    for (std::size_t p = j + 1 - config.buffer_len; p <= j;
                         ++p) {
                        buffer.push(seq.records[p].rss);
                    }
                    for (auto m : config.methods) {
                        const std::string label = method_name(m) +
                                                  setting.suffix;
                        TrialRecord rec;
                        rec.method = method_name(m);
                        rec.road_id = seq.road_id;
                        rec.position = j;
                        const auto t0 = std::chrono::steady_clock::now();
                        try {
                            Vec2 est;
                            switch (m) {
                                case Method::Msvl: {
                                    const auto fix = locate(buffer, db);
                                    rec.located = fix.located;
                                    est = fix.coord;
                                    break;
                                }
                                case Method::Rwknn:
                                    est = rwknn_locate(grid,
                                                       seq.records[j].rss,
                                                       config.knn_k);
                                    break;
                                case Method::Gift: {
                                    const auto g = gradient_query(
                                        seq.records[j - 1].rss,
                                        seq.records[j].rss, interval);
                                    est = gift_locate(grid, g).coord;
                                    break;
                                }
                                case Method::CfEls:
                                    est = cf_els_locate(setting.scenario,
                                                        seq.records[j].rss,
                                                        config.cf_els_step_m)
                                              .coord;
                                    break;
                            }
                            rec.latency_us = elapsed_us(t0);
                            if (rec.located) {
                                rec.error_m = distance(est, truth);
                                errors[label].push_back(rec.error_m);
                            }
                        } catch (const std::exception&) {
                            rec.located = false;
                            rec.latency_us = elapsed_us(t0);
                        }
                        delay_sum[label] += rec.latency_us;
                        ++delay_n[label];
                        records[label].push_back(std::move(rec));
                    }
                }
            }
        }

        for (auto& [label, errs] : errors) {
            BenchmarkMetrics m;
            m.mde_m = compute_mde(errs);
            m.rmse_m = compute_rmse(errs);
            m.cdf = compute_cdf(errs, config.cdf_resolution);
            m.mean_delay_us = delay_sum[label] /
                              static_cast<double>(delay_n[label]);
            m.records = std::move(records[label]);
            out[label] = std::move(m);
        }
    }
    return out;
}

void emit_plot_data(const std::map<std::string, BenchmarkMetrics>& metrics,
                    const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream summary(dir / "summary.csv", std::ios::binary);
    if (!summary) {
        throw std::runtime_error("emit_plot_data: cannot write to " +
                                 dir.string());
    }
    summary << "label,mde_m,rmse_m,mean_delay_us,fixes\n";
    for (const auto& [label, m] : metrics) {
        std::string safe = label;
        for (auto& c : safe) {
            if (c == '@') c = '_';
        }
        summary << label << ',' << m.mde_m << ',' << m.rmse_m << ','
                << m.mean_delay_us << ',' << m.records.size() << "\n";

        std::ofstream cdf(dir / ("cdf_" + safe + ".csv"), std::ios::binary);
        cdf << "error_m,fraction\n";
        for (const auto& [e, f] : m.cdf) cdf << e << ',' << f << "\n";

        std::ofstream rec(dir / ("records_" + safe + ".csv"),
                          std::ios::binary);
        rec << "method,road_id,position,error_m,latency_us,located\n";
        for (const auto& r : m.records) {
            rec << r.method << ',' << r.road_id << ',' << r.position << ','
                << r.error_m << ',' << r.latency_us << ','
                << (r.located ? 1 : 0) << "\n";
        }
    }
}

}  // namespace msvl
