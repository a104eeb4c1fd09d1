#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"
#include "msvl/baselines.hpp"
#include "msvl/bench.hpp"
#include "msvl/crlb.hpp"
#include "msvl/locator.hpp"
#include "msvl/profile.hpp"

namespace {

using msvl::Scenario;

Scenario scenario_or_default(const std::string& path, std::uint64_t seed) {
    if (path.empty()) return msvl::default_scenario(seed);
    return msvl::load_scenario(path);
}

int cmd_generate(const std::string& scenario_path, std::uint64_t seed,
                 const std::string& out, const std::string& save_scenario) {
    auto sc = scenario_or_default(scenario_path, seed);
    const auto dataset = msvl::generate_dataset(sc, seed);
    msvl::save_dataset(dataset, out);
    if (!save_scenario.empty()) msvl::save_scenario(sc, save_scenario);
    std::cout << "wrote " << dataset.size() << " road sequences to " << out
              << "\n";
    return 0;
}

int cmd_build(const std::string& data, const std::string& config_path,
              const std::string& out) {
    const auto dataset = msvl::load_dataset(data);
    msvl::BuildConfig config;
    if (!config_path.empty()) config = msvl::load_build_config(config_path);
    const auto db = msvl::build_profile_db(dataset, config);
    msvl::save_profile_db(db, out);
    std::size_t segments = 0;
    for (const auto& r : db.roads) segments += r.segments.size();
    std::cout << "profile: " << db.roads.size() << " roads, " << segments
              << " segments -> " << out << "\n";
    return 0;
}

int cmd_locate(const std::string& profile, const std::string& input,
               const std::string& method, const std::string& data,
               const std::string& scenario_path, double grid_size, int k,
               double step) {
    const auto stream = msvl::load_dataset(input);
    const auto m = msvl::method_from_name(method);

    msvl::RoadProfileDB db;
    msvl::FingerprintGrid grid;
    Scenario sc;
    if (m == msvl::Method::Msvl) {
        if (profile.empty()) {
            throw std::runtime_error("locate: --profile required for msvl");
        }
        db = msvl::load_profile_db(profile);
    } else if (m == msvl::Method::CfEls) {
        if (scenario_path.empty()) {
            throw std::runtime_error("locate: --scenario required for cfels");
        }
        sc = msvl::load_scenario(scenario_path);
    } else {
        if (data.empty()) {
            throw std::runtime_error(
                "locate: --data required for rwknn/gift");
        }
        grid = msvl::build_fingerprint_grid(msvl::load_dataset(data),
                                            grid_size);
    }

    std::cout << "road_id,position,x,y,est_road,est_segment,posterior,"
                 "latency_us,located\n";
    for (const auto& seq : stream) {
        msvl::OnlineBuffer buffer;
        if (m == msvl::Method::Msvl) {
            buffer.capacity = std::max<std::size_t>(
                16, static_cast<std::size_t>(
                        db.config.segmentation.min_segment_len) * 2);
        }
        for (std::size_t j = 0; j < seq.size(); ++j) {
            buffer.push(seq.records[j].rss);
            msvl::Vec2 est;
            int est_road = -1, est_segment = -1;
            double posterior = 0.0, latency = 0.0;
            bool located = true;
            try {
                switch (m) {
                    case msvl::Method::Msvl: {
                        if (buffer.size() < buffer.capacity) continue;
                        const auto fix = msvl::locate(buffer, db);
                        located = fix.located;
                        est = fix.coord;
                        est_road = fix.road_id;
                        est_segment = fix.segment_id;
                        posterior = fix.posterior;
                        latency = fix.latency_us;
                        break;
                    }
                    case msvl::Method::Rwknn:
                        est = msvl::rwknn_locate(grid, seq.records[j].rss, k);
                        break;
                    case msvl::Method::Gift: {
                        if (j == 0) continue;
                        const auto g = msvl::gradient_query(
                            seq.records[j - 1].rss, seq.records[j].rss,
                            msvl::distance(seq.records[j - 1].coord,
                                           seq.records[j].coord));
                        est = msvl::gift_locate(grid, g).coord;
                        break;
                    }
                    case msvl::Method::CfEls:
                        est = msvl::cf_els_locate(sc, seq.records[j].rss,
                                                  step)
                                  .coord;
                        break;
                }
            } catch (const std::exception&) {
                located = false;
            }
            std::cout << seq.road_id << ',' << j << ',' << est.x << ','
                      << est.y << ',' << est_road << ',' << est_segment
                      << ',' << posterior << ',' << latency << ','
                      << (located ? 1 : 0) << "\n";
        }
    }
    return 0;
}

msvl::RunConfig bench_config_from_file(const std::string& path,
                                       std::string& out_dir) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("bench: cannot open config " + path);
    }
    nlohmann::json j;
    in >> j;
    msvl::RunConfig c;
    c.seed = j.value("seed", std::uint64_t{42});
    c.scenario = scenario_or_default(j.value("scenario", std::string{}),
                                     c.seed);
    c.methods.clear();
    for (const auto& m : j.value("methods",
                                 std::vector<std::string>{"msvl"})) {
        c.methods.push_back(msvl::method_from_name(m));
    }
    const auto sweep = j.value("sweep", std::string{"none"});
    if (sweep == "none") {
        c.sweep = msvl::SweepAxis::None;
    } else if (sweep == "bs_count") {
        c.sweep = msvl::SweepAxis::BsCount;
    } else if (sweep == "grid_size") {
        c.sweep = msvl::SweepAxis::GridSize;
    } else if (sweep == "snr") {
        c.sweep = msvl::SweepAxis::Snr;
    } else {
        throw std::runtime_error("bench: unknown sweep axis '" + sweep + "'");
    }
    c.sweep_values = j.value("sweep_values", std::vector<double>{});
    c.trials = j.value("trials", 1);
    c.buffer_len = j.value("buffer_len", std::size_t{16});
    c.query_stride = j.value("query_stride", std::size_t{7});
    c.cf_els_step_m = j.value("cf_els_step_m", 0.5);
    c.grid_size_m = j.value("grid_size_m", 2.0);
    c.knn_k = j.value("knn_k", 3);
    c.cdf_resolution = j.value("cdf_resolution", std::size_t{100});
    if (j.contains("build")) {
        const auto& b = j["build"];
        c.build.segmentation.tau = b.value("tau", c.build.segmentation.tau);
        c.build.segmentation.min_segment_len =
            b.value("min_segment_len", c.build.segmentation.min_segment_len);
        c.build.segmentation.penalty =
            b.value("penalty", c.build.segmentation.penalty);
        c.build.sf.gamma = b.value("gamma", c.build.sf.gamma);
        c.build.sf.bins = b.value("bins", c.build.sf.bins);
        c.build.curve_order = b.value("curve_order", c.build.curve_order);
        c.build.length_priors = b.value("length_priors",
                                        c.build.length_priors);
    }
    out_dir = j.value("out_dir", std::string{"bench_out"});
    return c;
}

int cmd_bench(const std::string& config_path) {
    std::string out_dir;
    const auto config = bench_config_from_file(config_path, out_dir);
    const auto metrics = msvl::run_benchmark(config);
    msvl::emit_plot_data(metrics, out_dir);
    for (const auto& [label, m] : metrics) {
        std::cout << label << ": mde=" << m.mde_m << " m, rmse=" << m.rmse_m
                  << " m, mean delay=" << m.mean_delay_us << " us over "
                  << m.records.size() << " fixes\n";
    }
    std::cout << "plot data in " << out_dir << "\n";
    return 0;
}

msvl::SegmentGeometry geometry_from_json(const nlohmann::json& j) {
    msvl::SegmentGeometry g;
    g.n_positions = j.at("n_positions").get<int>();
    g.first = {j.at("first").at(0).get<double>(),
               j.at("first").at(1).get<double>()};
    g.mid = {j.at("mid").at(0).get<double>(),
             j.at("mid").at(1).get<double>()};
    for (const auto& b : j.at("bs")) {
        msvl::BsNoiseGeometry bs;
        bs.position = {b.at("x").get<double>(), b.at("y").get<double>()};
        bs.beta = b.value("beta", 2.0);
        bs.rho = b.value("rho", 1.0);
        bs.eta = b.value("eta", 1.0);
        g.bs.push_back(bs);
    }
    return g;
}

int cmd_crlb(const std::string& geom_path) {
    std::ifstream in(geom_path);
    if (!in) {
        throw std::runtime_error("crlb: cannot open " + geom_path);
    }
    nlohmann::json j;
    in >> j;
    const auto geoms = j.contains("geometries") ? j["geometries"]
                                                : nlohmann::json::array({j});
    std::cout << "label,fim11,fim12,fim22,trace_bound_m2,closed_form_m2\n";
    for (const auto& g : geoms) {
        const auto geom = geometry_from_json(g);
        const auto report = msvl::crlb_report(geom);
        std::cout << g.value("label", std::string{"geom"}) << ','
                  << report.fim.m11 << ',' << report.fim.m12 << ','
                  << report.fim.m22 << ',' << report.trace_bound << ','
                  << report.closed_form_bound << "\n";
    }
    return 0;
}

int cmd_export_plots(const std::string& run_dir) {
    namespace fs = std::filesystem;
    std::map<std::string, msvl::BenchmarkMetrics> metrics;
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("records_", 0) != 0 ||
            entry.path().extension() != ".csv") {
            continue;
        }
        const std::string label =
            name.substr(8, name.size() - 8 - 4);
        std::ifstream in(entry.path());
        std::string line;
        std::getline(in, line);  // header
        std::vector<double> errors;
        msvl::BenchmarkMetrics m;
        double delay_sum = 0.0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            msvl::TrialRecord r;
            char method[64] = {0};
            int located = 0;
            unsigned long position = 0;
            if (std::sscanf(line.c_str(), "%63[^,],%d,%lu,%lf,%lf,%d",
                            method, &r.road_id, &position, &r.error_m,
                            &r.latency_us, &located) != 6) {
                throw std::runtime_error("export-plots: bad record line in " +
                                         name);
            }
            r.method = method;
            r.position = position;
            r.located = located != 0;
            delay_sum += r.latency_us;
            if (r.located) errors.push_back(r.error_m);
            m.records.push_back(std::move(r));
        }
        if (m.records.empty()) continue;
        m.mde_m = msvl::compute_mde(errors);
        m.rmse_m = msvl::compute_rmse(errors);
        m.cdf = msvl::compute_cdf(errors);
        m.mean_delay_us = delay_sum / static_cast<double>(m.records.size());
        metrics[label] = std::move(m);
    }
    if (metrics.empty()) {
        throw std::runtime_error("export-plots: no records_*.csv in " +
                                 run_dir);
    }
    msvl::emit_plot_data(metrics, fs::path(run_dir) / "plots");
    std::cout << "plots regenerated in " << run_dir << "/plots\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-scale vehicle localization toolkit"};
    app.require_subcommand(1);

    std::string scenario_path, out, save_scenario_path, data, config_path;
    std::string profile, input, method = "msvl", geom_path, run_dir;
    std::uint64_t seed = 42;
    double grid_size = 2.0, step = 0.1;
    int k = 3;

    auto* gen = app.add_subcommand("generate",
                                   "Generate a synthetic RSS dataset");
    gen->add_option("--scenario", scenario_path, "Scenario JSON file");
    gen->add_option("--seed", seed, "RNG seed");
    gen->add_option("--out", out, "Output dataset CSV")->required();
    gen->add_option("--save-scenario", save_scenario_path,
                    "Also write the scenario JSON here");

    auto* build = app.add_subcommand("build",
                                     "Build a road profile database");
    build->add_option("--data", data, "Training dataset CSV")->required();
    build->add_option("--config", config_path, "Build config JSON");
    build->add_option("--out", out, "Output profile file")->required();

    auto* locate = app.add_subcommand("locate", "Replay an RSS stream");
    locate->add_option("--profile", profile, "Profile file (msvl)");
    locate->add_option("--input", input, "Input stream CSV")->required();
    locate->add_option("--method", method, "msvl|rwknn|gift|cfels");
    locate->add_option("--data", data, "Training CSV (rwknn/gift)");
    locate->add_option("--scenario", scenario_path, "Scenario JSON (cfels)");
    locate->add_option("--grid-size", grid_size, "Fingerprint grid size, m");
    locate->add_option("-k", k, "Neighbors for rwknn");
    locate->add_option("--step", step, "Search step for cfels, m");

    auto* bench = app.add_subcommand("bench", "Run the benchmark harness");
    bench->add_option("--config", config_path, "Bench config JSON")
        ->required();

    auto* crlb = app.add_subcommand("crlb", "Evaluate error lower bounds");
    crlb->add_option("--geom", geom_path, "Geometry JSON file")->required();

    auto* plots = app.add_subcommand("export-plots",
                                     "Regenerate plot data from a run");
    plots->add_option("--run", run_dir, "Benchmark output directory")
        ->required();

    try {
        app.parse(argc, argv);
        if (gen->parsed()) {
            return cmd_generate(scenario_path, seed, out, save_scenario_path);
        }
        if (build->parsed()) return cmd_build(data, config_path, out);
        if (locate->parsed()) {
            return cmd_locate(profile, input, method, data, scenario_path,
                              grid_size, k, step);
        }
        if (bench->parsed()) return cmd_bench(config_path);
        if (crlb->parsed()) return cmd_crlb(geom_path);
        if (plots->parsed()) return cmd_export_plots(run_dir);
        return 1;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
