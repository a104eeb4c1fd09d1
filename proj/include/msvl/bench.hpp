#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "msvl/metrics.hpp"
#include "msvl/profile.hpp"
#include "msvl/scenario.hpp"

namespace msvl {

enum class Method { Msvl, Rwknn, Gift, CfEls };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

enum class SweepAxis { None, BsCount, GridSize, Snr };

struct RunConfig {
    Scenario scenario;
    std::vector<Method> methods = {Method::Msvl};
    SweepAxis sweep = SweepAxis::None;
    std::vector<double> sweep_values;
    int trials = 1;            // held-out noise realizations per setting
    std::uint64_t seed = 42;
    std::size_t buffer_len = 16;   // online window, positions
    std::size_t query_stride = 7;  // positions between fixes
    double cf_els_step_m = 0.5;
    double grid_size_m = 2.0;
    int knn_k = 3;
    std::size_t cdf_resolution = 100;
    BuildConfig build;
};

struct TrialRecord {
    std::string method;
    int road_id = 0;
    std::size_t position = 0;
    double error_m = 0.0;
    double latency_us = 0.0;
    bool located = true;
};

struct BenchmarkMetrics {
    double mde_m = 0.0;
    double rmse_m = 0.0;
    double mean_delay_us = 0.0;
    std::vector<std::pair<double, double>> cdf;
    std::vector<TrialRecord> records;
};

/// Builds profiles from one noise realization and replays held-out
/// realizations of the same scenario. Keys are the method name, suffixed
/// with "@value" when a sweep axis is set. Deterministic except latency.
std::map<std::string, BenchmarkMetrics> run_benchmark(const RunConfig& config);

/// Noise sigma (dB) giving the requested mean per-BS SNR on the scenario's
/// roads (signal variance of the noiseless RSS traces).
double noise_sigma_for_snr(const Scenario& scenario, double snr_db);

/// Delimited-text series per metric: summary, CDF curves, per-fix records.
void emit_plot_data(const std::map<std::string, BenchmarkMetrics>& metrics,
                    const std::filesystem::path& dir);

}  // namespace msvl
