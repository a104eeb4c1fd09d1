#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "msvl/geometry.hpp"

namespace msvl {

/// RSS value of a base station that fell below the detection floor.
inline constexpr double kNotDetected =
    std::numeric_limits<double>::quiet_NaN();

inline bool is_detected(double rss) { return rss == rss; }

enum class Band { Macro4G, Small5G };

/// Log-distance transmitter: rss = p0 - 10*beta*log10(d) + noise.
struct BaseStation {
    int id = 0;
    Vec2 position;
    Band band = Band::Macro4G;
    double p0_dbm = 0.0;      // reference RSS at unit distance
    double beta = 2.0;        // path-loss exponent, > 0
    double noise_sigma_db = 0.0;
};

struct RoadGeometry {
    int road_id = 0;
    std::vector<Vec2> polyline;   // >= 2 distinct consecutive waypoints
    double sample_interval_m = 1.0;

    double length_m() const;
};

struct Scenario {
    std::vector<BaseStation> base_stations;  // exactly one Macro4G entry
    std::vector<RoadGeometry> roads;
    std::uint64_t seed = 0;
    double detection_floor_dbm = -120.0;

    void validate() const;  // throws std::invalid_argument on bad data
    const RoadGeometry& road(int road_id) const;
};

struct SignalRecord {
    Vec2 coord;
    std::vector<double> rss;  // length K, kNotDetected for missing entries
};

struct RoadSignalSequence {
    int road_id = 0;
    std::vector<SignalRecord> records;

    std::size_t size() const { return records.size(); }
    std::size_t bs_count() const {
        return records.empty() ? 0 : records.front().rss.size();
    }
};

/// RSS of one BS at a coordinate; kNotDetected below the floor.
/// Throws std::domain_error if coord coincides with the BS position.
double rss_at(const Scenario& scenario, int bs_index, Vec2 coord,
              double noise_draw_db = 0.0);

/// Resamples the road polyline at its sample interval and evaluates the
/// signal model with per-BS Gaussian noise. Deterministic in rng_seed.
RoadSignalSequence generate_road_sequence(const Scenario& scenario,
                                          int road_id,
                                          std::uint64_t rng_seed);

/// One sequence per road, seeded per road from the base seed.
std::vector<RoadSignalSequence> generate_dataset(const Scenario& scenario,
                                                 std::uint64_t rng_seed);

/// (P_{j+1,k} - P_{j,k}) / |c_{j+1} - c_j| in dB per meter.
/// Returns NaN when either RSS is not detected.
double signal_gradient(const RoadSignalSequence& seq, std::size_t j,
                       std::size_t k);

double snr_db(double signal_variance, double noise_variance);

/// Dataset file: `road_id,x,y,rss_1,...,rss_K`, empty cell = not detected.
void save_dataset(const std::vector<RoadSignalSequence>& seqs,
                  const std::filesystem::path& path);
std::vector<RoadSignalSequence> load_dataset(
    const std::filesystem::path& path);

/// Scenario description file (JSON). See README for the schema.
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario,
                   const std::filesystem::path& path);

/// The default 0.6 km x 0.6 km desk scenario: 4 roads, 1 MBS + 5 SBS.
Scenario default_scenario(std::uint64_t seed = 42);

/// Stable digest of the scenario layout, recorded in profile files.
std::uint64_t scenario_digest(const Scenario& scenario);

}  // namespace msvl
