#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "msvl/scenario.hpp"

using namespace msvl;

namespace {

Scenario straight_road_scenario(double length_m, double noise_sigma = 0.0,
                                std::uint64_t seed = 7) {
    Scenario sc;
    sc.seed = seed;
    sc.base_stations = {
        {1, {0.0, 500.0}, Band::Macro4G, 18.0, 3.5, noise_sigma},
        {2, {length_m, -300.0}, Band::Small5G, -20.0, 3.0, noise_sigma},
    };
    sc.roads = {{1, {{0.0, 0.0}, {length_m, 0.0}}, 1.0}};
    return sc;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in),
            std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("rss_at evaluates the log-distance model") {
    Scenario sc = straight_road_scenario(100.0);
    sc.base_stations[0] = {1, {0.0, 0.0}, Band::Macro4G, 0.0, 2.0, 0.0};

    CHECK(rss_at(sc, 0, {100.0, 0.0}) == doctest::Approx(-40.0));
    CHECK(rss_at(sc, 0, {1.0, 0.0}) == doctest::Approx(0.0));

    sc.base_stations[0].p0_dbm = -30.0;
    sc.base_stations[0].beta = 3.5;
    CHECK(rss_at(sc, 0, {50.0, 0.0}) ==
          doctest::Approx(-30.0 - 35.0 * std::log10(50.0)));
}

TEST_CASE("rss_at applies the detection floor and rejects coincident points") {
    Scenario sc = straight_road_scenario(100.0);
    sc.base_stations[0] = {1, {0.0, 0.0}, Band::Macro4G, -100.0, 3.5, 0.0};
    // -100 - 35*log10(d) < -120 once d > 10^(20/35)
    CHECK_FALSE(is_detected(rss_at(sc, 0, {1000.0, 0.0})));
    CHECK(is_detected(rss_at(sc, 0, {2.0, 0.0})));
    CHECK_THROWS_AS(rss_at(sc, 0, {0.0, 0.0}), std::domain_error);
}

TEST_CASE("rss_at decreases monotonically with distance at zero noise") {
    Scenario sc = straight_road_scenario(100.0);
    for (std::size_t k = 0; k < sc.base_stations.size(); ++k) {
        double prev = rss_at(sc, static_cast<int>(k),
                             sc.base_stations[k].position + Vec2{1.0, 0.0});
        for (double d = 2.0; d < 400.0; d *= 1.5) {
            const double cur =
                rss_at(sc, static_cast<int>(k),
                       sc.base_stations[k].position + Vec2{d, 0.0});
            if (!is_detected(cur)) break;
            CHECK(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("generate_road_sequence samples the polyline at the interval") {
    const auto sc = straight_road_scenario(100.0);
    const auto seq = generate_road_sequence(sc, 1, 7);
    CHECK(seq.size() == 101);
    CHECK(seq.records.front().coord.x == doctest::Approx(0.0));
    CHECK(seq.records.back().coord.x == doctest::Approx(100.0));
    for (std::size_t j = 0; j + 1 < seq.size(); ++j) {
        const double step =
            distance(seq.records[j].coord, seq.records[j + 1].coord);
        CHECK(step == doctest::Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("generate_road_sequence is deterministic and matches rss_at") {
    const auto noisy = straight_road_scenario(60.0, 2.0);
    const auto a = generate_road_sequence(noisy, 1, 99);
    const auto b = generate_road_sequence(noisy, 1, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        for (std::size_t k = 0; k < a.bs_count(); ++k) {
            const double x = a.records[j].rss[k];
            const double y = b.records[j].rss[k];
            CHECK(((x == y) || (!is_detected(x) && !is_detected(y))));
        }
    }

    const auto clean = straight_road_scenario(60.0, 0.0);
    const auto seq = generate_road_sequence(clean, 1, 5);
    for (std::size_t j = 0; j < seq.size(); ++j) {
        for (std::size_t k = 0; k < seq.bs_count(); ++k) {
            const double direct =
                rss_at(clean, static_cast<int>(k), seq.records[j].coord);
            const double stored = seq.records[j].rss[k];
            if (is_detected(direct)) {
                CHECK(stored == doctest::Approx(direct));
            } else {
                CHECK_FALSE(is_detected(stored));
            }
        }
    }
}

TEST_CASE("signal_gradient evaluates RSS change per meter") {
    RoadSignalSequence seq;
    seq.road_id = 1;
    seq.records = {{{0.0, 0.0}, {0.0, 5.0}},
                   {{1.0, 0.0}, {-2.0, 5.0}},
                   {{4.0, 4.0}, {8.0, kNotDetected}}};
    CHECK(signal_gradient(seq, 0, 0) == doctest::Approx(-2.0));
    // (0,0+1m) -> (3,4) away: distance 5, delta +10
    CHECK(signal_gradient(seq, 1, 0) == doctest::Approx(2.0));
    CHECK(signal_gradient(seq, 0, 1) == doctest::Approx(0.0));
    CHECK_FALSE(is_detected(signal_gradient(seq, 1, 1)));
}

TEST_CASE("reversing a sequence negates every gradient") {
    const auto sc = straight_road_scenario(40.0, 1.0);
    auto seq = generate_road_sequence(sc, 1, 3);
    auto rev = seq;
    std::reverse(rev.records.begin(), rev.records.end());
    for (std::size_t j = 0; j + 1 < seq.size(); ++j) {
        for (std::size_t k = 0; k < seq.bs_count(); ++k) {
            const double fwd = signal_gradient(seq, j, k);
            const double bwd = signal_gradient(rev, seq.size() - 2 - j, k);
            if (!is_detected(fwd)) {
                CHECK_FALSE(is_detected(bwd));
            } else {
                CHECK(bwd == doctest::Approx(-fwd));
            }
        }
    }
}

TEST_CASE("snr_db evaluates decibel ratios") {
    CHECK(snr_db(4.0, 4.0) == doctest::Approx(0.0));
    CHECK(snr_db(100.0, 1.0) == doctest::Approx(20.0));
    CHECK(snr_db(10.0, 1.0) == doctest::Approx(10.0));
    CHECK_THROWS(snr_db(0.0, 1.0));
    CHECK_THROWS(snr_db(1.0, -2.0));
}

TEST_CASE("dataset files round-trip exactly") {
    const auto path = temp_file("msvl_test_dataset.csv");

    SUBCASE("empty dataset") {
        save_dataset({}, path);
        CHECK(load_dataset(path).empty());
    }

    SUBCASE("not-detected sentinel survives the round trip") {
        RoadSignalSequence seq;
        seq.road_id = 3;
        seq.records = {{{1.5, -2.25}, {-61.5, kNotDetected}},
                       {{2.5, -2.25}, {-62.0, -95.0}},
                       {{3.5, -2.25}, {-62.5, -95.5}}};
        save_dataset({seq}, path);
        const auto back = load_dataset(path);
        REQUIRE(back.size() == 1);
        REQUIRE(back[0].size() == 3);
        CHECK(back[0].road_id == 3);
        CHECK(back[0].records[0].coord.x == 1.5);
        CHECK_FALSE(is_detected(back[0].records[0].rss[1]));
        CHECK(back[0].records[1].rss[1] == -95.0);
    }

    SUBCASE("generated datasets are preserved bit-exactly") {
        const auto dataset = generate_dataset(default_scenario(42), 42);
        save_dataset(dataset, path);
        const auto back = load_dataset(path);
        REQUIRE(back.size() == dataset.size());
        for (std::size_t r = 0; r < dataset.size(); ++r) {
            REQUIRE(back[r].size() == dataset[r].size());
            for (std::size_t j = 0; j < dataset[r].size(); ++j) {
                CHECK(back[r].records[j].coord.x ==
                      dataset[r].records[j].coord.x);
                CHECK(back[r].records[j].coord.y ==
                      dataset[r].records[j].coord.y);
                for (std::size_t k = 0; k < dataset[r].bs_count(); ++k) {
                    const double a = dataset[r].records[j].rss[k];
                    const double b = back[r].records[j].rss[k];
                    CHECK(((a == b) ||
                           (!is_detected(a) && !is_detected(b))));
                }
            }
        }
        // round-tripping the loaded data reproduces the same bytes
        const auto path2 = temp_file("msvl_test_dataset2.csv");
        save_dataset(back, path2);
        CHECK(slurp(path) == slurp(path2));
        std::filesystem::remove(path2);
    }

    std::filesystem::remove(path);
}

TEST_CASE("a 13932-record dataset loads with ordering preserved") {
    Scenario sc = straight_road_scenario(13931.0, 0.5);
    sc.base_stations[0].p0_dbm = 60.0;  // keep the far end detected
    sc.base_stations[1].p0_dbm = 60.0;
    const auto dataset = generate_dataset(sc, 11);
    REQUIRE(dataset.size() == 1);
    REQUIRE(dataset[0].size() == 13932);

    const auto path = temp_file("msvl_test_large.csv");
    save_dataset(dataset, path);
    const auto back = load_dataset(path);
    REQUIRE(back.size() == 1);
    REQUIRE(back[0].size() == 13932);
    for (std::size_t j = 0; j < back[0].size(); ++j) {
        CHECK(back[0].records[j].coord.x == dataset[0].records[j].coord.x);
    }
    std::filesystem::remove(path);
}

TEST_CASE("malformed dataset rows fail with the line number") {
    const auto path = temp_file("msvl_test_malformed.csv");
    {
        std::ofstream out(path, std::ios::binary);
        out << "road_id,x,y,rss_1,rss_2\n";
        out << "1,0.0,0.0,-60.0,-70.0\n";
        out << "1,1.0,not_a_number,-61.0,-71.0\n";
    }
    try {
        load_dataset(path);
        FAIL("expected a parse error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("3") != std::string::npos);
    }

    {
        std::ofstream out(path, std::ios::binary);
        out << "road_id,x,y,rss_1,rss_2\n";
        out << "1,0.0,0.0,-60.0,-70.0\n";
        out << "1,1.0,0.0,-61.0\n";  // inconsistent K
    }
    CHECK_THROWS(load_dataset(path));
    std::filesystem::remove(path);
}

TEST_CASE("scenario files round-trip and digest is layout-sensitive") {
    const auto sc = default_scenario(42);
    sc.validate();
    const auto path = temp_file("msvl_test_scenario.json");
    save_scenario(sc, path);
    const auto back = load_scenario(path);
    CHECK(scenario_digest(back) == scenario_digest(sc));
    CHECK(back.base_stations.size() == sc.base_stations.size());
    CHECK(back.roads.size() == sc.roads.size());

    auto moved = sc;
    moved.base_stations[0].position.x += 1.0;
    CHECK(scenario_digest(moved) != scenario_digest(sc));
    std::filesystem::remove(path);
}

TEST_CASE("default scenario satisfies its structural contract") {
    const auto sc = default_scenario(42);
    sc.validate();
    std::size_t macros = 0;
    for (const auto& bs : sc.base_stations) {
        if (bs.band == Band::Macro4G) ++macros;
    }
    CHECK(macros == 1);
    CHECK(sc.base_stations.size() == 6);
    CHECK(sc.roads.size() == 4);

    const auto dataset = generate_dataset(sc, 42);
    CHECK(dataset.size() == 4);
    for (const auto& seq : dataset) {
        CHECK(seq.size() >= 3);
        for (const auto& rec : seq.records) {
            for (double v : rec.rss) {
                if (is_detected(v)) {
                    CHECK(v <= 0.0);
                    CHECK(v >= -150.0);
                }
            }
        }
    }
}
