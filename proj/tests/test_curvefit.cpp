#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "msvl/curvefit.hpp"

using namespace msvl;

namespace {

// coordinates affine in the RSS trace: coord = base + rss * slope
RoadSignalSequence affine_sequence(const std::vector<double>& rss,
                                   Vec2 base = {10.0, -5.0},
                                   Vec2 slope = {2.0, -0.5}) {
    RoadSignalSequence seq;
    seq.road_id = 1;
    for (double p : rss) {
        SignalRecord rec;
        rec.coord = {base.x + slope.x * p, base.y + slope.y * p};
        rec.rss = {p};
        seq.records.push_back(std::move(rec));
    }
    return seq;
}

double residual_of(const RoadSignalSequence& seq, const FittedCurve& curve) {
    double sq = 0.0;
    for (const auto& rec : seq.records) {
        const double dx = curve.eval_x(rec.rss[0]) - rec.coord.x;
        const double dy = curve.eval_y(rec.rss[0]) - rec.coord.y;
        sq += dx * dx + dy * dy;
    }
    return std::sqrt(sq / static_cast<double>(seq.size()));
}

}  // namespace

TEST_CASE("order-1 fit recovers an exact affine relation") {
    const auto seq = affine_sequence({-70.0, -68.0, -66.0, -64.0, -62.0});
    const auto curves = fit_segment_curves(seq, 0, 4, 1);
    REQUIRE(curves.size() == 1);
    const auto& c = curves[0];
    CHECK(c.order == 1);
    CHECK(c.theta[0] == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(c.theta[1] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(c.alpha[0] == doctest::Approx(-5.0).epsilon(1e-9));
    CHECK(c.alpha[1] == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(c.fit_residual == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("order w with w+1 distinct points interpolates exactly") {
    RoadSignalSequence seq;
    seq.road_id = 1;
    const std::vector<double> rss{-70.0, -67.0, -63.0, -58.0};
    for (std::size_t j = 0; j < rss.size(); ++j) {
        seq.records.push_back(
            {{std::pow(rss[j], 2) / 50.0, 3.0 * rss[j] + 1.0}, {rss[j]}});
    }
    const auto curves = fit_segment_curves(seq, 0, 3, 3);
    REQUIRE(curves.size() == 1);
    CHECK(curves[0].fit_residual == doctest::Approx(0.0).epsilon(1e-8));
    for (const auto& rec : seq.records) {
        CHECK(curves[0].eval_x(rec.rss[0]) ==
              doctest::Approx(rec.coord.x).epsilon(1e-8));
        CHECK(curves[0].eval_y(rec.rss[0]) ==
              doctest::Approx(rec.coord.y).epsilon(1e-8));
    }
}

TEST_CASE("least-squares fit beats random coefficient perturbations") {
    std::mt19937_64 rng(7171);
    std::normal_distribution<double> noise(0.0, 0.4);
    std::normal_distribution<double> nudge(0.0, 0.05);

    std::vector<double> rss;
    for (int j = 0; j < 25; ++j) rss.push_back(-75.0 + 0.8 * j);
    auto seq = affine_sequence(rss);
    for (auto& rec : seq.records) {
        rec.coord.x += noise(rng);
        rec.coord.y += noise(rng);
    }

    const auto curves = fit_segment_curves(seq, 0, seq.size() - 1, 2);
    REQUIRE(curves.size() == 1);
    const double fitted = residual_of(seq, curves[0]);
    CHECK(curves[0].fit_residual == doctest::Approx(fitted).epsilon(1e-9));

    for (int trial = 0; trial < 100; ++trial) {
        auto perturbed = curves[0];
        for (auto& t : perturbed.theta) t += nudge(rng);
        for (auto& a : perturbed.alpha) a += nudge(rng);
        CHECK(residual_of(seq, perturbed) >= fitted - 1e-12);
    }
}

TEST_CASE("constant RSS is rejected naming the BS") {
    RoadSignalSequence seq;
    seq.road_id = 1;
    for (int j = 0; j < 6; ++j) {
        seq.records.push_back(
            {{static_cast<double>(j), 0.0}, {-60.0 + j, -70.0}});
    }
    try {
        fit_segment_curves(seq, 0, 5, 1);
        FAIL("expected an error for the constant BS");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("BS index 1") != std::string::npos);
    }
}

TEST_CASE("the fit falls back to the largest supported order") {
    const auto seq = affine_sequence({-70.0, -68.0, -66.0});
    const auto curves = fit_segment_curves(seq, 0, 2, 5);
    REQUIRE(curves.size() == 1);
    CHECK(curves[0].order < 5);
    CHECK(curves[0].fit_residual < 1e-8);
}

TEST_CASE("map_coordinate averages the detected curves") {
    FittedCurve a;
    a.order = 1;
    a.bs_index = 0;
    a.theta = {0.0, 0.0};
    a.alpha = {0.0, 0.0};
    FittedCurve b;
    b.order = 1;
    b.bs_index = 1;
    b.theta = {2.0, 0.0};
    b.alpha = {2.0, 0.0};

    SUBCASE("two constant curves average to the midpoint") {
        const auto p = map_coordinate({a, b}, {-60.0, -70.0});
        CHECK(p.x == doctest::Approx(1.0));
        CHECK(p.y == doctest::Approx(1.0));
        const auto q = map_coordinate({b, a}, {-60.0, -70.0});
        CHECK(q.x == doctest::Approx(p.x));
        CHECK(q.y == doctest::Approx(p.y));
    }

    SUBCASE("undetected BSs are excluded from the mean") {
        const auto p = map_coordinate({a, b}, {kNotDetected, -70.0});
        CHECK(p.x == doctest::Approx(2.0));
        CHECK(p.y == doctest::Approx(2.0));
    }

    SUBCASE("no usable curve is an error") {
        CHECK_THROWS(map_coordinate({a, b}, {kNotDetected, kNotDetected}));
    }

    SUBCASE("the guard box clamps extrapolation") {
        BoundingBox guard{{0.0, 0.0}, {1.0, 1.0}};
        const auto p = map_coordinate({b}, {kNotDetected, -70.0}, guard);
        CHECK(p.x == doctest::Approx(1.0));
        CHECK(p.y == doctest::Approx(1.0));
    }
}

TEST_CASE("evaluation at training RSS stays within the residual bound") {
    std::vector<double> rss;
    for (int j = 0; j < 30; ++j) rss.push_back(-80.0 + 0.6 * j);
    const auto seq = affine_sequence(rss);
    const auto curves = fit_segment_curves(seq, 0, seq.size() - 1, 3);
    REQUIRE(curves.size() == 1);
    const double bound = std::max(curves[0].fit_residual * 3.0, 1e-6);
    for (const auto& rec : seq.records) {
        const double dx = curves[0].eval_x(rec.rss[0]) - rec.coord.x;
        const double dy = curves[0].eval_y(rec.rss[0]) - rec.coord.y;
        CHECK(std::sqrt(dx * dx + dy * dy) <= bound);
    }
}

TEST_CASE("bounding boxes expand fractionally and clamp points") {
    RoadSignalSequence seq;
    seq.road_id = 1;
    seq.records = {{{0.0, 0.0}, {-60.0}},
                   {{10.0, 4.0}, {-61.0}},
                   {{5.0, -2.0}, {-62.0}}};
    const auto box = bounding_box(seq, 0, 2);
    CHECK(box.min.x == doctest::Approx(0.0));
    CHECK(box.max.x == doctest::Approx(10.0));
    CHECK(box.min.y == doctest::Approx(-2.0));
    CHECK(box.max.y == doctest::Approx(4.0));

    const auto wide = box.expanded(0.1);
    CHECK(wide.min.x < box.min.x);
    CHECK(wide.max.y > box.max.y);

    const auto clamped = box.clamp({-100.0, 100.0});
    CHECK(clamped.x == doctest::Approx(box.min.x));
    CHECK(clamped.y == doctest::Approx(box.max.y));
}
