#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "msvl/crlb.hpp"

using namespace msvl;

namespace {

SegmentGeometry random_geometry(std::mt19937_64& rng, std::size_t n_bs = 3) {
    std::uniform_real_distribution<double> coord(-50.0, 50.0);
    std::uniform_real_distribution<double> far(150.0, 900.0);
    std::uniform_real_distribution<double> beta(2.0, 4.0);
    std::uniform_real_distribution<double> noise(0.01, 0.5);
    std::uniform_int_distribution<int> n_pos(4, 12);

    SegmentGeometry geom;
    geom.n_positions = n_pos(rng);
    geom.first = {coord(rng), coord(rng)};
    geom.mid = {geom.first.x + 6.0 + std::abs(coord(rng)) / 4.0,
                geom.first.y + 6.0 + std::abs(coord(rng)) / 4.0};
    for (std::size_t k = 0; k < n_bs; ++k) {
        const double angle = coord(rng);
        geom.bs.push_back({{far(rng) * std::cos(angle),
                            far(rng) * std::sin(angle)},
                           beta(rng), noise(rng), noise(rng)});
    }
    geom.validate();
    return geom;
}

// central finite differences of the feature value w.r.t. the midpoint
std::array<double, 2> numeric_jacobian(const SegmentGeometry& geom,
                                       std::size_t k, bool gradient_feature,
                                       double h = 1e-4) {
    auto value = [&](Vec2 mid) {
        return gradient_feature ? gradient_feature_value(geom, k, mid)
                                : mean_feature_value(geom, k, mid);
    };
    const Vec2 m = geom.mid;
    return {(value({m.x + h, m.y}) - value({m.x - h, m.y})) / (2.0 * h),
            (value({m.x, m.y + h}) - value({m.x, m.y - h})) / (2.0 * h)};
}

}  // namespace

TEST_CASE("analytic Jacobians match central finite differences") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const auto geom = random_geometry(rng);
        const auto jg = jacobian_gradient_feature(geom);
        const auto jm = jacobian_mean_feature(geom);
        for (std::size_t k = 0; k < geom.bs.size(); ++k) {
            const auto ng = numeric_jacobian(geom, k, true);
            const auto nm = numeric_jacobian(geom, k, false);
            for (int c = 0; c < 2; ++c) {
                const double scale_g =
                    std::max({std::abs(ng[0]), std::abs(ng[1]), 1e-12});
                const double scale_m =
                    std::max({std::abs(nm[0]), std::abs(nm[1]), 1e-12});
                CHECK(std::abs(jg[k][c] - ng[c]) <= 1e-6 * scale_g);
                CHECK(std::abs(jm[k][c] - nm[c]) <= 1e-6 * scale_m);
            }
        }
    }
}

TEST_CASE("Jacobian rows scale with the path-loss exponent") {
    std::mt19937_64 rng(31);
    auto geom = random_geometry(rng, 1);
    auto doubled = geom;
    doubled.bs[0].beta *= 2.0;
    const auto jm = jacobian_mean_feature(geom);
    const auto jm2 = jacobian_mean_feature(doubled);
    const auto jg = jacobian_gradient_feature(geom);
    const auto jg2 = jacobian_gradient_feature(doubled);
    for (int c = 0; c < 2; ++c) {
        CHECK(jm2[0][c] == doctest::Approx(2.0 * jm[0][c]));
        CHECK(jg2[0][c] == doctest::Approx(4.0 * jg[0][c]));
    }
}

TEST_CASE("a BS due north of a due-north segment has no x sensitivity") {
    SegmentGeometry geom;
    geom.n_positions = 5;
    geom.first = {0.0, 10.0};
    geom.mid = {0.0, 20.0};
    geom.bs = {{{0.0, 500.0}, 3.0, 0.1, 0.1}};
    const auto jm = jacobian_mean_feature(geom);
    CHECK(jm[0][0] == doctest::Approx(0.0));
    CHECK(std::abs(jm[0][1]) > 0.0);
}

TEST_CASE("fim composes Jacobians with the noise covariance") {
    SUBCASE("zero Jacobian gives the zero matrix") {
        const auto phi = fim({{0.0, 0.0}, {0.0, 0.0}}, {1.0, 2.0});
        CHECK(phi.m11 == 0.0);
        CHECK(phi.m12 == 0.0);
        CHECK(phi.m22 == 0.0);
    }
    SUBCASE("hand-computed single row") {
        const auto phi = fim({{2.0, 3.0}}, {4.0});
        CHECK(phi.m11 == doctest::Approx(1.0));
        CHECK(phi.m12 == doctest::Approx(1.5));
        CHECK(phi.m22 == doctest::Approx(2.25));
    }
    SUBCASE("invalid inputs throw") {
        CHECK_THROWS(fim({{1.0, 1.0}}, {1.0, 1.0}));
        CHECK_THROWS(fim({{1.0, 1.0}}, {0.0}));
    }
}

TEST_CASE("joint FIM is the sum of the per-feature FIMs and stays PSD") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const auto geom = random_geometry(rng);
        const auto g = gradient_fim(geom);
        const auto m = mean_fim(geom);
        const auto j = joint_fim(geom);
        CHECK(j.m11 == doctest::Approx(g.m11 + m.m11));
        CHECK(j.m12 == doctest::Approx(g.m12 + m.m12));
        CHECK(j.m22 == doctest::Approx(g.m22 + m.m22));
        CHECK(g.psd());
        CHECK(m.psd());
        CHECK(j.psd());
    }
}

TEST_CASE("the trace bound lower-bounds the inverse trace") {
    CHECK(crlb_trace_bound({1.0, 0.0, 1.0}) == doctest::Approx(2.0));
    CHECK(crlb_trace_bound({0.0, 0.0, 0.0}) ==
          std::numeric_limits<double>::infinity());

    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> v(0.1, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        // random SPD: A = B^T B + eps I
        const double b11 = v(rng), b12 = v(rng) - 2.5, b22 = v(rng);
        SymMat2 phi{b11 * b11 + b12 * b12 + 0.01,
                    b12 * (b11 + b22),
                    b12 * b12 + b22 * b22 + 0.01};
        const double det = phi.m11 * phi.m22 - phi.m12 * phi.m12;
        REQUIRE(det > 0.0);
        const double inv_trace = (phi.m11 + phi.m22) / det;
        CHECK(crlb_trace_bound(phi) <= inv_trace + 1e-12);
    }
}

TEST_CASE("closed-form colinear bound follows its stated scaling laws") {
    SegmentGeometry geom;
    geom.n_positions = 11;
    geom.first = {0.0, 0.0};
    geom.mid = {5.5, 0.0};  // unit sampling interval
    geom.bs = {{{-150.0, 0.0}, 3.5, 0.05, 0.1},
               {{400.0, 0.0}, 3.0, 0.08, 0.1}};

    const double base = closed_form_colinear_bound(geom);
    CHECK(base > 0.0);

    SUBCASE("uniformly doubling the noise std quadruples the bound") {
        auto noisy = geom;
        for (auto& b : noisy.bs) b.rho *= 2.0;
        CHECK(closed_form_colinear_bound(noisy) ==
              doctest::Approx(4.0 * base));
    }

    SUBCASE("dilating the whole geometry by c scales the bound by c^2") {
        for (double c : {2.0, 3.0, 10.0}) {
            auto far = geom;
            far.first = c * far.first;
            far.mid = c * far.mid;
            for (auto& b : far.bs) b.position = c * b.position;
            CHECK(closed_form_colinear_bound(far) ==
                  doctest::Approx(c * c * base).epsilon(1e-9));
        }
    }

    SUBCASE("single-BS bound is beta^-4 homogeneous") {
        auto solo = geom;
        solo.bs.resize(1);
        const double one = closed_form_colinear_bound(solo);
        solo.bs[0].beta *= 2.0;
        CHECK(closed_form_colinear_bound(solo) ==
              doctest::Approx(one / 16.0).epsilon(1e-9));
    }

    SUBCASE("crlb_report flags colinear geometries") {
        const auto report = crlb_report(geom);
        CHECK(std::isfinite(report.closed_form_bound));
        CHECK(report.fim.psd());
        auto bent = geom;
        bent.bs[0].position.y = 100.0;
        CHECK_FALSE(std::isfinite(crlb_report(bent).closed_form_bound));
    }
}

TEST_CASE("endpoint ratio is 1 at the extremes and above 1 inside") {
    std::mt19937_64 rng(987);
    std::uniform_real_distribution<double> t(0.05, 0.95);
    for (int trial = 0; trial < 300; ++trial) {
        const auto geom = random_geometry(rng);
        std::vector<double> d_min(geom.bs.size()), d_max(geom.bs.size());
        std::vector<double> first_alt(geom.bs.size()),
            last_alt(geom.bs.size());
        bool interior = false;
        for (std::size_t k = 0; k < geom.bs.size(); ++k) {
            double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
            for (int i = 1; i <= geom.n_positions; ++i) {
                const double d = geom.distance_to(i, k);
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
            d_min[k] = lo;
            d_max[k] = hi;
            const double a = t(rng), b = t(rng);
            first_alt[k] = hi - a * (hi - lo) * 0.9;  // strictly interior
            last_alt[k] = lo + b * (hi - lo) * 0.9;
            if (first_alt[k] < hi && last_alt[k] > lo) interior = true;
        }
        CHECK(endpoint_ratio(geom, d_max, d_min) == doctest::Approx(1.0));
        if (interior) {
            CHECK(endpoint_ratio(geom, first_alt, last_alt) > 1.0);
        }
    }
}

TEST_CASE("endpoint ratio single-BS hand check") {
    SegmentGeometry geom;
    geom.n_positions = 5;
    geom.first = {100.0, 0.0};
    geom.mid = {105.0, 0.0};
    geom.bs = {{{0.0, 0.0}, 3.0, 0.1, 0.1}};
    // positions at x = 102, 104, ..., 110: d ranges [102, 110]
    const double n = 5.0;
    const double te = 1.0 / 102.0 - 1.0 / (110.0 * n);
    const double ta = 1.0 / 108.0 - 1.0 / (104.0 * n);
    CHECK(endpoint_ratio(geom, {104.0}, {108.0}) ==
          doctest::Approx((te * te) / (ta * ta)));
}

TEST_CASE("joint features strictly tighten the bound by 4b/(a(a+b))") {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 300; ++trial) {
        const auto geom = random_geometry(rng);
        const auto r = verify_prop2(geom);
        CHECK(r.holds);
        if (r.b > 0.0) {
            CHECK(r.joint_bound < r.gradient_only_bound);
            CHECK(r.decrease ==
                  doctest::Approx(r.predicted_decrease).epsilon(1e-9));
        }
    }
}

TEST_CASE("a constant-distance BS never shifts the gradient FIM") {
    std::mt19937_64 rng(808);
    const auto base = random_geometry(rng, 2);

    SUBCASE("a very distant flat BS changes nothing") {
        auto geom = base;
        geom.bs.push_back({{4.0e7, 3.0e7}, 3.0, 0.1, 0.1});
        const auto r = verify_prop3(geom, geom.bs.size() - 1, 1e-9);
        CHECK(r.holds);
        CHECK(crlb_trace_bound(gradient_fim(geom)) ==
              doctest::Approx(crlb_trace_bound(gradient_fim(base)))
                  .epsilon(1e-9));
    }

    SUBCASE("a nearby BS does change the FIM") {
        auto geom = base;
        geom.bs.push_back({{geom.mid.x + 40.0, geom.mid.y + 25.0},
                           3.0, 0.1, 0.1});
        const auto r = verify_prop3(geom, geom.bs.size() - 1, 1e-9);
        CHECK_FALSE(r.holds);
        CHECK(r.max_fim_diff > 1e-9);
    }

    SUBCASE("flatness degrades gracefully with distance") {
        double prev = std::numeric_limits<double>::infinity();
        for (double d : {1.0e4, 1.0e5, 1.0e6, 1.0e7}) {
            auto geom = base;
            geom.bs.push_back({{d, d}, 3.0, 0.1, 0.1});
            const auto r = verify_prop3(geom, geom.bs.size() - 1, 1e-9);
            CHECK(r.max_fim_diff < prev);
            prev = r.max_fim_diff;
        }
    }
}

TEST_CASE("rho propagates the RSS noise into the gradient feature") {
    CHECK(rho_from_rss_sigma(2.0, 0.5, 1.0) ==
          doctest::Approx(2.0 * 2.0 * 0.5 * std::sqrt(2.0)));
    CHECK(rho_from_rss_sigma(2.0, 0.5, 2.0) ==
          doctest::Approx(2.0 * 2.0 * 0.5 * std::sqrt(2.0) / 2.0));
}

TEST_CASE("geometry validation rejects degenerate inputs") {
    SegmentGeometry geom;
    geom.n_positions = 2;
    geom.first = {0.0, 0.0};
    geom.mid = {1.0, 0.0};
    geom.bs = {{{10.0, 0.0}, 3.0, 0.1, 0.1}};
    CHECK_THROWS(geom.validate());

    geom.n_positions = 4;
    geom.bs[0].rho = 0.0;
    CHECK_THROWS(geom.validate());

    geom.bs[0].rho = 0.1;
    geom.bs[0].position = {1.0, 0.0};  // lies on the sampled path
    CHECK_THROWS(geom.validate());
}
