#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "msvl/kernels.hpp"

using namespace msvl;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n,
                                  double lo = -50.0, double hi = 50.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

}  // namespace

TEST_CASE("scalar sum_squared_diff matches hand computation") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{0.0, 4.0, 1.0};
    CHECK(kernels::scalar::sum_squared_diff(a.data(), b.data(), 3) ==
          doctest::Approx(1.0 + 4.0 + 4.0));
    CHECK(kernels::scalar::sum_squared_diff(a.data(), a.data(), 3) == 0.0);
}

TEST_CASE("scalar signed_sq_gradient signs and magnitudes") {
    // slopes -2, +3, 0 over unit spacing
    const std::vector<double> p{0.0, -2.0, 1.0, 1.0};
    const std::vector<double> inv_d{1.0, 1.0, 1.0};
    std::vector<double> out(3);
    kernels::scalar::signed_sq_gradient(p.data(), inv_d.data(), out.data(), 3);
    CHECK(out[0] == doctest::Approx(-4.0));
    CHECK(out[1] == doctest::Approx(9.0));
    CHECK(out[2] == 0.0);
}

TEST_CASE("scalar signed_sq_gradient respects the distance scaling") {
    const std::vector<double> p{0.0, 10.0};
    const std::vector<double> inv_d{0.2};  // 5 m spacing
    double out = 0.0;
    kernels::scalar::signed_sq_gradient(p.data(), inv_d.data(), &out, 1);
    CHECK(out == doctest::Approx(4.0));  // (+2 dB/m)^2
}

TEST_CASE("scalar mean_var on a known sample") {
    const std::vector<double> x{1.0, 1.0, 9.0};
    double mean = 0.0, var = 0.0;
    kernels::scalar::mean_var(x.data(), 3, mean, var);
    const double m = 11.0 / 3.0;
    const double expected =
        ((1 - m) * (1 - m) + (1 - m) * (1 - m) + (9 - m) * (9 - m)) / 3.0;
    CHECK(mean == doctest::Approx(m));
    CHECK(var == doctest::Approx(expected));
}

TEST_CASE("scalar add_squared_diff accumulates") {
    const std::vector<double> plane{1.0, 2.0, 3.0};
    std::vector<double> acc{10.0, 10.0, 10.0};
    kernels::scalar::add_squared_diff(plane.data(), 2.0, acc.data(), 3);
    CHECK(acc[0] == doctest::Approx(11.0));
    CHECK(acc[1] == doctest::Approx(10.0));
    CHECK(acc[2] == doctest::Approx(11.0));
}

TEST_CASE("scalar argmin returns first occurrence") {
    const std::vector<double> x{3.0, 1.0, 1.0, 2.0};
    CHECK(kernels::scalar::argmin(x.data(), 4) == 1);
    const std::vector<double> single{7.0};
    CHECK(kernels::scalar::argmin(single.data(), 1) == 0);
}

TEST_CASE("dispatched kernels are equivalent to the scalar reference") {
    const auto original = kernels::active_isa();
    std::mt19937_64 rng(20240817);

    for (auto isa : {kernels::Isa::Scalar, kernels::Isa::Avx2,
                     kernels::Isa::Neon}) {
        if (!kernels::isa_supported(isa)) continue;
        CAPTURE(kernels::isa_name(isa));
        kernels::set_isa(isa);

        for (std::size_t n : {1u, 2u, 3u, 4u, 7u, 8u, 31u, 64u, 129u}) {
            const auto a = random_vector(rng, n);
            const auto b = random_vector(rng, n);
            CHECK(kernels::sum_squared_diff(a.data(), b.data(), n) ==
                  doctest::Approx(
                      kernels::scalar::sum_squared_diff(a.data(), b.data(), n))
                      .epsilon(1e-12));

            const auto p = random_vector(rng, n + 1);
            const auto inv_d = random_vector(rng, n, 0.1, 2.0);
            std::vector<double> got(n), want(n);
            kernels::signed_sq_gradient(p.data(), inv_d.data(), got.data(), n);
            kernels::scalar::signed_sq_gradient(p.data(), inv_d.data(),
                                                want.data(), n);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
            }

            double m1 = 0.0, v1 = 0.0, m2 = 0.0, v2 = 0.0;
            kernels::mean_var(a.data(), n, m1, v1);
            kernels::scalar::mean_var(a.data(), n, m2, v2);
            CHECK(m1 == doctest::Approx(m2).epsilon(1e-12));
            CHECK(v1 == doctest::Approx(v2).epsilon(1e-11));

            auto acc1 = random_vector(rng, n);
            auto acc2 = acc1;
            kernels::add_squared_diff(a.data(), 3.25, acc1.data(), n);
            kernels::scalar::add_squared_diff(a.data(), 3.25, acc2.data(), n);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(acc1[i] == doctest::Approx(acc2[i]).epsilon(1e-12));
            }

            CHECK(kernels::argmin(a.data(), n) ==
                  kernels::scalar::argmin(a.data(), n));
        }
    }
    kernels::set_isa(original);
}

TEST_CASE("set_isa rejects unsupported instruction sets") {
    for (auto isa : {kernels::Isa::Avx2, kernels::Isa::Neon}) {
        if (kernels::isa_supported(isa)) continue;
        CHECK_THROWS(kernels::set_isa(isa));
    }
}
