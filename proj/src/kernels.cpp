#include "msvl/kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace msvl::kernels {

namespace scalar {

double sum_squared_diff(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void signed_sq_gradient(const double* p, const double* inv_d, double* out,
                        std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dp = p[i + 1] - p[i];
        const double g = dp * inv_d[i];
        const double s = (dp > 0.0) ? 1.0 : (dp < 0.0 ? -1.0 : 0.0);
        out[i] = s * g * g;
    }
}

void mean_var(const double* x, std::size_t n, double& mean, double& var) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += x[i];
    mean = (n > 0) ? sum / static_cast<double>(n) : 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mean;
        sq += d * d;
    }
    var = (n > 0) ? sq / static_cast<double>(n) : 0.0;
}

void add_squared_diff(const double* plane, double q, double* acc,
                      std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = plane[i] - q;
        acc[i] += d * d;
    }
}

std::size_t argmin(const double* x, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (x[i] < x[best]) best = i;
    }
    return best;
}

}  // namespace scalar

#if defined(MSVL_HAVE_AVX2_TU)
namespace avx2 {
double sum_squared_diff(const double* a, const double* b, std::size_t n);
void signed_sq_gradient(const double* p, const double* inv_d, double* out,
                        std::size_t n);
void mean_var(const double* x, std::size_t n, double& mean, double& var);
void add_squared_diff(const double* plane, double q, double* acc,
                      std::size_t n);
std::size_t argmin(const double* x, std::size_t n);
bool runtime_supported();
}  // namespace avx2
#endif

#if defined(MSVL_HAVE_NEON_TU)
namespace neon {
double sum_squared_diff(const double* a, const double* b, std::size_t n);
void signed_sq_gradient(const double* p, const double* inv_d, double* out,
                        std::size_t n);
void mean_var(const double* x, std::size_t n, double& mean, double& var);
void add_squared_diff(const double* plane, double q, double* acc,
                      std::size_t n);
std::size_t argmin(const double* x, std::size_t n);
}  // namespace neon
#endif

namespace {

struct Dispatch {
    Isa isa;
    double (*sum_squared_diff)(const double*, const double*, std::size_t);
    void (*signed_sq_gradient)(const double*, const double*, double*,
                               std::size_t);
    void (*mean_var)(const double*, std::size_t, double&, double&);
    void (*add_squared_diff)(const double*, double, double*, std::size_t);
    std::size_t (*argmin)(const double*, std::size_t);
};

constexpr Dispatch kScalar = {Isa::Scalar,
                              scalar::sum_squared_diff,
                              scalar::signed_sq_gradient,
                              scalar::mean_var,
                              scalar::add_squared_diff,
                              scalar::argmin};

Dispatch pick_default() {
#if defined(MSVL_HAVE_AVX2_TU)
    if (avx2::runtime_supported()) {
        return {Isa::Avx2,          avx2::sum_squared_diff,
                avx2::signed_sq_gradient, avx2::mean_var,
                avx2::add_squared_diff,   avx2::argmin};
    }
#endif
#if defined(MSVL_HAVE_NEON_TU)
    return {Isa::Neon,          neon::sum_squared_diff,
            neon::signed_sq_gradient, neon::mean_var,
            neon::add_squared_diff,   neon::argmin};
#endif
    return kScalar;
}

Dispatch g_dispatch = pick_default();

}  // namespace

Isa active_isa() { return g_dispatch.isa; }

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(MSVL_HAVE_AVX2_TU)
            return avx2::runtime_supported();
#else
            return false;
#endif
        case Isa::Neon:
#if defined(MSVL_HAVE_NEON_TU)
            return true;
#else
            return false;
#endif
    }
    return false;
}

void set_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw std::runtime_error("kernels: ISA not supported on this host: " +
                                 isa_name(isa));
    }
    if (isa == Isa::Scalar) {
        g_dispatch = kScalar;
        return;
    }
#if defined(MSVL_HAVE_AVX2_TU)
    if (isa == Isa::Avx2) {
        g_dispatch = {Isa::Avx2,          avx2::sum_squared_diff,
                      avx2::signed_sq_gradient, avx2::mean_var,
                      avx2::add_squared_diff,   avx2::argmin};
        return;
    }
#endif
#if defined(MSVL_HAVE_NEON_TU)
    if (isa == Isa::Neon) {
        g_dispatch = {Isa::Neon,          neon::sum_squared_diff,
                      neon::signed_sq_gradient, neon::mean_var,
                      neon::add_squared_diff,   neon::argmin};
        return;
    }
#endif
    throw std::runtime_error("kernels: ISA not compiled in");
}

std::string isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

double sum_squared_diff(const double* a, const double* b, std::size_t n) {
    return g_dispatch.sum_squared_diff(a, b, n);
}

void signed_sq_gradient(const double* p, const double* inv_d, double* out,
                        std::size_t n) {
    g_dispatch.signed_sq_gradient(p, inv_d, out, n);
}

void mean_var(const double* x, std::size_t n, double& mean, double& var) {
    g_dispatch.mean_var(x, n, mean, var);
}

void add_squared_diff(const double* plane, double q, double* acc,
                      std::size_t n) {
    g_dispatch.add_squared_diff(plane, q, acc, n);
}

std::size_t argmin(const double* x, std::size_t n) {
    return g_dispatch.argmin(x, n);
}

}  // namespace msvl::kernels
