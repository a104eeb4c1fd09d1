// NEON variants (aarch64). Same tail/remainder convention as the AVX2 TU.

#include <arm_neon.h>

#include <cstddef>

namespace msvl::kernels {

namespace scalar {
double sum_squared_diff(const double* a, const double* b, std::size_t n);
void signed_sq_gradient(const double* p, const double* inv_d, double* out,
                        std::size_t n);
void mean_var(const double* x, std::size_t n, double& mean, double& var);
void add_squared_diff(const double* plane, double q, double* acc,
                      std::size_t n);
std::size_t argmin(const double* x, std::size_t n);
}  // namespace scalar

namespace neon {

double sum_squared_diff(const double* a, const double* b, std::size_t n) {
    const std::size_t vn = n & ~std::size_t{1};
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < vn; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    return vaddvq_f64(acc) + scalar::sum_squared_diff(a + vn, b + vn, n - vn);
}

void signed_sq_gradient(const double* p, const double* inv_d, double* out,
                        std::size_t n) {
    scalar::signed_sq_gradient(p, inv_d, out, n);
}

void mean_var(const double* x, std::size_t n, double& mean, double& var) {
    if (n == 0) {
        mean = 0.0;
        var = 0.0;
        return;
    }
    const std::size_t vn = n & ~std::size_t{1};
    float64x2_t sum = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < vn; i += 2) {
        sum = vaddq_f64(sum, vld1q_f64(x + i));
    }
    double total = vaddvq_f64(sum);
    for (std::size_t i = vn; i < n; ++i) total += x[i];
    mean = total / static_cast<double>(n);

    const float64x2_t m = vdupq_n_f64(mean);
    float64x2_t sq = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < vn; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(x + i), m);
        sq = vfmaq_f64(sq, d, d);
    }
    double sqtotal = vaddvq_f64(sq);
    for (std::size_t i = vn; i < n; ++i) {
        const double d = x[i] - mean;
        sqtotal += d * d;
    }
    var = sqtotal / static_cast<double>(n);
}

void add_squared_diff(const double* plane, double q, double* acc,
                      std::size_t n) {
    const std::size_t vn = n & ~std::size_t{1};
    const float64x2_t qv = vdupq_n_f64(q);
    for (std::size_t i = 0; i < vn; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(plane + i), qv);
        vst1q_f64(acc + i, vfmaq_f64(vld1q_f64(acc + i), d, d));
    }
    scalar::add_squared_diff(plane + vn, q, acc + vn, n - vn);
}

std::size_t argmin(const double* x, std::size_t n) {
    return scalar::argmin(x, n);
}

}  // namespace neon

}  // namespace msvl::kernels
