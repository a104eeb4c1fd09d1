// AVX2 variants of the hot inner loops. Tails are handled by the scalar
// reference so both paths share the remainder semantics.

#include <immintrin.h>

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

namespace avx2 {

bool runtime_supported() { return __builtin_cpu_supports("avx2") != 0; }

namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

}  // namespace

double sum_squared_diff(const double* a, const double* b, std::size_t n) {
    const std::size_t vn = n & ~std::size_t{3};
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < vn; i += 4) {
        const __m256d d =
            _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    return hsum(acc) + scalar::sum_squared_diff(a + vn, b + vn, n - vn);
}

void signed_sq_gradient(const double* p, const double* inv_d, double* out,
                        std::size_t n) {
    const std::size_t vn = n & ~std::size_t{3};
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d neg_one = _mm256_set1_pd(-1.0);
    for (std::size_t i = 0; i < vn; i += 4) {
        const __m256d dp =
            _mm256_sub_pd(_mm256_loadu_pd(p + i + 1), _mm256_loadu_pd(p + i));
        const __m256d g = _mm256_mul_pd(dp, _mm256_loadu_pd(inv_d + i));
        const __m256d gt = _mm256_cmp_pd(dp, zero, _CMP_GT_OQ);
        const __m256d lt = _mm256_cmp_pd(dp, zero, _CMP_LT_OQ);
        __m256d sign = _mm256_blendv_pd(zero, one, gt);
        sign = _mm256_blendv_pd(sign, neg_one, lt);
        // sign * g * g; NaN dp yields sign 0 but g*g stays NaN, so 0*NaN
        // propagates NaN like the scalar path
        _mm256_storeu_pd(out + i,
                         _mm256_mul_pd(sign, _mm256_mul_pd(g, g)));
    }
    scalar::signed_sq_gradient(p + vn, inv_d + vn, out + vn, n - vn);
}

void mean_var(const double* x, std::size_t n, double& mean, double& var) {
    if (n == 0) {
        mean = 0.0;
        var = 0.0;
        return;
    }
    const std::size_t vn = n & ~std::size_t{3};
    __m256d sum = _mm256_setzero_pd();
    for (std::size_t i = 0; i < vn; i += 4) {
        sum = _mm256_add_pd(sum, _mm256_loadu_pd(x + i));
    }
    double total = hsum(sum);
    for (std::size_t i = vn; i < n; ++i) total += x[i];
    mean = total / static_cast<double>(n);

    const __m256d m = _mm256_set1_pd(mean);
    __m256d sq = _mm256_setzero_pd();
    for (std::size_t i = 0; i < vn; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), m);
        sq = _mm256_fmadd_pd(d, d, sq);
    }
    double sqtotal = hsum(sq);
    for (std::size_t i = vn; i < n; ++i) {
        const double d = x[i] - mean;
        sqtotal += d * d;
    }
    var = sqtotal / static_cast<double>(n);
}

void add_squared_diff(const double* plane, double q, double* acc,
                      std::size_t n) {
    const std::size_t vn = n & ~std::size_t{3};
    const __m256d qv = _mm256_set1_pd(q);
    for (std::size_t i = 0; i < vn; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(plane + i), qv);
        _mm256_storeu_pd(acc + i,
                         _mm256_fmadd_pd(d, d, _mm256_loadu_pd(acc + i)));
    }
    scalar::add_squared_diff(plane + vn, q, acc + vn, n - vn);
}

std::size_t argmin(const double* x, std::size_t n) {
    if (n < 8) return scalar::argmin(x, n);
    const std::size_t vn = n & ~std::size_t{3};
    __m256d best = _mm256_loadu_pd(x);
    for (std::size_t i = 4; i < vn; i += 4) {
        best = _mm256_min_pd(best, _mm256_loadu_pd(x + i));
    }
    double lanes[4];
    _mm256_storeu_pd(lanes, best);
    double m = lanes[0];
    for (int i = 1; i < 4; ++i)
        if (lanes[i] < m) m = lanes[i];
    for (std::size_t i = vn; i < n; ++i)
        if (x[i] < m) m = x[i];
    // second pass for the first index of the minimum
    for (std::size_t i = 0; i < n; ++i)
        if (x[i] == m) return i;
    return scalar::argmin(x, n);  // NaN-only input
}

}  // namespace avx2

}  // namespace msvl::kernels
