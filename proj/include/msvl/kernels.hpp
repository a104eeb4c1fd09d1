#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops shared by the segmentation cost, feature
// matching, and exhaustive-search baselines. Each kernel has a scalar
// reference implementation and optional SIMD variants selected once at
// startup from CPU capabilities. The scalar path is the semantic
// reference; SIMD variants are equivalence-tested against it.

namespace msvl::kernels {

enum class Isa { Scalar, Avx2, Neon };

Isa active_isa();
bool isa_supported(Isa isa);
// Overrides the dispatched implementation (tests). Throws if unsupported.
void set_isa(Isa isa);
std::string isa_name(Isa isa);

// sum over i of (a[i] - b[i])^2
double sum_squared_diff(const double* a, const double* b, std::size_t n);

// out[i] = sgn(p[i+1] - p[i]) * ((p[i+1] - p[i]) * inv_d[i])^2 for i in [0, n)
// (n gradients require n + 1 samples in p)
void signed_sq_gradient(const double* p, const double* inv_d, double* out,
                        std::size_t n);

// population mean and variance
void mean_var(const double* x, std::size_t n, double& mean, double& var);

// acc[i] += (plane[i] - q)^2
void add_squared_diff(const double* plane, double q, double* acc,
                      std::size_t n);

// index of smallest element (first occurrence)
std::size_t argmin(const double* x, std::size_t n);

// Scalar reference implementations, always available.
namespace scalar {
double sum_squared_diff(const double* a, const double* b, std::size_t n);
void signed_sq_gradient(const double* p, const double* inv_d, double* out,
                        std::size_t n);
void mean_var(const double* x, std::size_t n, double& mean, double& var);
void add_squared_diff(const double* plane, double q, double* acc,
                      std::size_t n);
std::size_t argmin(const double* x, std::size_t n);
}  // namespace scalar

}  // namespace msvl::kernels
