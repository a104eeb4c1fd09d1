#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "msvl/geometry.hpp"

namespace msvl {

struct BsNoiseGeometry {
    Vec2 position;
    double beta = 2.0;
    double rho = 1.0;  // gradient-feature noise std
    double eta = 1.0;  // mean-feature noise std
};

/// Segment measurement geometry: positions i = 1..N are interpolated from
/// the first point through the midpoint, x_i = (2i/N)(x_m - x_1) + x_1.
struct SegmentGeometry {
    int n_positions = 3;  // N
    Vec2 first;
    Vec2 mid;
    std::vector<BsNoiseGeometry> bs;

    Vec2 position_of(int i) const;                 // i in [1, N]
    Vec2 position_of(int i, Vec2 mid_override) const;
    double distance_to(int i, std::size_t k) const;
    void validate() const;
};

struct SymMat2 {
    double m11 = 0.0, m12 = 0.0, m22 = 0.0;

    double trace() const { return m11 + m22; }
    SymMat2 operator+(const SymMat2& o) const {
        return {m11 + o.m11, m12 + o.m12, m22 + o.m22};
    }
    bool psd(double tol = 1e-12) const;
};

/// Signed mean square gradient of BS k as a function of the midpoint
/// (measurement model without the noise term).
double gradient_feature_value(const SegmentGeometry& geom, std::size_t k,
                              Vec2 mid);
/// Mean RSS of BS k as a function of the midpoint (additive constant
/// dropped).
double mean_feature_value(const SegmentGeometry& geom, std::size_t k,
                          Vec2 mid);

/// K x 2 analytic Jacobians of the feature values w.r.t. the midpoint.
std::vector<std::array<double, 2>> jacobian_gradient_feature(
    const SegmentGeometry& geom);
std::vector<std::array<double, 2>> jacobian_mean_feature(
    const SegmentGeometry& geom);

/// J^T diag(1/noise_var) J
SymMat2 fim(const std::vector<std::array<double, 2>>& jacobian,
            const std::vector<double>& noise_variances);

SymMat2 gradient_fim(const SegmentGeometry& geom);
SymMat2 mean_fim(const SegmentGeometry& geom);
SymMat2 joint_fim(const SegmentGeometry& geom);

/// 4 / (Phi_11 + Phi_22); infinity when the trace vanishes.
double crlb_trace_bound(const SymMat2& fim);

/// Closed-form trace bound for the colinear unit-interval geometry.
double closed_form_colinear_bound(const SegmentGeometry& geom);

/// Trace-bound ratio between a segment cut at the distance extremes and
/// one cut at the given alternative endpoint distances (per BS).
double endpoint_ratio(const SegmentGeometry& geom,
                      const std::vector<double>& d_first_alt,
                      const std::vector<double>& d_last_alt);

struct Prop2Result {
    bool holds = false;
    double gradient_only_bound = 0.0;
    double joint_bound = 0.0;
    double decrease = 0.0;
    double predicted_decrease = 0.0;  // 4b / (a (a + b))
    double a = 0.0;                   // gradient FIM trace
    double b = 0.0;                   // mean FIM trace
};
Prop2Result verify_prop2(const SegmentGeometry& geom);

struct Prop3Result {
    bool holds = false;
    double max_fim_diff = 0.0;
};
/// Gradient FIM with and without BS k; equal when that BS keeps a constant
/// distance across the segment.
Prop3Result verify_prop3(const SegmentGeometry& geom, std::size_t k,
                         double tol = 1e-9);

/// First-order propagation of the RSS noise std into the gradient-feature
/// noise std.
double rho_from_rss_sigma(double mean_abs_gradient, double rss_sigma,
                          double sample_interval_m);

struct CRLBReport {
    SymMat2 fim;
    double trace_bound = 0.0;
    double closed_form_bound = 0.0;  // NaN when geometry is not colinear
    std::string features = "gradient+mean";
};
CRLBReport crlb_report(const SegmentGeometry& geom);

}  // namespace msvl
