#include "msvl/crlb.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace msvl {

namespace {
constexpr double kLn10 = 2.302585092994045684;
}

Vec2 SegmentGeometry::position_of(int i) const {
    return position_of(i, mid);
}

Vec2 SegmentGeometry::position_of(int i, Vec2 mid_override) const {
    const double t = 2.0 * static_cast<double>(i) /
                     static_cast<double>(n_positions);
    return first + t * (mid_override - first);
}

double SegmentGeometry::distance_to(int i, std::size_t k) const {
    return distance(position_of(i), bs.at(k).position);
}

void SegmentGeometry::validate() const {
    if (n_positions < 3) {
        throw std::invalid_argument("SegmentGeometry: N must be >= 3");
    }
    for (std::size_t k = 0; k < bs.size(); ++k) {
        if (bs[k].rho <= 0.0 || bs[k].eta <= 0.0) {
            throw std::invalid_argument("SegmentGeometry: noise std must be > 0");
        }
        for (int i = 1; i <= n_positions; ++i) {
            if (distance(position_of(i), bs[k].position) <= 0.0) {
                throw std::invalid_argument(
                    "SegmentGeometry: position coincides with BS");
            }
        }
    }
}

bool SymMat2::psd(double tol) const {
    const double scale = std::max({std::abs(m11), std::abs(m22), 1.0});
    return m11 >= -tol * scale && m22 >= -tol * scale &&
           m11 * m22 - m12 * m12 >= -tol * scale * scale;
}

double gradient_feature_value(const SegmentGeometry& geom, std::size_t k,
                              Vec2 mid) {
    const int n = geom.n_positions;
    const double beta = geom.bs[k].beta;
    double acc = 0.0;
    for (int i = 1; i < n; ++i) {
        const double d0 = distance(geom.position_of(i, mid),
                                   geom.bs[k].position);
        const double d1 = distance(geom.position_of(i + 1, mid),
                                   geom.bs[k].position);
        const double dl = std::log10(d1) - std::log10(d0);
        acc += dl * dl;
    }
    return (100.0 * beta * beta) * acc / static_cast<double>(n - 1);
}

double mean_feature_value(const SegmentGeometry& geom, std::size_t k,
                          Vec2 mid) {
    const int n = geom.n_positions;
    const double beta = geom.bs[k].beta;
    double acc = 0.0;
    for (int i = 1; i <= n; ++i) {
        acc += std::log10(
            distance(geom.position_of(i, mid), geom.bs[k].position));
    }
    return -10.0 * beta * acc / static_cast<double>(n);
}

std::vector<std::array<double, 2>> jacobian_gradient_feature(
    const SegmentGeometry& geom) {
    geom.validate();
    const int n = geom.n_positions;
    std::vector<std::array<double, 2>> jac(geom.bs.size());
    for (std::size_t k = 0; k < geom.bs.size(); ++k) {
        const double beta = geom.bs[k].beta;
        const double pre =
            (100.0 * beta * beta) / (static_cast<double>(n - 1) * kLn10);
        double jx = 0.0, jy = 0.0;
        for (int i = 1; i < n; ++i) {
            const Vec2 p0 = geom.position_of(i);
            const Vec2 p1 = geom.position_of(i + 1);
            const double d0 = distance(p0, geom.bs[k].position);
            const double d1 = distance(p1, geom.bs[k].position);
            const double dl = std::log10(d1) - std::log10(d0);
            const double c0 = (p0.x - geom.bs[k].position.x) / d0;
            const double c1 = (p1.x - geom.bs[k].position.x) / d1;
            const double s0 = (p0.y - geom.bs[k].position.y) / d0;
            const double s1 = (p1.y - geom.bs[k].position.y) / d1;
            const double r0 = 2.0 * static_cast<double>(i) /
                              static_cast<double>(n);
            const double r1 = 2.0 * static_cast<double>(i + 1) /
                              static_cast<double>(n);
            jx += 2.0 * dl * (c1 * r1 / d1 - c0 * r0 / d0);
            jy += 2.0 * dl * (s1 * r1 / d1 - s0 * r0 / d0);
        }
        jac[k] = {pre * jx, pre * jy};
    }
    return jac;
}

std::vector<std::array<double, 2>> jacobian_mean_feature(
    const SegmentGeometry& geom) {
    geom.validate();
    const int n = geom.n_positions;
    std::vector<std::array<double, 2>> jac(geom.bs.size());
    for (std::size_t k = 0; k < geom.bs.size(); ++k) {
        const double beta = geom.bs[k].beta;
        const double pre = -20.0 * beta /
                           (static_cast<double>(n) * static_cast<double>(n) *
                            kLn10);
        double jx = 0.0, jy = 0.0;
        for (int i = 1; i <= n; ++i) {
            const Vec2 p = geom.position_of(i);
            const double d = distance(p, geom.bs[k].position);
            jx += static_cast<double>(i) * (p.x - geom.bs[k].position.x) /
                  (d * d);
            jy += static_cast<double>(i) * (p.y - geom.bs[k].position.y) /
                  (d * d);
        }
        jac[k] = {pre * jx, pre * jy};
    }
    return jac;
}

SymMat2 fim(const std::vector<std::array<double, 2>>& jacobian,
            const std::vector<double>& noise_variances) {
    if (jacobian.size() != noise_variances.size()) {
        throw std::invalid_argument("fim: dimension mismatch");
    }
    SymMat2 phi;
    for (std::size_t k = 0; k < jacobian.size(); ++k) {
        const double var = noise_variances[k];
        if (var <= 0.0) {
            throw std::invalid_argument("fim: noise variance must be > 0");
        }
        phi.m11 += jacobian[k][0] * jacobian[k][0] / var;
        phi.m12 += jacobian[k][0] * jacobian[k][1] / var;
        phi.m22 += jacobian[k][1] * jacobian[k][1] / var;
    }
    return phi;
}

SymMat2 gradient_fim(const SegmentGeometry& geom) {
    std::vector<double> vars;
    vars.reserve(geom.bs.size());
    for (const auto& b : geom.bs) vars.push_back(b.rho * b.rho);
    return fim(jacobian_gradient_feature(geom), vars);
}

SymMat2 mean_fim(const SegmentGeometry& geom) {
    std::vector<double> vars;
    vars.reserve(geom.bs.size());
    for (const auto& b : geom.bs) vars.push_back(b.eta * b.eta);
    return fim(jacobian_mean_feature(geom), vars);
}

SymMat2 joint_fim(const SegmentGeometry& geom) {
    return gradient_fim(geom) + mean_fim(geom);
}

double crlb_trace_bound(const SymMat2& phi) {
    const double t = phi.trace();
    if (t <= 0.0) return std::numeric_limits<double>::infinity();
    return 4.0 / t;
}

double closed_form_colinear_bound(const SegmentGeometry& geom) {
    geom.validate();
    const double n = geom.n_positions;
    double denom = 0.0;
    for (std::size_t k = 0; k < geom.bs.size(); ++k) {
        const double beta = geom.bs[k].beta;
        const double rho2 = geom.bs[k].rho * geom.bs[k].rho;
        const double d_first = geom.distance_to(1, k);
        const double d_last = geom.distance_to(geom.n_positions, k);
        if (d_first <= 0.0 || d_last <= 0.0) {
            throw std::domain_error("closed_form_colinear_bound: degenerate distances");
        }
        const double term = 1.0 / d_last - 1.0 / (d_first * n);
        denom += (beta * beta * beta * beta / rho2) * term * term;
    }
    denom *= 4.0e4 / ((n - 1.0) * (n - 1.0));
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return kLn10 * kLn10 / denom;
}

double endpoint_ratio(const SegmentGeometry& geom,
                      const std::vector<double>& d_first_alt,
                      const std::vector<double>& d_last_alt) {
    geom.validate();
    if (d_first_alt.size() != geom.bs.size() ||
        d_last_alt.size() != geom.bs.size()) {
        throw std::invalid_argument("endpoint_ratio: dimension mismatch");
    }
    const double n = geom.n_positions;
    double extreme = 0.0, alt = 0.0;
    for (std::size_t k = 0; k < geom.bs.size(); ++k) {
        double d_min = std::numeric_limits<double>::infinity();
        double d_max = 0.0;
        for (int i = 1; i <= geom.n_positions; ++i) {
            const double d = geom.distance_to(i, k);
            d_min = std::min(d_min, d);
            d_max = std::max(d_max, d);
        }
        const double w = std::pow(geom.bs[k].beta, 4) /
                         (geom.bs[k].rho * geom.bs[k].rho);
        const double te = 1.0 / d_min - 1.0 / (d_max * n);
        const double ta = 1.0 / d_last_alt[k] - 1.0 / (d_first_alt[k] * n);
        extreme += w * te * te;
        alt += w * ta * ta;
    }
    return extreme / alt;
}

Prop2Result verify_prop2(const SegmentGeometry& geom) {
    Prop2Result out;
    const SymMat2 phi_g = gradient_fim(geom);
    const SymMat2 phi_m = mean_fim(geom);
    out.a = phi_g.trace();
    out.b = phi_m.trace();
    out.gradient_only_bound = crlb_trace_bound(phi_g);
    out.joint_bound = crlb_trace_bound(phi_g + phi_m);
    out.decrease = out.gradient_only_bound - out.joint_bound;
    out.predicted_decrease =
        (out.a > 0.0) ? 4.0 * out.b / (out.a * (out.a + out.b)) : 0.0;
    out.holds = (out.b > 0.0) ? (out.decrease > 0.0) : (out.decrease == 0.0);
    return out;
}

Prop3Result verify_prop3(const SegmentGeometry& geom, std::size_t k,
                         double tol) {
    const SymMat2 full = gradient_fim(geom);
    SegmentGeometry reduced = geom;
    reduced.bs.erase(reduced.bs.begin() + static_cast<std::ptrdiff_t>(k));
    const SymMat2 without = gradient_fim(reduced);
    Prop3Result out;
    out.max_fim_diff = std::max({std::abs(full.m11 - without.m11),
                                 std::abs(full.m12 - without.m12),
                                 std::abs(full.m22 - without.m22)});
    out.holds = out.max_fim_diff <= tol;
    return out;
}

double rho_from_rss_sigma(double mean_abs_gradient, double rss_sigma,
                          double sample_interval_m) {
    return 2.0 * std::abs(mean_abs_gradient) * rss_sigma * std::sqrt(2.0) /
           sample_interval_m;
}

CRLBReport crlb_report(const SegmentGeometry& geom) {
    CRLBReport report;
    report.fim = joint_fim(geom);
    report.trace_bound = crlb_trace_bound(report.fim);

    // closed form applies only when everything sits on one line
    bool colinear = true;
    const Vec2 dir = geom.mid - geom.first;
    const double dn = norm(dir);
    for (const auto& b : geom.bs) {
        const Vec2 rel = b.position - geom.first;
        const double cross = dir.x * rel.y - dir.y * rel.x;
        if (std::abs(cross) > 1e-9 * dn * std::max(norm(rel), 1.0)) {
            colinear = false;
            break;
        }
    }
    report.closed_form_bound =
        colinear ? closed_form_colinear_bound(geom)
                 : std::numeric_limits<double>::quiet_NaN();
    return report;
}

}  // namespace msvl
