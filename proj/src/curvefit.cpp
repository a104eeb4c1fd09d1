#include "msvl/curvefit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace msvl {

namespace {

double eval_poly(const std::vector<double>& coef, double x) {
    double acc = 0.0;
    for (std::size_t i = coef.size(); i-- > 0;) acc = acc * x + coef[i];
    return acc;
}

// Solve the normal equations of a polynomial fit in the scaled variable
// t = (x - center) / scale, then expand back to raw-x coefficients.
std::vector<double> polyfit(const std::vector<double>& xs,
                            const std::vector<double>& ys, int order,
                            double center, double scale) {
    const std::size_t n = xs.size();
    const std::size_t m = static_cast<std::size_t>(order) + 1;
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = (xs[i] - center) / scale;

    // A^T A and A^T y for the Vandermonde design in t
    std::vector<double> ata(m * m, 0.0), aty(m, 0.0);
    std::vector<double> pow_t(2 * m - 1);
    for (std::size_t i = 0; i < n; ++i) {
        pow_t[0] = 1.0;
        for (std::size_t p = 1; p < pow_t.size(); ++p) {
            pow_t[p] = pow_t[p - 1] * t[i];
        }
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < m; ++c) ata[r * m + c] += pow_t[r + c];
            aty[r] += pow_t[r] * ys[i];
        }
    }

    // Cholesky
    std::vector<double> chol(m * m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c <= r; ++c) {
            double sum = ata[r * m + c];
            for (std::size_t k = 0; k < c; ++k) {
                sum -= chol[r * m + k] * chol[c * m + k];
            }
            if (r == c) {
                if (sum <= 0.0) {
                    throw std::runtime_error("polyfit: rank-deficient design");
                }
                chol[r * m + r] = std::sqrt(sum);
            } else {
                chol[r * m + c] = sum / chol[c * m + c];
            }
        }
    }
    std::vector<double> z(m), coef_t(m);
    for (std::size_t r = 0; r < m; ++r) {
        double sum = aty[r];
        for (std::size_t k = 0; k < r; ++k) sum -= chol[r * m + k] * z[k];
        z[r] = sum / chol[r * m + r];
    }
    for (std::size_t r = m; r-- > 0;) {
        double sum = z[r];
        for (std::size_t k = r + 1; k < m; ++k) sum -= chol[k * m + r] * coef_t[k];
        coef_t[r] = sum / chol[r * m + r];
    }

    // expand sum c_i ((x - center)/scale)^i into ascending powers of x
    const double a = 1.0 / scale;
    const double b = -center / scale;
    std::vector<double> raw(m, 0.0);
    std::vector<double> basis{1.0};  // (a x + b)^i
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < basis.size(); ++p) {
            raw[p] += coef_t[i] * basis[p];
        }
        if (i + 1 < m) {
            std::vector<double> next(basis.size() + 1, 0.0);
            for (std::size_t p = 0; p < basis.size(); ++p) {
                next[p] += basis[p] * b;
                next[p + 1] += basis[p] * a;
            }
            basis = std::move(next);
        }
    }
    return raw;
}

}  // namespace

double FittedCurve::eval_x(double rss) const { return eval_poly(theta, rss); }
double FittedCurve::eval_y(double rss) const { return eval_poly(alpha, rss); }

BoundingBox BoundingBox::expanded(double fraction) const {
    const double dx = (max.x - min.x) * fraction;
    const double dy = (max.y - min.y) * fraction;
    return {{min.x - dx, min.y - dy}, {max.x + dx, max.y + dy}};
}

Vec2 BoundingBox::clamp(Vec2 p) const {
    return {std::clamp(p.x, min.x, max.x), std::clamp(p.y, min.y, max.y)};
}

BoundingBox bounding_box(const RoadSignalSequence& seq, std::size_t start,
                         std::size_t end) {
    BoundingBox box{seq.records[start].coord, seq.records[start].coord};
    for (std::size_t j = start; j <= end; ++j) {
        const Vec2 c = seq.records[j].coord;
        box.min.x = std::min(box.min.x, c.x);
        box.min.y = std::min(box.min.y, c.y);
        box.max.x = std::max(box.max.x, c.x);
        box.max.y = std::max(box.max.y, c.y);
    }
    return box;
}

std::vector<FittedCurve> fit_segment_curves(const RoadSignalSequence& seq,
                                            std::size_t start,
                                            std::size_t end, int order) {
    if (order < 1) {
        throw std::invalid_argument("fit_segment_curves: order must be >= 1");
    }
    const std::size_t n_pos = end - start + 1;
    if (start >= end || end >= seq.size()) {
        throw std::invalid_argument("fit_segment_curves: bad range");
    }
    const std::size_t n_bs = seq.bs_count();

    std::vector<FittedCurve> curves;
    for (std::size_t k = 0; k < n_bs; ++k) {
        std::vector<double> rss, xs, ys;
        bool detected = true;
        for (std::size_t j = start; j <= end; ++j) {
            const double v = seq.records[j].rss[k];
            if (!is_detected(v)) {
                detected = false;
                break;
            }
            rss.push_back(v);
            xs.push_back(seq.records[j].coord.x);
            ys.push_back(seq.records[j].coord.y);
        }
        if (!detected) continue;

        const auto [mn, mx] = std::minmax_element(rss.begin(), rss.end());
        if (*mx - *mn <= 0.0) {
            throw std::runtime_error(
                "fit_segment_curves: constant RSS for BS index " +
                std::to_string(k) + ", design is rank-deficient");
        }
        std::vector<double> uniq(rss);
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        const int eff_order = std::min<int>(
            order, static_cast<int>(std::min(uniq.size(), n_pos)) - 1);

        const double center = 0.5 * (*mn + *mx);
        const double scale = 0.5 * (*mx - *mn);

        FittedCurve curve;
        curve.road_id = seq.road_id;
        curve.bs_index = static_cast<int>(k);
        curve.order = eff_order;
        curve.theta = polyfit(rss, xs, eff_order, center, scale);
        curve.alpha = polyfit(rss, ys, eff_order, center, scale);

        double sq = 0.0;
        for (std::size_t j = 0; j < rss.size(); ++j) {
            const double dx = curve.eval_x(rss[j]) - xs[j];
            const double dy = curve.eval_y(rss[j]) - ys[j];
            sq += dx * dx + dy * dy;
        }
        curve.fit_residual = std::sqrt(sq / static_cast<double>(rss.size()));
        curves.push_back(std::move(curve));
    }
    if (curves.empty()) {
        throw std::runtime_error("fit_segment_curves: no BS detected throughout");
    }
    return curves;
}

Vec2 map_coordinate(const std::vector<FittedCurve>& curves,
                    const std::vector<double>& rss,
                    const std::optional<BoundingBox>& guard) {
    double sx = 0.0, sy = 0.0;
    std::size_t used = 0;
    for (const auto& curve : curves) {
        const auto k = static_cast<std::size_t>(curve.bs_index);
        if (k >= rss.size() || !is_detected(rss[k])) continue;
        sx += curve.eval_x(rss[k]);
        sy += curve.eval_y(rss[k]);
        ++used;
    }
    if (used == 0) {
        throw std::runtime_error("map_coordinate: no usable curve");
    }
    Vec2 p{sx / static_cast<double>(used), sy / static_cast<double>(used)};
    if (guard) p = guard->clamp(p);
    return p;
}

}  // namespace msvl
