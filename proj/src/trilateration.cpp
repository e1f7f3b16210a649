#include <cmath>

#include "pfdoa/baselines.hpp"

namespace pfdoa {

double trilateration_objective(std::span<const Vec2> anchors, std::span<const double> distances, Vec2 p) {
    double f = 0.0;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const double r = distance(p, anchors[i]) - distances[i];
        f += r * r;
    }
    return f;
}

namespace {

void check_not_collinear(std::span<const Vec2> anchors) {
    Vec2 mean;
    for (auto a : anchors) mean += a;
    mean = (1.0 / static_cast<double>(anchors.size())) * mean;
    double sxx = 0, sxy = 0, syy = 0;
    for (auto a : anchors) {
        const Vec2 d = a - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    const double scale = (sxx + syy) * (sxx + syy);
    if (!(scale > 0.0) || sxx * syy - sxy * sxy <= 1e-12 * scale)
        throw Error("trilaterate: anchors are collinear");
}

} // namespace

TrilaterationResult trilaterate(std::span<const Vec2> anchors, std::span<const double> distances,
                                const TrilaterationOptions& options) {
    if (anchors.size() < 3) throw Error("trilaterate: need at least 3 anchors");
    if (anchors.size() != distances.size()) throw Error("trilaterate: anchor/distance count mismatch");
    for (double d : distances)
        if (!(d > 0.0) || !std::isfinite(d)) throw Error("trilaterate: distances must be positive and finite");
    check_not_collinear(anchors);

    Vec2 p;
    for (auto a : anchors) p += a;
    p = (1.0 / static_cast<double>(anchors.size())) * p;

    TrilaterationResult result;
    double f = trilateration_objective(anchors, distances, p);
    for (int it = 0; it < options.max_iterations; ++it) {
        result.iterations = it + 1;
        // normal equations of the linearized residuals
        double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
        for (std::size_t i = 0; i < anchors.size(); ++i) {
            const Vec2 v = p - anchors[i];
            const double r = norm(v);
            if (r < 1e-12) continue;
            const double jx = v.x / r, jy = v.y / r;
            const double res = r - distances[i];
            a11 += jx * jx;
            a12 += jx * jy;
            a22 += jy * jy;
            b1 -= jx * res;
            b2 -= jy * res;
        }
        const double mu = 1e-9 * (a11 + a22) + 1e-15;
        a11 += mu;
        a22 += mu;
        const double det = a11 * a22 - a12 * a12;
        if (!(std::fabs(det) > 0.0)) break;
        const Vec2 delta{(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};

        // backtracking keeps every accepted iterate at or below the previous objective
        double t = 1.0;
        Vec2 next = p + delta;
        double fn = trilateration_objective(anchors, distances, next);
        while (fn > f && t > 1e-10) {
            t *= 0.5;
            next = p + t * delta;
            fn = trilateration_objective(anchors, distances, next);
        }
        const double step = t * norm(delta);
        if (fn <= f) {
            p = next;
            f = fn;
        }
        if (step < options.step_tolerance || fn > f) {
            result.converged = true;
            break;
        }
    }
    result.position = p;
    result.objective = f;
    return result;
}

Vec2 weighted_centroid(std::span<const Vec2> anchors, std::span<const double> rssi) {
    if (anchors.empty()) throw Error("weighted_centroid: no anchors");
    if (anchors.size() != rssi.size()) throw Error("weighted_centroid: anchor/rssi count mismatch");
    double strongest = rssi[0];
    for (double r : rssi) strongest = std::fmax(strongest, r);
    Vec2 p;
    double total = 0.0;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        // 10^(r/10) scaled by the strongest reading; the scale cancels
        const double w = std::pow(10.0, (rssi[i] - strongest) / 10.0);
        p += w * anchors[i];
        total += w;
    }
    return (1.0 / total) * p;
}

} // namespace pfdoa
