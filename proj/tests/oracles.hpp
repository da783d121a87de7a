#pragma once

// Independent brute-force oracles used only by tests. These deliberately
// avoid the library's algorithms: polygon overlap goes through orientation
// predicates and point-in-polygon, Wasserstein through sample expansion,
// gradients through central finite differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "advgen/geometry.hpp"

namespace oracle {

using advgen::OrientedBox;
using advgen::Vec2;

inline double orient(Vec2 a, Vec2 b, Vec2 c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
           std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    double d1 = orient(q1, q2, p1);
    double d2 = orient(q1, q2, p2);
    double d3 = orient(p1, p2, q1);
    double d4 = orient(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
}

inline bool point_in_convex_polygon(Vec2 p, const Vec2 poly[4]) {
    // CCW polygon, boundary counts as inside
    for (int i = 0; i < 4; ++i) {
        if (orient(poly[i], poly[(i + 1) % 4], p) < -1e-12) return false;
    }
    return true;
}

inline bool polygons_intersect(const OrientedBox& a, const OrientedBox& b) {
    Vec2 ca[4], cb[4];
    a.corners(ca);
    b.corners(cb);
    for (int i = 0; i < 4; ++i) {
        if (point_in_convex_polygon(ca[i], cb)) return true;
        if (point_in_convex_polygon(cb[i], ca)) return true;
    }
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if (segments_intersect(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4])) return true;
        }
    }
    return false;
}

inline bool segment_hits_polygon(Vec2 p, Vec2 q, const OrientedBox& box) {
    Vec2 c[4];
    box.corners(c);
    if (point_in_convex_polygon(p, c) || point_in_convex_polygon(q, c)) return true;
    for (int i = 0; i < 4; ++i) {
        if (segments_intersect(p, q, c[i], c[(i + 1) % 4])) return true;
    }
    return false;
}

// 1-Wasserstein by expanding both samples to a common atom count (n*m each)
// and matching sorted atoms.
inline double wasserstein_expand(std::vector<double> a, std::vector<double> b) {
    size_t n = a.size(), m = b.size();
    std::vector<double> ea, eb;
    for (double x : a)
        for (size_t k = 0; k < m; ++k) ea.push_back(x);
    for (double x : b)
        for (size_t k = 0; k < n; ++k) eb.push_back(x);
    std::sort(ea.begin(), ea.end());
    std::sort(eb.begin(), eb.end());
    double acc = 0.0;
    for (size_t i = 0; i < ea.size(); ++i) acc += std::fabs(ea[i] - eb[i]);
    return acc / double(ea.size());
}

// central finite differences of a scalar function of a flat vector
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h = 1e-5) {
    std::vector<double> g(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        double keep = x[i];
        x[i] = keep + h;
        double fp = f(x);
        x[i] = keep - h;
        double fm = f(x);
        x[i] = keep;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline double max_rel_err(const std::vector<double>& got, const std::vector<double>& want,
                          double floor_scale = 1e-6) {
    double worst = 0.0;
    for (size_t i = 0; i < got.size(); ++i) {
        double denom = std::max(std::fabs(want[i]), floor_scale);
        worst = std::max(worst, std::fabs(got[i] - want[i]) / denom);
    }
    return worst;
}

}  // namespace oracle
