#include "advgen/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace advgen {

void OrientedBox::corners(Vec2 out[4]) const {
    double c = std::cos(center.heading), s = std::sin(center.heading);
    Vec2 ax{c, s}, ay{-s, c};
    Vec2 hl = ax * (0.5 * length), hw = ay * (0.5 * width);
    Vec2 ctr = center.position();
    out[0] = ctr + hl + hw;
    out[1] = ctr - hl + hw;
    out[2] = ctr - hl - hw;
    out[3] = ctr + hl - hw;
}

namespace {

struct Interval {
    double lo, hi;
};

Interval project(const Vec2 corners[4], Vec2 axis) {
    double lo = corners[0].dot(axis), hi = lo;
    for (int i = 1; i < 4; ++i) {
        double v = corners[i].dot(axis);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

}  // namespace

bool obb_intersects(const OrientedBox& a, const OrientedBox& b) {
    Vec2 ca[4], cb[4];
    a.corners(ca);
    b.corners(cb);
    double ha = a.center.heading, hb = b.center.heading;
    Vec2 axes[4] = {
        {std::cos(ha), std::sin(ha)},
        {-std::sin(ha), std::cos(ha)},
        {std::cos(hb), std::sin(hb)},
        {-std::sin(hb), std::cos(hb)},
    };
    for (const Vec2& axis : axes) {
        Interval ia = project(ca, axis), ib = project(cb, axis);
        if (ia.hi < ib.lo || ib.hi < ia.lo) return false;
    }
    return true;
}

bool segment_intersects_box(Vec2 p, Vec2 q, const OrientedBox& box) {
    // Work in the box frame; then clip against the axis-aligned half-extents
    // (Liang-Barsky with inclusive boundaries).
    Vec2 bp = to_body_frame(p, box.center);
    Vec2 bq = to_body_frame(q, box.center);
    double hx = 0.5 * box.length, hy = 0.5 * box.width;
    Vec2 d = bq - bp;
    double t0 = 0.0, t1 = 1.0;
    double pvals[4] = {-d.x, d.x, -d.y, d.y};
    double qvals[4] = {bp.x + hx, hx - bp.x, bp.y + hy, hy - bp.y};
    for (int i = 0; i < 4; ++i) {
        if (pvals[i] == 0.0) {
            if (qvals[i] < 0.0) return false;  // parallel and outside
        } else {
            double r = qvals[i] / pvals[i];
            if (pvals[i] < 0.0) {
                if (r > t1) return false;
                t0 = std::max(t0, r);
            } else {
                if (r < t0) return false;
                t1 = std::min(t1, r);
            }
        }
    }
    return t0 <= t1;
}

bool obb_polyline_intersects(const OrientedBox& box, const Polyline& line) {
    for (size_t i = 0; i + 1 < line.points.size(); ++i) {
        if (segment_intersects_box(line.points[i], line.points[i + 1], box)) return true;
    }
    return false;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = ab.dot(ab);
    if (len2 <= 0.0) return (p - a).norm();
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

double point_polyline_distance(Vec2 p, const Polyline& line) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < line.points.size(); ++i) {
        best = std::min(best, point_segment_distance(p, line.points[i], line.points[i + 1]));
    }
    return best;
}

std::vector<double> unwrap_headings(std::span<const double> headings) {
    if (headings.empty()) throw std::invalid_argument("unwrap_headings: empty input");
    std::vector<double> out(headings.size());
    out[0] = headings[0];
    double two_pi = 2.0 * M_PI;
    long k = 0;  // accumulated shift in whole turns, so out - in stays an exact multiple
    for (size_t i = 1; i < headings.size(); ++i) {
        double delta = headings[i] - headings[i - 1];
        long step = -long(std::lround(delta / two_pi));
        double wrapped = delta + double(step) * two_pi;
        if (wrapped <= -M_PI) {
            step += 1;
            wrapped += two_pi;
        } else if (wrapped > M_PI) {
            step -= 1;
        }
        k += step;
        out[i] = headings[i] + double(k) * two_pi;
    }
    return out;
}

std::vector<double> headings_from_displacements(std::span<const Vec2> points) {
    // heading at i follows the step leaving i; stationary steps reuse the
    // previous heading, and a stationary prefix copies the first real one
    std::vector<double> out(points.size(), 0.0);
    if (points.empty()) return out;
    double cur = 0.0;
    size_t first_motion = points.size();
    for (size_t i = 0; i + 1 < points.size(); ++i) {
        Vec2 d = points[i + 1] - points[i];
        if (d.norm() > 1e-12) {
            cur = std::atan2(d.y, d.x);
            if (first_motion == points.size()) first_motion = i;
        }
        out[i] = cur;
    }
    out[points.size() - 1] = cur;
    if (first_motion < points.size()) {
        for (size_t j = 0; j < first_motion; ++j) out[j] = out[first_motion];
    }
    return out;
}

KinematicProfile kinematic_profile(std::span<const Pose2> poses, double dt) {
    if (poses.size() < 3) throw std::invalid_argument("kinematic_profile: need at least 3 poses");
    if (!(dt > 0.0)) throw std::invalid_argument("kinematic_profile: dt must be positive");
    size_t n = poses.size();

    std::vector<double> speeds(n - 1);
    for (size_t t = 1; t < n; ++t) {
        speeds[t - 1] = (poses[t].position() - poses[t - 1].position()).norm() / dt;
    }
    std::vector<double> headings(n);
    for (size_t i = 0; i < n; ++i) headings[i] = poses[i].heading;
    std::vector<double> unwrapped = unwrap_headings(headings);
    std::vector<double> omega(n - 1);
    for (size_t t = 1; t < n; ++t) omega[t - 1] = (unwrapped[t] - unwrapped[t - 1]) / dt;

    KinematicProfile prof;
    prof.dt = dt;
    size_t m = n - 2;  // common right-aligned length
    prof.speeds.resize(m);
    prof.long_accels.resize(m);
    prof.ang_vels.resize(m);
    prof.lat_accels.resize(m);
    for (size_t i = 0; i < m; ++i) {
        double s = speeds[i + 1];
        double w = omega[i + 1];
        prof.speeds[i] = s;
        prof.long_accels[i] = (speeds[i + 1] - speeds[i]) / dt;
        prof.ang_vels[i] = w;
        prof.lat_accels[i] = s * w;
    }
    return prof;
}

}  // namespace advgen
