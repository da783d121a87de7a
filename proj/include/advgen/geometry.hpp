#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace advgen {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;  // radians

    Vec2 position() const { return {x, y}; }
};

struct OrientedBox {
    Pose2 center;
    double length = 0.0;  // extent along heading
    double width = 0.0;   // extent across heading

    // corners in CCW order
    void corners(Vec2 out[4]) const;
};

struct Polyline {
    std::vector<Vec2> points;  // >= 2, consecutive points distinct
    bool impassable = false;
};

// Timestamped pose/speed sequence for one agent; poses[0] is the state at
// the sequence start, samples are dt apart.
struct Trajectory {
    std::vector<Pose2> poses;
    std::vector<double> speeds;  // same length as poses
    double dt = 0.1;

    int steps() const { return int(poses.size()) - 1; }
};

// Per-step kinematic series derived from a pose sequence. All series share
// one length: with n input poses they cover t = 2..n-1 (speed needs one
// backward difference, acceleration two; shorter series are right-aligned).
struct KinematicProfile {
    std::vector<double> speeds;
    std::vector<double> long_accels;
    std::vector<double> ang_vels;
    std::vector<double> lat_accels;
    double dt = 0.1;
};

// Separating-axis test over the 4 edge normals; touching counts as
// intersecting.
bool obb_intersects(const OrientedBox& a, const OrientedBox& b);

// True iff the segment [p, q] touches or crosses the box, including the
// segment lying fully inside.
bool segment_intersects_box(Vec2 p, Vec2 q, const OrientedBox& box);

bool obb_polyline_intersects(const OrientedBox& box, const Polyline& line);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
double point_polyline_distance(Vec2 p, const Polyline& line);

// Shift each heading by a multiple of 2*pi so consecutive differences land
// in (-pi, pi].
std::vector<double> unwrap_headings(std::span<const double> headings);

// Headings from displacement atan2; zero-displacement steps reuse the
// previous heading.
std::vector<double> headings_from_displacements(std::span<const Vec2> points);

// Requires >= 3 poses. Heading is taken from the stored pose headings.
KinematicProfile kinematic_profile(std::span<const Pose2> poses, double dt);

inline KinematicProfile kinematic_profile(const Trajectory& traj) {
    return kinematic_profile(std::span<const Pose2>(traj.poses), traj.dt);
}

// Rigid transform (rotation by angle, then translation); used by tests and
// the feature-invariance checks.
inline Pose2 transform_pose(const Pose2& p, double angle, Vec2 shift) {
    double c = std::cos(angle), s = std::sin(angle);
    return {c * p.x - s * p.y + shift.x, s * p.x + c * p.y + shift.y, p.heading + angle};
}

inline Vec2 rotate(Vec2 v, double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// World point expressed in the body frame of `frame`.
inline Vec2 to_body_frame(Vec2 world, const Pose2& frame) {
    return rotate(world - frame.position(), -frame.heading);
}

inline Vec2 to_world_frame(Vec2 body, const Pose2& frame) {
    return rotate(body, frame.heading) + frame.position();
}

}  // namespace advgen
