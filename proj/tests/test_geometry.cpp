#include <doctest.h>

#include <cmath>

#include "advgen/common.hpp"
#include "advgen/geometry.hpp"
#include "oracles.hpp"

using namespace advgen;

namespace {
OrientedBox box(double x, double y, double heading, double length, double width) {
    return {{x, y, heading}, length, width};
}
}  // namespace

TEST_CASE("obb_intersects basic cases") {
    OrientedBox a = box(0, 0, 0, 4, 2);
    CHECK(obb_intersects(a, a));                          // identical boxes
    CHECK_FALSE(obb_intersects(a, box(10, 0, 0, 4, 2)));  // 6 m gap
    CHECK(obb_intersects(a, box(3.9, 0, 0, 4, 2)));       // half-lengths sum 4 > 3.9
    CHECK(obb_intersects(a, box(4.0, 0, 0, 4, 2)));       // touching counts
}

TEST_CASE("obb_intersects is symmetric and matches the polygon oracle") {
    Rng rng(1234);
    int disagreements = 0;
    for (int i = 0; i < 10000; ++i) {
        OrientedBox a = box(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-M_PI, M_PI),
                            rng.uniform(0.5, 6.0), rng.uniform(0.5, 6.0));
        OrientedBox b = box(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-M_PI, M_PI),
                            rng.uniform(0.5, 6.0), rng.uniform(0.5, 6.0));
        bool got = obb_intersects(a, b);
        CHECK(got == obb_intersects(b, a));
        if (got != oracle::polygons_intersect(a, b)) ++disagreements;
    }
    CHECK(disagreements == 0);
}

TEST_CASE("obb_intersects invariant under rigid transforms") {
    Rng rng(77);
    for (int i = 0; i < 2000; ++i) {
        OrientedBox a = box(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-M_PI, M_PI),
                            rng.uniform(0.5, 6.0), rng.uniform(0.5, 6.0));
        OrientedBox b = box(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-M_PI, M_PI),
                            rng.uniform(0.5, 6.0), rng.uniform(0.5, 6.0));
        // skip near-touching configurations where a rotation can flip the
        // boolean within float noise
        OrientedBox a_grown{a.center, a.length + 2e-6, a.width + 2e-6};
        OrientedBox a_shrunk{a.center, std::max(a.length - 2e-6, 1e-9),
                             std::max(a.width - 2e-6, 1e-9)};
        if (obb_intersects(a_grown, b) != obb_intersects(a_shrunk, b)) continue;

        double angle = rng.uniform(-M_PI, M_PI);
        Vec2 shift{rng.uniform(-50, 50), rng.uniform(-50, 50)};
        OrientedBox ta{transform_pose(a.center, angle, shift), a.length, a.width};
        OrientedBox tb{transform_pose(b.center, angle, shift), b.length, b.width};
        CHECK(obb_intersects(ta, tb) == obb_intersects(a, b));
    }
}

TEST_CASE("obb_polyline_intersects basic and oracle cases") {
    OrientedBox a = box(0, 0, 0, 4, 2);
    Polyline through{{{-10, 0}, {10, 0}}, true};
    Polyline above{{{-10, 5}, {10, 5}}, true};
    CHECK(obb_polyline_intersects(a, through));
    CHECK_FALSE(obb_polyline_intersects(a, above));

    // rotated box against a grazing segment: defer to the geometric oracle
    OrientedBox r = box(0, 0, M_PI / 4.0, 4, 2);
    Polyline graze{{{0, 2.1}, {5, 2.1}}, true};
    bool expected = oracle::segment_hits_polygon({0, 2.1}, {5, 2.1}, r);
    CHECK(obb_polyline_intersects(r, graze) == expected);
    CHECK(expected);  // the top corner reaches y = 3/sqrt(2) > 2.1

    // randomized agreement with the oracle, including segments inside the box
    Rng rng(99);
    int disagreements = 0;
    for (int i = 0; i < 5000; ++i) {
        OrientedBox bx = box(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-M_PI, M_PI),
                             rng.uniform(0.5, 6.0), rng.uniform(0.5, 6.0));
        Vec2 p{rng.uniform(-8, 8), rng.uniform(-8, 8)};
        Vec2 q{rng.uniform(-8, 8), rng.uniform(-8, 8)};
        if (segment_intersects_box(p, q, bx) != oracle::segment_hits_polygon(p, q, bx))
            ++disagreements;
    }
    CHECK(disagreements == 0);
}

TEST_CASE("unwrap_headings") {
    SUBCASE("identity when already continuous") {
        std::vector<double> h{0.0, 0.1, 0.2};
        CHECK(unwrap_headings(h) == h);
    }
    SUBCASE("2pi shift across the wrap") {
        std::vector<double> h{3.1, -3.1};
        auto u = unwrap_headings(h);
        CHECK(u[0] == doctest::Approx(3.1));
        CHECK(u[1] == doctest::Approx(3.1831853071795862).epsilon(1e-12));
    }
    SUBCASE("consecutive differences land in (-pi, pi]") {
        std::vector<double> h{0.0, M_PI, -M_PI + 0.01};
        auto u = unwrap_headings(h);
        for (size_t i = 1; i < u.size(); ++i) {
            double d = u[i] - u[i - 1];
            CHECK(d > -M_PI);
            CHECK(d <= M_PI + 1e-12);
        }
    }
    SUBCASE("output minus input is an exact multiple of 2pi") {
        Rng rng(5);
        std::vector<double> h;
        for (int i = 0; i < 200; ++i) h.push_back(rng.uniform(-20.0, 20.0));
        auto u = unwrap_headings(h);
        for (size_t i = 0; i < h.size(); ++i) {
            double k = (u[i] - h[i]) / (2.0 * M_PI);
            CHECK(std::fabs(k - std::round(k)) < 1e-9);
        }
    }
}

TEST_CASE("kinematic_profile") {
    SUBCASE("straight constant-speed motion") {
        std::vector<Pose2> poses;
        for (int i = 0; i < 12; ++i) poses.push_back({double(i), 0.0, 0.0});
        KinematicProfile prof = kinematic_profile(poses, 0.1);
        CHECK(prof.speeds.size() == poses.size() - 2);
        for (double s : prof.speeds) CHECK(s == doctest::Approx(10.0).epsilon(1e-12));
        for (double a : prof.long_accels) CHECK(std::fabs(a) < 1e-9);
        for (double w : prof.ang_vels) CHECK(std::fabs(w) < 1e-9);
        for (double a : prof.lat_accels) CHECK(std::fabs(a) < 1e-9);
    }
    SUBCASE("constant heading increments give constant yaw rate") {
        std::vector<Pose2> poses;
        double h = 0.0;
        Vec2 p{0, 0};
        for (int i = 0; i < 15; ++i) {
            poses.push_back({p.x, p.y, h});
            p = p + Vec2{std::cos(h), std::sin(h)};
            h += 0.08;
        }
        KinematicProfile prof = kinematic_profile(poses, 0.1);
        for (double w : prof.ang_vels) CHECK(w == doctest::Approx(0.8).epsilon(1e-9));
        // a_lat = s * omega with s = 10 m/s
        for (double a : prof.lat_accels) CHECK(a == doctest::Approx(8.0).epsilon(1e-9));
    }
    SUBCASE("too short to differentiate") {
        std::vector<Pose2> poses{{0, 0, 0}, {1, 0, 0}};
        CHECK_THROWS_AS(kinematic_profile(poses, 0.1), std::invalid_argument);
    }
}

TEST_CASE("headings_from_displacements reuses previous heading when stopped") {
    std::vector<Vec2> pts{{0, 0}, {1, 0}, {1, 0}, {1, 1}};
    auto h = headings_from_displacements(pts);
    CHECK(h[0] == doctest::Approx(0.0));
    CHECK(h[1] == doctest::Approx(0.0));  // stationary step keeps heading
    CHECK(h[2] == doctest::Approx(M_PI / 2));
    CHECK(h[3] == doctest::Approx(M_PI / 2));
}
