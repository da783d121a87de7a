#pragma once

// Hand-built fixtures shared by tests; independent of the corpus generator.

#include <string>
#include <vector>

#include "advgen/scenario.hpp"

namespace fixtures {

using namespace advgen;

// Straight +x trajectory at constant speed.
inline Trajectory straight_trajectory(Pose2 start, double speed, int steps, double dt = 0.1) {
    Trajectory t;
    t.dt = dt;
    for (int i = 0; i <= steps; ++i) {
        t.poses.push_back({start.x + speed * dt * double(i) * std::cos(start.heading),
                           start.y + speed * dt * double(i) * std::sin(start.heading),
                           start.heading});
        t.speeds.push_back(speed);
    }
    return t;
}

// Two-lane straight road along +x with lane centers y = +-1.75, boundaries
// y = +-3.5; ego ahead in the left lane, adversary behind in the right lane.
inline Scenario straight_scenario(double ego_speed = 10.0, double adv_speed = 10.0,
                                  int n_background = 0) {
    Scenario s;
    s.id = "fixture-straight";
    s.dt = 0.1;
    s.history_steps = 10;
    s.future_steps = 80;
    s.map.lane_width = 3.5;

    auto line = [](double y, bool impassable) {
        Polyline pl;
        pl.impassable = impassable;
        for (int i = 0; i <= 150; ++i) pl.points.push_back({double(i) * 2.0 - 50.0, y});
        return pl;
    };
    s.map.polylines.push_back(line(1.75, false));
    s.map.polylines.push_back(line(-1.75, false));
    s.map.polylines.push_back(line(3.5, true));
    s.map.polylines.push_back(line(-3.5, true));

    int n = s.horizon_samples();
    AgentRecord ego;
    ego.id = 0;
    ego.role = AgentRole::ego;
    ego.logged = straight_trajectory({12.0, 1.75, 0.0}, ego_speed, n - 1, s.dt);
    AgentRecord adv;
    adv.id = 1;
    adv.role = AgentRole::adversary;
    adv.logged = straight_trajectory({0.0, -1.75, 0.0}, adv_speed, n - 1, s.dt);
    s.agents.push_back(std::move(ego));
    s.agents.push_back(std::move(adv));

    for (int b = 0; b < n_background; ++b) {
        AgentRecord bg;
        bg.id = 2 + b;
        bg.role = AgentRole::background;
        bg.logged.dt = s.dt;
        Pose2 pose{140.0 + 8.0 * double(b), 1.75, 0.0};
        bg.logged.poses.assign(n, pose);
        bg.logged.speeds.assign(n, 0.0);
        s.agents.push_back(std::move(bg));
    }
    s.validate();
    return s;
}

// Rigid transform of the whole scenario: agents and map together.
inline Scenario transform_scenario(const Scenario& s, double angle, Vec2 shift) {
    Scenario out = s;
    for (auto& agent : out.agents) {
        for (auto& p : agent.logged.poses) p = transform_pose(p, angle, shift);
    }
    for (auto& pl : out.map.polylines) {
        for (auto& p : pl.points) p = rotate(p, angle) + shift;
    }
    return out;
}

}  // namespace fixtures
