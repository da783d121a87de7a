#pragma once

#include <string>
#include <vector>

#include "advgen/geometry.hpp"

namespace advgen {

enum class AgentRole { ego, adversary, background };

std::string role_name(AgentRole role);
AgentRole role_from_name(const std::string& name);

struct AgentRecord {
    int id = 0;
    AgentRole role = AgentRole::background;
    double length = 4.8;
    double width = 2.0;
    Trajectory logged;  // full horizon: history_steps + future_steps + 1 samples

    OrientedBox box_at(int index) const {
        int n = int(logged.poses.size());
        if (n == 0) return {};
        int i = index < 0 ? 0 : (index >= n ? n - 1 : index);
        return {logged.poses[i], length, width};
    }
};

struct MapModel {
    std::vector<Polyline> polylines;  // centerlines (passable) + boundaries (impassable)
    double lane_width = 3.5;
};

struct Scenario {
    std::string id;
    MapModel map;
    std::vector<AgentRecord> agents;  // exactly one ego, exactly one adversary
    double dt = 0.1;
    int history_steps = 10;  // 1 s at 10 Hz
    int future_steps = 80;   // 8 s, leaving 1 s of history in the 9 s horizon

    int horizon_samples() const { return history_steps + future_steps + 1; }
    int current_index() const { return history_steps; }

    const AgentRecord& ego() const;
    const AgentRecord& adversary() const;
    std::vector<const AgentRecord*> background() const;

    // The logged future of an agent as a standalone trajectory whose
    // poses[0] is the agent's state at the current step.
    Trajectory future_of(const AgentRecord& agent) const;

    void validate() const;  // throws on role/shape violations
};

// Round-trips losslessly: numbers are serialized at full precision.
void save_scenario(const Scenario& s, const std::string& path);
Scenario load_scenario(const std::string& path);

struct FeatureConfig {
    int history_window = 10;   // steps of history per agent (includes current)
    double pos_scale = 30.0;   // meters
    double speed_scale = 15.0; // m/s

    int context_dim() const { return 2 * history_window * 4; }
    int goal_dim() const { return 6; }
    int input_dim() const { return context_dim() + goal_dim(); }
};

// Everything is expressed in the adversary's current body frame, so the
// vector is invariant under rigid transforms of the whole scenario.
std::vector<double> context_features(const Scenario& s, const FeatureConfig& cfg);

// Per-goal summary: goal position, range, bearing, lateral offset to the
// nearest centerline and clearance to the nearest impassable polyline.
std::vector<double> goal_features(const Scenario& s, Vec2 goal_body, const FeatureConfig& cfg);

}  // namespace advgen
