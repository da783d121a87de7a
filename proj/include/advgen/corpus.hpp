#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advgen/rewards.hpp"
#include "advgen/scenario.hpp"

namespace advgen {

struct CorpusConfig {
    int min_lanes = 2;
    int max_lanes = 4;
    double lane_width = 3.5;
    double dt = 0.1;
    int history_steps = 10;
    int future_steps = 80;
    double min_speed = 6.0;   // m/s, initial cruise range
    double max_speed = 12.0;
    double arc_fraction = 0.5;   // share of curved roads
    double min_radius = 400.0;   // m; gentle enough that chord goals stay on-road
    double max_radius = 900.0;
    int max_background = 3;
    double accel_noise = 0.15;  // m/s^2, seeded per-step jitter
};

// Deterministic in (seed, n, config). Every scenario carries one ego and
// one adversary driven by lane-keeping + IDM-style controllers; all logged
// trajectories are map-feasible.
std::vector<Scenario> generate_corpus(uint64_t seed, int n, const CorpusConfig& cfg);

// Scenario files plus a manifest (ids, per-scenario seeds, file names).
void save_corpus(const std::vector<Scenario>& corpus, uint64_t seed, const std::string& dir);
std::vector<Scenario> load_corpus(const std::string& manifest_path);

}  // namespace advgen
