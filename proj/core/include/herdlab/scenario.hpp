#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "herdlab/control.hpp"
#include "herdlab/model.hpp"

namespace herdlab {

// Per-command experiment knobs; defaults are filled at parse time and echoed
// back by the serializer, so a round trip is exact.
struct ExperimentConfig {
    std::vector<int> N_list = {64, 128, 256, 512, 1024};
    int N_ref = 4096;
    int N_star = 2000;
    int replicas = 32;
    int inner_replicas = 16;
    int budget = 300;
    int grid_size = 9;
    double q = 1.0;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    double bank_scale = 0.0;  // 0 -> initial-law scale
    bool binary_export = false;
    int crn_replicas = 4;  // replicas per optimizer evaluation
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 1;
    SystemSpec spec;
    int control_pieces = 4;
    std::vector<double> h_init;  // optional d x ell block copied to every piece
    std::vector<double> g_bias_init;  // optional ell bias
    ExperimentConfig exp;

    ControlParams make_control() const;
};

// Strict parser: unknown keys are rejected by name, defaults are filled, and
// the resulting spec must pass validate_assumptions.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<memory>");

std::string serialize_scenario(const Scenario& s);  // canonical JSON
std::uint64_t scenario_hash(const Scenario& s);     // FNV-1a over the canonical form

}  // namespace herdlab
