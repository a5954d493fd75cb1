#pragma once

#include <string>
#include <vector>

#include "herdlab/scenario.hpp"

namespace herdlab {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { Simulate, ChaosRates, FpCheck, Duality, Optimize, Gamma, Validate };

Command parse_command(const std::string& name);
std::string command_name(Command c);

struct RunManifest {
    std::string command;
    std::string scenario_name;
    std::string scenario_hash;  // hex
    std::uint64_t seed = 0;
    std::string version;
    std::string started_at;
    std::string finished_at;
    int threads = 1;
    std::vector<std::string> outputs;
    std::string error_type;  // empty on success
    std::string error_message;
};

// Executes one module driver, writes its CSV outputs under out_dir and the
// manifest last. On a module error the manifest records the failure before
// the exception propagates to the caller.
RunManifest run_command(Command cmd, const Scenario& scenario, const std::string& out_dir,
                        int threads = 1);

// herdlab <command> --scenario <path> --out <dir> [--seed <u64>] [--threads <n>]
// Exit codes: 0 success, 2 validation failure, 3 runtime blowup, 4 I/O error.
int run_cli(int argc, const char* const* argv);

int exit_code_for_current_exception();

}  // namespace herdlab
