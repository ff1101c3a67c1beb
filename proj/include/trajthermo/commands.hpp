#pragma once

#include <string>
#include <vector>

#include "trajthermo/config.hpp"
#include "trajthermo/dilation.hpp"

namespace trajthermo {

struct VerifyCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass() const;
};

struct CommandOptions {
    bool execute = false;  // cmd_circuit: also run the exported circuit
    AncillaPolicy policy = AncillaPolicy::ReusedWithReset;
    unsigned threads = 0;  // 0 = auto
};

// Each command writes its files under cfg.out_dir and returns the paths.
std::vector<std::string> cmd_exact(const RunConfig& cfg);
std::vector<std::string> cmd_sample(const RunConfig& cfg, const CommandOptions& opts = {});
std::vector<std::string> cmd_circuit(const RunConfig& cfg, const CommandOptions& opts = {});

/// Runs the verification checks (central identity, trace preservation,
/// Z-identity, dilation round-trip). corrupt_for_test injects a broken
/// Kraus pair so the failure path itself is testable.
VerifyReport verify_checks(const RunConfig& cfg, bool corrupt_for_test = false);

/// verify_checks plus the JSON report file; returns 0 or 4.
int cmd_verify(const RunConfig& cfg);

/// Builds the biased dynamics for one s value of the config.
BiasedDynamics make_dynamics(const RunConfig& cfg, double s);

/// Filesystem-safe tag for an s value: "s2", "sm2", "s0.5".
std::string s_tag(double s);

}  // namespace trajthermo
