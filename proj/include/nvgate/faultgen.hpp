// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvgate/fault_model.hpp"

namespace nvgate {

// One observed system-call failure: (syscall, errno) identifies the error,
// f is the observed failure frequency in [0,1].
struct SyscallErrorTuple {
    std::string syscall;
    std::string err;
    double frequency = 0.0;

    bool same_key(const SyscallErrorTuple& other) const {
        return syscall == other.syscall && err == other.err;
    }
};

bool operator==(const SyscallErrorTuple& a, const SyscallErrorTuple& b);

// The per-client error profile recorded during fault-free monitoring.
struct ErrorProfile {
    std::string client_label;
    std::vector<SyscallErrorTuple> tuples;
};

// Profile file format: one `syscall,errno,frequency` tuple per line, UTF-8,
// `#` comments and blank lines allowed. Duplicate (syscall, errno) keys in
// one file, unparsable lines, and frequencies outside [0,1] throw
// std::runtime_error naming the offending line.
ErrorProfile load_profile(std::istream& in, std::string client_label);
ErrorProfile load_profile_file(const std::string& path, std::string client_label = {});

// Merges profiles into a single tuple set: keys are unioned; a key observed
// in more than one profile keeps the minimum frequency; singletons keep
// their value. Result sorted by descending frequency (ties by key) so the
// top-n strategy construction is deterministic.
std::vector<SyscallErrorTuple> aggregate(std::span<const ErrorProfile> profiles);

// Strategy k holds the top-k tuples of the aggregated set, amplified.
// Strategies nest strictly: tuples(k) is a prefix of tuples(k+1).
struct FaultInjectionStrategy {
    int index = 0;  // 1-based
    std::vector<SyscallErrorTuple> tuples;
};

enum class Amplification {
    Multiplicative,  // f -> min(1, f * (1 + factor))
    Additive,        // f -> min(1, f + factor)
};

// Builds `count` nested strategies from an aggregated set sorted descending
// by frequency. Requires count <= |aggregated|; throws otherwise. The
// default 5% multiplicative amplification preserves relative error
// frequencies while making sporadic errors a little more likely.
std::vector<FaultInjectionStrategy> synthesize(std::span<const SyscallErrorTuple> aggregated,
                                               int count, double amplification = 0.05,
                                               Amplification mode = Amplification::Multiplicative);

nlohmann::json strategies_to_json(std::span<const FaultInjectionStrategy> strategies);
std::vector<FaultInjectionStrategy> strategies_from_json(const nlohmann::json& j);

// Maps (syscall, errno) classes to the simulated fault mode they surface
// as. Rules are matched in order; "*" matches any value. `scale` converts
// an amplified frequency into a firing probability contribution.
struct BehaviorRule {
    std::string syscall_pattern;
    std::string err_pattern;
    SimFaultMode mode = SimFaultMode::None;
    double scale = 1.0;
};

struct FaultBehaviorMap {
    std::vector<BehaviorRule> rules;
    // Stateful-fault parameters shared by every derived config.
    double crash_recovery_window_s = 10.0;
    double crash_catchup_delay_s = 2.0;
    double stale_window_s = 30.0;
    double stall_ms = 400.0;

    const BehaviorRule* match(const std::string& syscall, const std::string& err) const;

    nlohmann::json to_json() const;
    static FaultBehaviorMap from_json(const nlohmann::json& j);
    static FaultBehaviorMap load_file(const std::string& path);

    // The default map shipped with the harness: file-I/O errors surface as
    // body timeouts or truncated reads, socket accept/connect errors as
    // refused connections, recv/send errors as peer resets, memory
    // allocation errors as crashes, sync-path read errors as stale heads,
    // and a residual class as corrupted response bytes.
    static FaultBehaviorMap builtin_default();
};

// Converts one strategy into a per-node fault schedule: each tuple's
// amplified frequency, scaled by its matched rule, accumulates onto the
// rule's fault mode (clamped to 1). Throws std::runtime_error when a tuple
// matches no rule.
SimNodeFaultConfig strategy_to_simconfig(const FaultInjectionStrategy& strategy,
                                         const FaultBehaviorMap& map, uint64_t seed);

}  // namespace nvgate
