// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>

#include <nlohmann/json.hpp>

namespace nvgate {

// Observable misbehaviors a simulated node can be driven into. The first
// twelve mirror the client-side error taxonomy; CorruptResponseBody and
// TruncateJsonBody damage the payload while keeping the transport intact;
// Crash and StaleHead are stateful: a crash refuses connections and freezes
// chain sync for a recovery window, a stale episode freezes sync only.
enum class SimFaultMode {
    None,
    ConnectionRefused,
    TimeoutAwaitingHeaders,
    TimeoutReadingBody,
    ConnectionResetByPeer,
    ServerClosedIdleConnection,
    Eof,
    UnexpectedEof,
    MalformedHttpResponse,
    InvalidChunkLength,
    InvalidChecksum,
    CorruptResponseBody,
    TruncateJsonBody,
    Crash,
    StaleHead,
};

inline constexpr int kSimFaultModeCount = 15;

std::string_view to_string(SimFaultMode mode);
std::optional<SimFaultMode> sim_fault_mode_from_string(std::string_view name);

// Per-node fault schedule parameters. Fully deterministic: the fault fired
// for request k depends only on (seed, k) and the mode probabilities, so two
// runs over the same request sequence produce identical behavior.
struct SimNodeFaultConfig {
    std::map<SimFaultMode, double> mode_probability;
    double crash_recovery_window_s = 10.0;
    double crash_catchup_delay_s = 2.0;
    double stale_window_s = 30.0;
    double stall_ms = 400.0;  // how long timeout faults hold the socket open
    uint64_t seed = 0;

    double probability(SimFaultMode mode) const {
        auto it = mode_probability.find(mode);
        return it == mode_probability.end() ? 0.0 : it->second;
    }

    // Throws std::invalid_argument when a probability leaves [0,1] or a
    // window is negative.
    void validate() const;

    nlohmann::json to_json() const;
    static SimNodeFaultConfig from_json(const nlohmann::json& j);
};

}  // namespace nvgate
