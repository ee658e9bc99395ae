// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvgate/fault_model.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace nvgate {

namespace {

struct ModeName {
    SimFaultMode mode;
    std::string_view name;
};

constexpr std::array<ModeName, kSimFaultModeCount> kModeNames{{
    {SimFaultMode::None, "none"},
    {SimFaultMode::ConnectionRefused, "connection_refused"},
    {SimFaultMode::TimeoutAwaitingHeaders, "timeout_awaiting_headers"},
    {SimFaultMode::TimeoutReadingBody, "timeout_reading_body"},
    {SimFaultMode::ConnectionResetByPeer, "connection_reset_by_peer"},
    {SimFaultMode::ServerClosedIdleConnection, "server_closed_idle_connection"},
    {SimFaultMode::Eof, "eof"},
    {SimFaultMode::UnexpectedEof, "unexpected_eof"},
    {SimFaultMode::MalformedHttpResponse, "malformed_http_response"},
    {SimFaultMode::InvalidChunkLength, "invalid_chunk_length"},
    {SimFaultMode::InvalidChecksum, "invalid_checksum"},
    {SimFaultMode::CorruptResponseBody, "corrupt_response_body"},
    {SimFaultMode::TruncateJsonBody, "truncate_json_body"},
    {SimFaultMode::Crash, "crash"},
    {SimFaultMode::StaleHead, "stale_head"},
}};

}  // namespace

std::string_view to_string(SimFaultMode mode) {
    for (const auto& entry : kModeNames) {
        if (entry.mode == mode) {
            return entry.name;
        }
    }
    return "unknown";
}

std::optional<SimFaultMode> sim_fault_mode_from_string(std::string_view name) {
    for (const auto& entry : kModeNames) {
        if (entry.name == name) {
            return entry.mode;
        }
    }
    return std::nullopt;
}

void SimNodeFaultConfig::validate() const {
    for (const auto& [mode, p] : mode_probability) {
        if (p < 0.0 || p > 1.0) {
            throw std::invalid_argument("fault probability out of [0,1] for mode " +
                                        std::string(to_string(mode)));
        }
    }
    if (crash_recovery_window_s < 0.0 || crash_catchup_delay_s < 0.0 || stale_window_s < 0.0 ||
        stall_ms < 0.0) {
        throw std::invalid_argument("fault config windows must be non-negative");
    }
}

nlohmann::json SimNodeFaultConfig::to_json() const {
    nlohmann::json probs = nlohmann::json::object();
    for (const auto& [mode, p] : mode_probability) {
        probs[std::string(to_string(mode))] = p;
    }
    return nlohmann::json{
        {"mode_probability", probs},
        {"crash_recovery_window_s", crash_recovery_window_s},
        {"crash_catchup_delay_s", crash_catchup_delay_s},
        {"stale_window_s", stale_window_s},
        {"stall_ms", stall_ms},
        {"seed", seed},
    };
}

SimNodeFaultConfig SimNodeFaultConfig::from_json(const nlohmann::json& j) {
    SimNodeFaultConfig cfg;
    if (j.contains("mode_probability")) {
        for (const auto& [name, value] : j.at("mode_probability").items()) {
            auto mode = sim_fault_mode_from_string(name);
            if (!mode.has_value()) {
                throw std::invalid_argument("unknown fault mode: " + name);
            }
            cfg.mode_probability[*mode] = value.get<double>();
        }
    }
    cfg.crash_recovery_window_s = j.value("crash_recovery_window_s", cfg.crash_recovery_window_s);
    cfg.crash_catchup_delay_s = j.value("crash_catchup_delay_s", cfg.crash_catchup_delay_s);
    cfg.stale_window_s = j.value("stale_window_s", cfg.stale_window_s);
    cfg.stall_ms = j.value("stall_ms", cfg.stall_ms);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

}  // namespace nvgate
