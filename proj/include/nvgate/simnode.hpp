// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvgate/fault_model.hpp"
#include "nvgate/types.hpp"

namespace nvgate {

// A client persona: baseline latency plus per-mode susceptibility
// multipliers. Susceptibility scales the configured firing probability, so
// the same injected strategy surfaces differently on each persona (one
// corrupts bodies, one crashes, one loses sync). Absent modes default to 1.
struct SimNodeProfile {
    std::string label;
    double latency_min_ms = 2.0;
    double latency_max_ms = 40.0;
    std::map<SimFaultMode, double> susceptibility;
    double crash_window_scale = 1.0;

    double susceptibility_for(SimFaultMode mode) const {
        auto it = susceptibility.find(mode);
        return it == susceptibility.end() ? 1.0 : it->second;
    }

    nlohmann::json to_json() const;
    static SimNodeProfile from_json(const nlohmann::json& j);
};

// Loads a persona set from a JSON document {"personas": [...]}; comments
// allowed in the file.
std::vector<SimNodeProfile> load_personas_file(const std::string& path);

// The outcome of serving one request, before any transport semantics are
// applied. Stall kinds hold the connection open past the caller's budget;
// the channel or server layer converts them into the matching timeout.
struct ServeResult {
    enum class Kind {
        Body,          // body holds a complete JSON-RPC response
        Refuse,        // connection denied
        StallHeaders,  // no bytes until the caller gives up
        StallBody,     // headers sent, body never completes
        Reset,         // peer reset mid-exchange
        Eof,           // clean close before any response byte
        UnexpectedEof, // close partway through the body
        MalformedHttp, // unparsable response preamble
        BadChunk,      // corrupt chunked framing
        BadChecksum,   // compressed payload fails its checksum
        IdleClose,     // server dropped the idle connection
    };

    Kind kind = Kind::Body;
    std::string body;
    double latency_ms = 0.0;
    uint64_t local_head = 0;
};

// Deterministic response content for the 21-method pool: values derive from
// (method, params, head) so repeated queries reproduce. Unknown methods get
// a standard method-not-found error object, which is a compliant response.
std::string build_response_body(const RpcRequest& req, uint64_t head);

// A simulated Ethereum-like sub-node. All methods are thread-safe; the
// chain/crash state is a single mutex-guarded cell. Behavior is a pure
// function of (profile, fault config, request sequence, timestamps).
class SimNodeCore {
  public:
    SimNodeCore(std::string id, SimNodeProfile profile, std::shared_ptr<const ChainState> chain,
                SimNodeFaultConfig fault_config);

    const std::string& id() const { return id_; }
    const SimNodeProfile& profile() const { return profile_; }

    void load_fault_config(SimNodeFaultConfig config);

    ServeResult serve(const RpcRequest& req, double now_ms);

    // Local head: tracks the global chain unless frozen by a crash or a
    // stale-sync episode.
    uint64_t local_head(double now_ms) const;
    uint64_t global_head(double now_ms) const { return chain_->head_at(now_ms); }

    bool crashed(double now_ms) const;
    void crash(double now_ms, double duration_s);
    void restore(double now_ms);

    // Request ids this node was contacted with, in order. Refused requests
    // are journaled too: the contact happened.
    std::vector<uint64_t> journal() const;
    uint64_t requests_served() const;

  private:
    bool frozen_locked(double now_ms) const;
    bool crashed_locked(double now_ms) const;
    uint64_t local_head_locked(double now_ms) const;
    void begin_freeze_locked(double now_ms, double until_ms);
    SimFaultMode draw_mode_locked(double u) const;

    std::string id_;
    SimNodeProfile profile_;
    std::shared_ptr<const ChainState> chain_;
    SimNodeFaultConfig config_;

    mutable std::mutex mu_;
    uint64_t seq_ = 0;
    double crash_start_ms_ = 0.0;
    double crash_until_ms_ = -1.0;
    double freeze_start_ms_ = 0.0;
    double freeze_until_ms_ = -1.0;
    uint64_t frozen_head_ = 0;
    std::vector<uint64_t> journal_;
};

}  // namespace nvgate
