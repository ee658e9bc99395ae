// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

namespace nvgate {

// Client-observable error taxonomy. Kinds cover both socket-level failures
// (refusal, resets, timeouts) and payload-level defects detected after a
// complete read (corrupted characters, truncated JSON).
enum class TransportErrorKind {
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
    InvalidCharacterInResponse,
    UnexpectedEndOfJson,
};

inline constexpr int kTransportErrorKindCount = 12;

std::string_view to_string(TransportErrorKind kind);
std::optional<TransportErrorKind> transport_error_from_string(std::string_view name);

// Socket-level kinds deny the caller a response body; payload-level kinds
// arrive attached to bytes and are judged by the compliance check instead.
bool denies_response(TransportErrorKind kind);

// One JSON-RPC 2.0 call. Ids are assigned sequentially by the workload
// generator so uniqueness within a run holds by construction.
struct RpcRequest {
    std::string jsonrpc = "2.0";
    std::string method;
    std::string params_json = "[]";  // serialized params array
    uint64_t id = 0;

    std::string dump() const;
    static std::optional<RpcRequest> parse(std::string_view raw);
};

bool operator==(const RpcRequest& a, const RpcRequest& b);

// One request/response pair: the unit of measurement. Exactly one of
// raw_response / error is set.
struct RpcExchange {
    RpcRequest request;
    std::optional<std::string> raw_response;
    std::optional<TransportErrorKind> error;
    double t_r_ms = 0.0;      // response latency
    double sent_at_ms = 0.0;  // send timestamp on the measurement clock
    std::string sub_node_id;  // empty for single-node deployments

    bool has_body() const { return raw_response.has_value(); }

    static RpcExchange with_body(RpcRequest req, std::string body, double t_r_ms, double sent_at_ms,
                                 std::string sub_node_id = {});
    static RpcExchange with_error(RpcRequest req, TransportErrorKind kind, double t_r_ms,
                                  double sent_at_ms, std::string sub_node_id = {});
};

// The simulated global chain. The head is a pure function of time, which
// makes it monotone by construction and safe to read from any thread.
class ChainState {
  public:
    ChainState(uint64_t base_head, double genesis_at_ms, double block_interval_ms)
        : base_head_(base_head), genesis_at_ms_(genesis_at_ms), block_interval_ms_(block_interval_ms) {
        if (block_interval_ms <= 0.0) {
            throw std::invalid_argument("block_interval must be > 0");
        }
    }

    uint64_t head_at(double now_ms) const {
        if (now_ms <= genesis_at_ms_) {
            return base_head_;
        }
        return base_head_ + static_cast<uint64_t>((now_ms - genesis_at_ms_) / block_interval_ms_);
    }

    uint64_t base_head() const { return base_head_; }
    double genesis_at_ms() const { return genesis_at_ms_; }
    double block_interval_ms() const { return block_interval_ms_; }

  private:
    uint64_t base_head_;
    double genesis_at_ms_;
    double block_interval_ms_;
};

// Default cadence: 150 blocks per 30 minutes.
inline constexpr double kDefaultBlockIntervalMs = 12'000.0;

// Operator-set bounds for Eq. classification.
struct ClassifierConfig {
    double timeliness_ms = 100.0;  // T
    uint64_t freshness_blocks = 2; // F
};

}  // namespace nvgate
