// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvgate/classifier.hpp"
#include "nvgate/types.hpp"

namespace nvgate {

// Running availability score of one sub-node. "Successful" means an
// available-classified response: degraded responses trigger a retry, so
// counting them as successes would overstate the short-circuit chance.
struct SubNodeState {
    std::string id;
    std::string endpoint;
    uint64_t successes = 0;
    uint64_t attempts = 0;

    // Fresh sub-nodes score 1.0 so a cold proxy walks the registration
    // order and demotes failures as they happen.
    double score() const {
        return attempts == 0 ? 1.0 : static_cast<double>(successes) / static_cast<double>(attempts);
    }
};

// attempts += 1; successes += 1 iff the verdict is available.
void update_score(SubNodeState& state, const AvailabilityVerdict& verdict);

// Indices of `scores` in descending order; equal scores keep their relative
// (registration) order.
std::vector<size_t> stable_rank_order(std::span<const double> scores);

// Sub-node ids sorted by descending score, ties in registration order.
std::vector<std::string> rank(std::span<const SubNodeState> states);

// A saved non-available response, kept while the retry chain looks for a
// better one.
struct CandidateResponse {
    std::string sub_node_id;
    AvailabilityVerdict verdict;
    std::optional<std::string> raw;
    std::optional<TransportErrorKind> error;
    size_t dispatch_pos = 0;  // position in the ranking used for this request
};

// The comparison oracle over non-available candidates:
//   1. any compliant response beats every non-compliant one;
//   2. among compliant responses, minimal block lag wins, ties broken by
//      dispatch position (the historically healthier sub-node);
//   3. with no compliant response, the earliest body-bearing candidate wins;
//   4. otherwise the first transport error.
// Total over non-empty input; returns the winning index.
size_t select_best_degraded(std::span<const CandidateResponse> candidates);

// Transport used by the proxy to reach one sub-node.
class SubNodeChannel {
  public:
    virtual ~SubNodeChannel() = default;
    virtual const std::string& id() const = 0;
    virtual const std::string& endpoint() const = 0;
    // Sends one call with a per-attempt timeout. Implementations fill t_r
    // and sub_node_id.
    virtual RpcExchange exchange(const RpcRequest& req, double now_ms, double timeout_ms) = 0;
};

struct ProxyConfig {
    ClassifierConfig classifier;
    // 0 means "use the timeliness bound T" for each attempt.
    double attempt_timeout_ms = 0.0;
    // 0 means cumulative scores over the whole run; otherwise only the last
    // N attempts per sub-node count.
    size_t score_window = 0;

    double effective_attempt_timeout() const {
        return attempt_timeout_ms > 0.0 ? attempt_timeout_ms : classifier.timeliness_ms;
    }
};

struct AttemptTrace {
    std::string sub_node_id;
    Status status = Status::Unavailable;
    double t_r_ms = 0.0;
};

// Result of one proxied request. `response` is the selected exchange with
// its own per-attempt t_r; end-to-end latency accumulates the whole retry
// chain. When every sub-node denied the request, `exhausted_denial` is set
// and the response carries the first transport error.
struct ProxyOutcome {
    RpcExchange response;
    AvailabilityVerdict verdict;
    double end_to_end_ms = 0.0;
    std::vector<AttemptTrace> attempts;
    bool exhausted_denial = false;
};

// Standard error body returned to clients when no sub-node produced usable
// bytes.
std::string denial_body(const RpcRequest& req);

// The dispatch core. Thread-safe: score state sits behind one mutex, the
// retry chain of a single request is sequential.
class ProxyCore {
  public:
    ProxyCore(ProxyConfig config, std::vector<std::shared_ptr<SubNodeChannel>> channels,
              std::function<uint64_t(double now_ms)> oracle_head);

    // Routes one request through the ranking with fail-retry. The oracle
    // head is read once and reused across the request's retries.
    ProxyOutcome handle_request(const RpcRequest& req, double now_ms);

    std::vector<SubNodeState> states() const;
    std::vector<std::string> current_ranking() const;
    nlohmann::json admin_snapshot() const;

    const ProxyConfig& config() const { return config_; }

  private:
    void apply_score(size_t channel_index, const AvailabilityVerdict& verdict);

    ProxyConfig config_;
    std::vector<std::shared_ptr<SubNodeChannel>> channels_;
    std::function<uint64_t(double)> oracle_head_;

    mutable std::mutex mu_;
    std::vector<SubNodeState> states_;
    std::vector<std::deque<bool>> windows_;  // used when score_window > 0
};

}  // namespace nvgate
