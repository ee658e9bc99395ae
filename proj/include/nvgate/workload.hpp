// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvgate/classifier.hpp"
#include "nvgate/types.hpp"

namespace nvgate {

enum class WorkloadKind { A, B };

std::string_view to_string(WorkloadKind kind);
std::optional<WorkloadKind> workload_kind_from_string(std::string_view name);

// Workload A: fixed-rate mixed queries sampled uniformly from the 21-method
// pool, exercising current and past chain state. Workload B: the identical
// latest-head query each time, for freshness measurement. Paper-scale
// defaults; desk-scale runs override count.
struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::B;
    uint64_t total_requests = 360'000;
    double interval_ms = 5.0;
    uint64_t seed = 1;
    std::string target;  // endpoint URL, informational for in-process runs
    uint64_t recent_window_blocks = 1000;
};

// The i-th request of a run (ids are 1-based and strictly increasing).
// Sampling draws from a per-request stream, so the schedule for a given
// (spec, id) pair never depends on what happened to earlier requests.
RpcRequest make_request(const WorkloadSpec& spec, uint64_t request_id, uint64_t head_hint);

struct VerdictRecord {
    uint64_t request_id = 0;
    double sent_at_ms = 0.0;
    std::string node_id;
    std::string method;
    AvailabilityVerdict verdict;
    std::optional<TransportErrorKind> error;
    double end_to_end_ms = 0.0;
};

std::string to_jsonl_line(const VerdictRecord& record);
VerdictRecord verdict_record_from_json(const nlohmann::json& j);

// Append-only measurement log, one record per issued request, ids strictly
// increasing.
class VerdictLog {
  public:
    void append(VerdictRecord record);
    const std::vector<VerdictRecord>& records() const { return records_; }
    size_t size() const { return records_.size(); }

    void write_jsonl(std::ostream& out) const;
    std::string dump_jsonl() const;
    static VerdictLog load_jsonl(std::istream& in);

  private:
    std::vector<VerdictRecord> records_;
};

// Per-node status step function: (receipt time, status) change points. The
// node holds each status until its next response arrives.
std::vector<std::pair<double, Status>> status_timeline(const VerdictLog& log,
                                                       const std::string& node_id);

struct MethodStats {
    uint64_t requests = 0;
    uint64_t errors = 0;  // any transport error or non-compliant body
};

struct Summary {
    uint64_t total = 0;
    double available = 0.0;
    double degraded = 0.0;
    double unavailable = 0.0;
    std::map<std::string, uint64_t> error_counts;
    std::map<std::string, MethodStats> per_method;

    nlohmann::json to_json() const;
};

// Rates partition: available + degraded + unavailable = 1. Throws on an
// empty log.
Summary summarize(const VerdictLog& log);

// A deployment under measurement: either one sub-node reached directly or a
// proxy front-end.
class WorkloadTarget {
  public:
    virtual ~WorkloadTarget() = default;
    struct Result {
        RpcExchange exchange;
        double end_to_end_ms = 0.0;
    };
    virtual Result send(const RpcRequest& req, double now_ms) = 0;
};

// Issues the whole schedule on virtual time: request i goes out exactly at
// start + (i-1)*interval regardless of how long earlier responses took.
// Every exchange is classified against the oracle head at receipt time and
// recorded; denial of service is a measurement, not an error.
VerdictLog run_workload(const WorkloadSpec& spec, WorkloadTarget& target, const ChainState& oracle,
                        const ClassifierConfig& config, double start_ms);

}  // namespace nvgate
