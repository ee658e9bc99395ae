// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvgate/workload.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nvgate/methods.hpp"
#include "nvgate/rng.hpp"

namespace nvgate {

std::string_view to_string(WorkloadKind kind) {
    return kind == WorkloadKind::A ? "A" : "B";
}

std::optional<WorkloadKind> workload_kind_from_string(std::string_view name) {
    if (name == "A" || name == "a") return WorkloadKind::A;
    if (name == "B" || name == "b") return WorkloadKind::B;
    return std::nullopt;
}

namespace {

std::string pseudo_hash(Rng& rng) {
    static const char digits[] = "0123456789abcdef";
    std::string out = "0x";
    for (int i = 0; i < 64; ++i) {
        out.push_back(digits[rng.next_below(16)]);
    }
    return out;
}

std::string pseudo_address(Rng& rng) {
    static const char digits[] = "0123456789abcdef";
    std::string out = "0x";
    for (int i = 0; i < 40; ++i) {
        out.push_back(digits[rng.next_below(16)]);
    }
    return out;
}

// Uniform block number over the recent window [head - w, head].
uint64_t recent_block(Rng& rng, uint64_t head, uint64_t window) {
    const uint64_t lo = head > window ? head - window : 0;
    return lo + rng.next_below(head - lo + 1);
}

nlohmann::json sample_params(const std::string& method, Rng& rng, uint64_t head, uint64_t window) {
    auto block_tag = [&] { return to_hex_quantity(recent_block(rng, head, window)); };
    if (method == "eth_blockNumber" || method == "eth_gasPrice") {
        return nlohmann::json::array();
    }
    if (method == "eth_estimateGas") {
        return nlohmann::json::array(
            {{{"from", pseudo_address(rng)}, {"to", pseudo_address(rng)}, {"value", "0x1"}}});
    }
    if (method == "eth_feeHistory") {
        return nlohmann::json::array({to_hex_quantity(4 + rng.next_below(12)), "latest",
                                      nlohmann::json::array()});
    }
    if (method == "eth_getBalance" || method == "eth_getTransactionCount") {
        return nlohmann::json::array({pseudo_address(rng), block_tag()});
    }
    if (method == "eth_getCode") {
        return nlohmann::json::array({pseudo_address(rng), block_tag()});
    }
    if (method == "eth_getStorageAt") {
        return nlohmann::json::array(
            {pseudo_address(rng), to_hex_quantity(rng.next_below(256)), block_tag()});
    }
    if (method == "eth_getBlockByHash") {
        return nlohmann::json::array({pseudo_hash(rng), false});
    }
    if (method == "eth_getBlockByNumber") {
        return nlohmann::json::array({block_tag(), false});
    }
    if (method == "eth_getBlockTransactionCountByHash" || method == "eth_getUncleCountByBlockHash") {
        return nlohmann::json::array({pseudo_hash(rng)});
    }
    if (method == "eth_getBlockTransactionCountByNumber" ||
        method == "eth_getUncleCountByBlockNumber") {
        return nlohmann::json::array({block_tag()});
    }
    if (method == "eth_getLogs") {
        uint64_t to = recent_block(rng, head, window);
        uint64_t from = to > 5 ? to - rng.next_below(5) : to;
        return nlohmann::json::array(
            {{{"fromBlock", to_hex_quantity(from)}, {"toBlock", to_hex_quantity(to)}}});
    }
    if (method == "eth_getTransactionByBlockHashAndIndex" ||
        method == "eth_getUncleByBlockHashAndIndex") {
        return nlohmann::json::array({pseudo_hash(rng), to_hex_quantity(rng.next_below(16))});
    }
    if (method == "eth_getTransactionByBlockNumberAndIndex" ||
        method == "eth_getUncleByBlockNumberAndIndex") {
        return nlohmann::json::array({block_tag(), to_hex_quantity(rng.next_below(16))});
    }
    if (method == "eth_getTransactionByHash" || method == "eth_getTransactionReceipt") {
        return nlohmann::json::array({pseudo_hash(rng)});
    }
    return nlohmann::json::array();
}

}  // namespace

RpcRequest make_request(const WorkloadSpec& spec, uint64_t request_id, uint64_t head_hint) {
    RpcRequest req;
    req.id = request_id;
    if (spec.kind == WorkloadKind::B) {
        req.method = std::string(kHeadQueryMethod);
        req.params_json = "[]";
        return req;
    }
    Rng rng(mix_seed(spec.seed, request_id));
    const auto pool = method_pool();
    req.method = std::string(pool[rng.next_below(pool.size())]);
    req.params_json = sample_params(req.method, rng, head_hint, spec.recent_window_blocks).dump();
    return req;
}

std::string to_jsonl_line(const VerdictRecord& record) {
    nlohmann::ordered_json j;
    j["id"] = record.request_id;
    j["at"] = record.sent_at_ms;
    j["node"] = record.node_id;
    j["method"] = record.method;
    j["status"] = std::string(to_string(record.verdict.status));
    j["t_r"] = record.verdict.t_r_ms;
    j["c_r"] = record.verdict.compliant;
    if (record.verdict.freshness.has_value()) {
        j["f_r"] = *record.verdict.freshness;
    } else {
        j["f_r"] = nullptr;
    }
    if (record.error.has_value()) {
        j["err"] = std::string(to_string(*record.error));
    } else {
        j["err"] = nullptr;
    }
    j["e2e"] = record.end_to_end_ms;
    return j.dump();
}

VerdictRecord verdict_record_from_json(const nlohmann::json& j) {
    VerdictRecord record;
    record.request_id = j.at("id").get<uint64_t>();
    record.sent_at_ms = j.at("at").get<double>();
    record.node_id = j.at("node").get<std::string>();
    record.method = j.at("method").get<std::string>();
    auto status = status_from_string(j.at("status").get<std::string>());
    if (!status.has_value()) {
        throw std::runtime_error("bad status in verdict record");
    }
    record.verdict.status = *status;
    record.verdict.t_r_ms = j.at("t_r").get<double>();
    record.verdict.compliant = j.at("c_r").get<bool>();
    if (!j.at("f_r").is_null()) {
        record.verdict.freshness = j.at("f_r").get<uint64_t>();
    }
    if (!j.at("err").is_null()) {
        record.error = transport_error_from_string(j.at("err").get<std::string>());
    }
    record.end_to_end_ms = j.value("e2e", record.verdict.t_r_ms);
    return record;
}

void VerdictLog::append(VerdictRecord record) {
    if (!records_.empty() && record.request_id <= records_.back().request_id) {
        throw std::invalid_argument("verdict log request ids must be strictly increasing");
    }
    records_.push_back(std::move(record));
}

void VerdictLog::write_jsonl(std::ostream& out) const {
    for (const auto& record : records_) {
        out << to_jsonl_line(record) << '\n';
    }
}

std::string VerdictLog::dump_jsonl() const {
    std::ostringstream out;
    write_jsonl(out);
    return out.str();
}

VerdictLog VerdictLog::load_jsonl(std::istream& in) {
    VerdictLog log;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        log.append(verdict_record_from_json(nlohmann::json::parse(line)));
    }
    return log;
}

std::vector<std::pair<double, Status>> status_timeline(const VerdictLog& log,
                                                       const std::string& node_id) {
    std::vector<std::pair<double, Status>> points;
    for (const auto& record : log.records()) {
        if (record.node_id == node_id) {
            points.emplace_back(record.sent_at_ms + record.end_to_end_ms, record.verdict.status);
        }
    }
    std::stable_sort(points.begin(), points.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    return points;
}

nlohmann::json Summary::to_json() const {
    nlohmann::json errors = nlohmann::json::object();
    for (const auto& [kind, count] : error_counts) {
        errors[kind] = count;
    }
    nlohmann::json methods = nlohmann::json::object();
    for (const auto& [method, stats] : per_method) {
        methods[method] = nlohmann::json{
            {"requests", stats.requests},
            {"errors", stats.errors},
            {"error_rate", stats.requests == 0
                               ? 0.0
                               : static_cast<double>(stats.errors) / static_cast<double>(stats.requests)},
        };
    }
    return nlohmann::json{
        {"total", total},         {"available", available}, {"degraded", degraded},
        {"unavailable", unavailable}, {"errors", std::move(errors)}, {"per_method", std::move(methods)},
    };
}

Summary summarize(const VerdictLog& log) {
    if (log.size() == 0) {
        throw std::invalid_argument("cannot summarize an empty verdict log");
    }
    Summary summary;
    summary.total = log.size();
    uint64_t available = 0;
    uint64_t degraded = 0;
    uint64_t unavailable = 0;
    for (const auto& record : log.records()) {
        switch (record.verdict.status) {
            case Status::Available: ++available; break;
            case Status::Degraded: ++degraded; break;
            case Status::Unavailable: ++unavailable; break;
        }
        if (record.error.has_value()) {
            summary.error_counts[std::string(to_string(*record.error))] += 1;
        }
        auto& stats = summary.per_method[record.method];
        stats.requests += 1;
        if (record.error.has_value() || !record.verdict.compliant) {
            stats.errors += 1;
        }
    }
    const double n = static_cast<double>(summary.total);
    summary.available = static_cast<double>(available) / n;
    summary.degraded = static_cast<double>(degraded) / n;
    summary.unavailable = static_cast<double>(unavailable) / n;
    return summary;
}

VerdictLog run_workload(const WorkloadSpec& spec, WorkloadTarget& target, const ChainState& oracle,
                        const ClassifierConfig& config, double start_ms) {
    if (spec.interval_ms <= 0.0) {
        throw std::invalid_argument("workload interval must be > 0");
    }
    VerdictLog log;
    for (uint64_t i = 1; i <= spec.total_requests; ++i) {
        const double now = start_ms + static_cast<double>(i - 1) * spec.interval_ms;
        const uint64_t head_hint = oracle.head_at(now);
        const RpcRequest req = make_request(spec, i, head_hint);
        WorkloadTarget::Result res = target.send(req, now);

        const double receipt = now + res.end_to_end_ms;
        const AvailabilityVerdict verdict = classify(res.exchange, oracle.head_at(receipt), config);

        VerdictRecord record;
        record.request_id = i;
        record.sent_at_ms = now;
        record.node_id = res.exchange.sub_node_id;
        record.method = req.method;
        record.verdict = verdict;
        if (res.exchange.error.has_value()) {
            record.error = res.exchange.error;
        } else if (!verdict.compliant) {
            record.error = diagnose_body_defect(*res.exchange.raw_response);
        }
        record.end_to_end_ms = res.end_to_end_ms;
        log.append(std::move(record));
    }
    return log;
}

}  // namespace nvgate
