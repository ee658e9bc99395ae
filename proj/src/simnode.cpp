// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvgate/simnode.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <stdexcept>

#include "nvgate/methods.hpp"
#include "nvgate/rng.hpp"

namespace nvgate {

nlohmann::json SimNodeProfile::to_json() const {
    nlohmann::json susc = nlohmann::json::object();
    for (const auto& [mode, s] : susceptibility) {
        susc[std::string(to_string(mode))] = s;
    }
    return nlohmann::json{
        {"label", label},
        {"latency_min_ms", latency_min_ms},
        {"latency_max_ms", latency_max_ms},
        {"susceptibility", susc},
        {"crash_window_scale", crash_window_scale},
    };
}

SimNodeProfile SimNodeProfile::from_json(const nlohmann::json& j) {
    SimNodeProfile profile;
    profile.label = j.at("label").get<std::string>();
    profile.latency_min_ms = j.value("latency_min_ms", profile.latency_min_ms);
    profile.latency_max_ms = j.value("latency_max_ms", profile.latency_max_ms);
    if (profile.latency_min_ms <= 0.0 || profile.latency_max_ms < profile.latency_min_ms) {
        throw std::invalid_argument("persona latency parameters must be positive and ordered");
    }
    if (j.contains("susceptibility")) {
        for (const auto& [name, value] : j.at("susceptibility").items()) {
            auto mode = sim_fault_mode_from_string(name);
            if (!mode.has_value()) {
                throw std::invalid_argument("unknown fault mode in persona: " + name);
            }
            double s = value.get<double>();
            if (s < 0.0) {
                throw std::invalid_argument("susceptibility must be >= 0");
            }
            profile.susceptibility[*mode] = s;
        }
    }
    profile.crash_window_scale = j.value("crash_window_scale", profile.crash_window_scale);
    return profile;
}

std::vector<SimNodeProfile> load_personas_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open personas file: " + path);
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/true,
                                             /*ignore_comments=*/true);
    std::vector<SimNodeProfile> personas;
    for (const auto& entry : j.at("personas")) {
        personas.push_back(SimNodeProfile::from_json(entry));
    }
    return personas;
}

namespace {

// Fixed epoch for synthetic block timestamps.
constexpr uint64_t kGenesisUnixTime = 1663200000;

std::string pseudo_hex_data(Rng& rng, size_t bytes) {
    static const char digits[] = "0123456789abcdef";
    std::string out = "0x";
    out.reserve(2 + bytes * 2);
    for (size_t i = 0; i < bytes; ++i) {
        uint64_t b = rng.next_below(256);
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

// One generator per (method, params, block) triple: repeated queries over
// the same state return identical values.
Rng state_rng(const RpcRequest& req, uint64_t block_number) {
    uint64_t h = hash_str(req.method);
    h = mix_seed(h, hash_str(req.params_json));
    return Rng(mix_seed(h, block_number));
}

nlohmann::json params_of(const RpcRequest& req) {
    auto p = nlohmann::json::parse(req.params_json, nullptr, /*allow_exceptions=*/false);
    if (p.is_discarded() || !p.is_array()) {
        return nlohmann::json::array();
    }
    return p;
}

// Resolves a block-number parameter ("latest", "pending", "earliest", or a
// hex quantity) against the node's local head. Returns nullopt for blocks
// the node does not know yet.
std::optional<uint64_t> resolve_block_number(const nlohmann::json& param, uint64_t head) {
    if (param.is_string()) {
        const auto& s = param.get_ref<const std::string&>();
        if (s == "latest" || s == "pending" || s == "safe" || s == "finalized") {
            return head;
        }
        if (s == "earliest") {
            return 0;
        }
        if (auto n = parse_hex_quantity(s)) {
            if (*n <= head) {
                return *n;
            }
            return std::nullopt;
        }
    }
    return head;
}

uint64_t block_number_from_hash(const nlohmann::json& param, uint64_t head) {
    std::string s = param.is_string() ? param.get<std::string>() : param.dump();
    return hash_str(s) % (head + 1);
}

nlohmann::json make_block_object(const RpcRequest& req, uint64_t number, bool with_transactions) {
    Rng rng = state_rng(req, number);
    nlohmann::json block;
    block["number"] = to_hex_quantity(number);
    block["hash"] = pseudo_hex_data(rng, 32);
    block["parentHash"] = pseudo_hex_data(rng, 32);
    block["nonce"] = pseudo_hex_data(rng, 8);
    block["timestamp"] = to_hex_quantity(kGenesisUnixTime + number * 12);
    block["gasLimit"] = to_hex_quantity(30'000'000);
    block["gasUsed"] = to_hex_quantity(1 + rng.next_below(29'999'999));
    block["size"] = to_hex_quantity(500 + rng.next_below(120'000));
    block["difficulty"] = to_hex_quantity(1 + rng.next_below(1'000'000'000));
    block["totalDifficulty"] = to_hex_quantity(number + 1'000'000);
    block["uncles"] = nlohmann::json::array();
    if (with_transactions) {
        nlohmann::json txs = nlohmann::json::array();
        uint64_t count = rng.next_below(4);
        for (uint64_t i = 0; i < count; ++i) {
            txs.push_back(pseudo_hex_data(rng, 32));
        }
        block["transactions"] = std::move(txs);
    }
    return block;
}

nlohmann::json make_transaction_object(const RpcRequest& req, uint64_t block_number) {
    Rng rng = state_rng(req, block_number);
    nlohmann::json tx;
    tx["hash"] = pseudo_hex_data(rng, 32);
    tx["nonce"] = to_hex_quantity(rng.next_below(10'000));
    tx["blockHash"] = pseudo_hex_data(rng, 32);
    tx["blockNumber"] = to_hex_quantity(block_number);
    tx["transactionIndex"] = to_hex_quantity(rng.next_below(300));
    tx["from"] = pseudo_hex_data(rng, 20);
    tx["to"] = pseudo_hex_data(rng, 20);
    tx["value"] = to_hex_quantity(rng.next_below(1'000'000'000));
    tx["gas"] = to_hex_quantity(21'000 + rng.next_below(400'000));
    tx["gasPrice"] = to_hex_quantity(1'000'000'000 + rng.next_below(50'000'000'000ULL));
    tx["input"] = "0x";
    return tx;
}

nlohmann::json make_receipt_object(const RpcRequest& req, uint64_t block_number) {
    Rng rng = state_rng(req, block_number);
    nlohmann::json receipt;
    receipt["transactionHash"] = pseudo_hex_data(rng, 32);
    receipt["transactionIndex"] = to_hex_quantity(rng.next_below(300));
    receipt["blockHash"] = pseudo_hex_data(rng, 32);
    receipt["blockNumber"] = to_hex_quantity(block_number);
    receipt["cumulativeGasUsed"] = to_hex_quantity(21'000 + rng.next_below(29'000'000));
    receipt["gasUsed"] = to_hex_quantity(21'000 + rng.next_below(400'000));
    receipt["status"] = to_hex_quantity(1);
    receipt["logs"] = nlohmann::json::array();
    return receipt;
}

nlohmann::json make_log_object(Rng& rng, uint64_t block_number) {
    nlohmann::json log;
    log["address"] = pseudo_hex_data(rng, 20);
    log["topics"] = nlohmann::json::array({pseudo_hex_data(rng, 32)});
    log["data"] = pseudo_hex_data(rng, 16);
    log["blockNumber"] = to_hex_quantity(block_number);
    log["blockHash"] = pseudo_hex_data(rng, 32);
    log["transactionHash"] = pseudo_hex_data(rng, 32);
    log["transactionIndex"] = to_hex_quantity(rng.next_below(300));
    log["logIndex"] = to_hex_quantity(rng.next_below(64));
    return log;
}

nlohmann::json make_result(const RpcRequest& req, uint64_t head) {
    const std::string& m = req.method;
    nlohmann::json params = params_of(req);
    auto block_param = [&](size_t idx) -> std::optional<uint64_t> {
        if (idx < params.size()) {
            return resolve_block_number(params[idx], head);
        }
        return head;
    };

    if (m == "eth_blockNumber") {
        return to_hex_quantity(head);
    }
    if (m == "eth_gasPrice") {
        Rng rng = state_rng(req, head);
        return to_hex_quantity(1'000'000'000 + rng.next_below(40'000'000'000ULL));
    }
    if (m == "eth_estimateGas") {
        Rng rng = state_rng(req, head);
        return to_hex_quantity(21'000 + rng.next_below(300'000));
    }
    if (m == "eth_getBalance") {
        auto n = block_param(1);
        if (!n.has_value()) return nullptr;
        Rng rng = state_rng(req, *n);
        return to_hex_quantity(rng.next_below(1'000'000'000'000ULL));
    }
    if (m == "eth_getTransactionCount") {
        auto n = block_param(1);
        if (!n.has_value()) return nullptr;
        Rng rng = state_rng(req, *n);
        return to_hex_quantity(rng.next_below(50'000));
    }
    if (m == "eth_getBlockTransactionCountByNumber") {
        auto n = block_param(0);
        if (!n.has_value()) return nullptr;
        Rng rng = state_rng(req, *n);
        return to_hex_quantity(rng.next_below(300));
    }
    if (m == "eth_getBlockTransactionCountByHash") {
        uint64_t n = params.empty() ? head : block_number_from_hash(params[0], head);
        Rng rng = state_rng(req, n);
        return to_hex_quantity(rng.next_below(300));
    }
    if (m == "eth_getUncleCountByBlockNumber") {
        auto n = block_param(0);
        if (!n.has_value()) return nullptr;
        Rng rng = state_rng(req, *n);
        return to_hex_quantity(rng.next_below(3));
    }
    if (m == "eth_getUncleCountByBlockHash") {
        uint64_t n = params.empty() ? head : block_number_from_hash(params[0], head);
        Rng rng = state_rng(req, n);
        return to_hex_quantity(rng.next_below(3));
    }
    if (m == "eth_getCode") {
        auto n = block_param(1);
        if (!n.has_value()) return nullptr;
        Rng rng = state_rng(req, *n);
        return pseudo_hex_data(rng, 4 + rng.next_below(64));
    }
    if (m == "eth_getStorageAt") {
        auto n = block_param(2);
        if (!n.has_value()) return nullptr;
        Rng rng = state_rng(req, *n);
        return pseudo_hex_data(rng, 32);
    }
    if (m == "eth_getBlockByNumber") {
        auto n = block_param(0);
        if (!n.has_value()) return nullptr;
        return make_block_object(req, *n, /*with_transactions=*/true);
    }
    if (m == "eth_getBlockByHash") {
        uint64_t n = params.empty() ? head : block_number_from_hash(params[0], head);
        return make_block_object(req, n, /*with_transactions=*/true);
    }
    if (m == "eth_getUncleByBlockNumberAndIndex") {
        auto n = block_param(0);
        if (!n.has_value()) return nullptr;
        return make_block_object(req, *n, /*with_transactions=*/false);
    }
    if (m == "eth_getUncleByBlockHashAndIndex") {
        uint64_t n = params.empty() ? head : block_number_from_hash(params[0], head);
        return make_block_object(req, n, /*with_transactions=*/false);
    }
    if (m == "eth_getTransactionByHash") {
        uint64_t n = params.empty() ? head : block_number_from_hash(params[0], head);
        return make_transaction_object(req, n);
    }
    if (m == "eth_getTransactionByBlockNumberAndIndex") {
        auto n = block_param(0);
        if (!n.has_value()) return nullptr;
        return make_transaction_object(req, *n);
    }
    if (m == "eth_getTransactionByBlockHashAndIndex") {
        uint64_t n = params.empty() ? head : block_number_from_hash(params[0], head);
        return make_transaction_object(req, n);
    }
    if (m == "eth_getTransactionReceipt") {
        uint64_t n = params.empty() ? head : block_number_from_hash(params[0], head);
        return make_receipt_object(req, n);
    }
    if (m == "eth_getLogs") {
        uint64_t n = head;
        if (!params.empty() && params[0].is_object() && params[0].contains("toBlock")) {
            n = resolve_block_number(params[0]["toBlock"], head).value_or(head);
        }
        Rng rng = state_rng(req, n);
        nlohmann::json logs = nlohmann::json::array();
        uint64_t count = rng.next_below(3);
        for (uint64_t i = 0; i < count; ++i) {
            logs.push_back(make_log_object(rng, n));
        }
        return logs;
    }
    if (m == "eth_feeHistory") {
        uint64_t count = 4;
        if (!params.empty() && params[0].is_string()) {
            count = parse_hex_quantity(params[0].get_ref<const std::string&>()).value_or(4);
        }
        count = std::clamp<uint64_t>(count, 1, 32);
        uint64_t newest = head;
        if (params.size() > 1) {
            newest = resolve_block_number(params[1], head).value_or(head);
        }
        uint64_t oldest = newest >= count - 1 ? newest - (count - 1) : 0;
        Rng rng = state_rng(req, newest);
        nlohmann::json fees = nlohmann::json::array();
        nlohmann::json ratios = nlohmann::json::array();
        for (uint64_t i = 0; i < count; ++i) {
            fees.push_back(to_hex_quantity(1'000'000'000 + rng.next_below(9'000'000'000ULL)));
            ratios.push_back(rng.next_double());
        }
        fees.push_back(to_hex_quantity(1'000'000'000 + rng.next_below(9'000'000'000ULL)));
        return nlohmann::json{{"oldestBlock", to_hex_quantity(oldest)},
                              {"baseFeePerGas", std::move(fees)},
                              {"gasUsedRatio", std::move(ratios)}};
    }
    return nullptr;
}

}  // namespace

std::string build_response_body(const RpcRequest& req, uint64_t head) {
    nlohmann::json response;
    response["jsonrpc"] = "2.0";
    response["id"] = req.id;
    if (!known_method(req.method)) {
        response["error"] = nlohmann::json{{"code", -32601}, {"message", "method not found"}};
    } else {
        response["result"] = make_result(req, head);
    }
    return response.dump();
}

SimNodeCore::SimNodeCore(std::string id, SimNodeProfile profile,
                         std::shared_ptr<const ChainState> chain, SimNodeFaultConfig fault_config)
    : id_(std::move(id)), profile_(std::move(profile)), chain_(std::move(chain)),
      config_(std::move(fault_config)) {
    config_.validate();
}

void SimNodeCore::load_fault_config(SimNodeFaultConfig config) {
    config.validate();
    std::lock_guard lock(mu_);
    config_ = std::move(config);
}

bool SimNodeCore::frozen_locked(double now_ms) const {
    return now_ms >= freeze_start_ms_ && now_ms < freeze_until_ms_;
}

bool SimNodeCore::crashed_locked(double now_ms) const {
    return now_ms >= crash_start_ms_ && now_ms < crash_until_ms_;
}

uint64_t SimNodeCore::local_head_locked(double now_ms) const {
    uint64_t global = chain_->head_at(now_ms);
    if (frozen_locked(now_ms)) {
        return std::min(frozen_head_, global);
    }
    return global;
}

void SimNodeCore::begin_freeze_locked(double now_ms, double until_ms) {
    if (frozen_locked(now_ms)) {
        freeze_until_ms_ = std::max(freeze_until_ms_, until_ms);
        return;
    }
    freeze_start_ms_ = now_ms;
    freeze_until_ms_ = until_ms;
    frozen_head_ = chain_->head_at(now_ms);
}

SimFaultMode SimNodeCore::draw_mode_locked(double u) const {
    // Fixed mode order keeps the band layout stable for a given config.
    static constexpr std::array<SimFaultMode, kSimFaultModeCount - 1> kDrawOrder{
        SimFaultMode::ConnectionRefused,    SimFaultMode::TimeoutAwaitingHeaders,
        SimFaultMode::TimeoutReadingBody,   SimFaultMode::ConnectionResetByPeer,
        SimFaultMode::ServerClosedIdleConnection, SimFaultMode::Eof,
        SimFaultMode::UnexpectedEof,        SimFaultMode::MalformedHttpResponse,
        SimFaultMode::InvalidChunkLength,   SimFaultMode::InvalidChecksum,
        SimFaultMode::CorruptResponseBody,  SimFaultMode::TruncateJsonBody,
        SimFaultMode::Crash,                SimFaultMode::StaleHead,
    };
    double total = 0.0;
    std::array<double, kDrawOrder.size()> bands{};
    for (size_t i = 0; i < kDrawOrder.size(); ++i) {
        double p = std::min(1.0, config_.probability(kDrawOrder[i]) *
                                     profile_.susceptibility_for(kDrawOrder[i]));
        bands[i] = p;
        total += p;
    }
    // Disjoint bands; when the combined mass exceeds 1 the draw keeps the
    // relative frequencies.
    const double scale = total > 1.0 ? 1.0 / total : 1.0;
    double cursor = 0.0;
    for (size_t i = 0; i < kDrawOrder.size(); ++i) {
        cursor += bands[i] * scale;
        if (u < cursor) {
            return kDrawOrder[i];
        }
    }
    return SimFaultMode::None;
}

ServeResult SimNodeCore::serve(const RpcRequest& req, double now_ms) {
    std::lock_guard lock(mu_);
    journal_.push_back(req.id);
    const uint64_t seq = seq_++;
    Rng rng(mix_seed(config_.seed, seq));
    const double u_fault = rng.next_double();
    const double base_latency = rng.uniform(profile_.latency_min_ms, profile_.latency_max_ms);
    const double aux = rng.next_double();

    ServeResult result;
    result.local_head = local_head_locked(now_ms);

    if (crashed_locked(now_ms)) {
        result.kind = ServeResult::Kind::Refuse;
        result.latency_ms = 0.05 + aux * 0.75;
        return result;
    }

    const SimFaultMode mode = draw_mode_locked(u_fault);
    switch (mode) {
        case SimFaultMode::None:
            break;
        case SimFaultMode::Crash: {
            const double window_ms =
                config_.crash_recovery_window_s * 1000.0 * profile_.crash_window_scale;
            const double catchup_ms = config_.crash_catchup_delay_s * 1000.0;
            crash_start_ms_ = now_ms;
            crash_until_ms_ = std::max(crash_until_ms_, now_ms + window_ms);
            begin_freeze_locked(now_ms, crash_until_ms_ + catchup_ms);
            result.kind = ServeResult::Kind::Refuse;
            result.latency_ms = 0.05 + aux * 0.75;
            return result;
        }
        case SimFaultMode::StaleHead: {
            begin_freeze_locked(now_ms, now_ms + config_.stale_window_s * 1000.0);
            result.local_head = local_head_locked(now_ms);
            break;
        }
        case SimFaultMode::ConnectionRefused:
            result.kind = ServeResult::Kind::Refuse;
            result.latency_ms = 0.05 + aux * 0.75;
            return result;
        case SimFaultMode::TimeoutAwaitingHeaders:
            result.kind = ServeResult::Kind::StallHeaders;
            result.latency_ms = config_.stall_ms;
            return result;
        case SimFaultMode::TimeoutReadingBody:
            result.kind = ServeResult::Kind::StallBody;
            result.latency_ms = config_.stall_ms;
            return result;
        case SimFaultMode::ConnectionResetByPeer:
            result.kind = ServeResult::Kind::Reset;
            result.latency_ms = base_latency * (0.1 + aux * 0.8);
            return result;
        case SimFaultMode::ServerClosedIdleConnection:
            result.kind = ServeResult::Kind::IdleClose;
            result.latency_ms = base_latency * (0.1 + aux * 0.8);
            return result;
        case SimFaultMode::Eof:
            result.kind = ServeResult::Kind::Eof;
            result.latency_ms = base_latency * (0.1 + aux * 0.8);
            return result;
        case SimFaultMode::UnexpectedEof:
            result.kind = ServeResult::Kind::UnexpectedEof;
            result.latency_ms = base_latency * (0.1 + aux * 0.8);
            return result;
        case SimFaultMode::MalformedHttpResponse:
            result.kind = ServeResult::Kind::MalformedHttp;
            result.latency_ms = base_latency * (0.1 + aux * 0.8);
            return result;
        case SimFaultMode::InvalidChunkLength:
            result.kind = ServeResult::Kind::BadChunk;
            result.latency_ms = base_latency * (0.1 + aux * 0.8);
            return result;
        case SimFaultMode::InvalidChecksum:
            result.kind = ServeResult::Kind::BadChecksum;
            result.latency_ms = base_latency * (0.1 + aux * 0.8);
            return result;
        case SimFaultMode::CorruptResponseBody:
        case SimFaultMode::TruncateJsonBody:
            break;
    }

    result.kind = ServeResult::Kind::Body;
    result.latency_ms = base_latency;
    result.body = build_response_body(req, result.local_head);

    if (mode == SimFaultMode::CorruptResponseBody && !result.body.empty()) {
        // A raw control byte is invalid JSON at any position.
        const size_t offset = static_cast<size_t>(aux * static_cast<double>(result.body.size())) %
                              result.body.size();
        result.body[offset] = '\x01';
    } else if (mode == SimFaultMode::TruncateJsonBody && result.body.size() > 2) {
        const size_t keep = 1 + static_cast<size_t>(aux * static_cast<double>(result.body.size() - 2)) %
                                    (result.body.size() - 2);
        result.body.resize(keep);
    }
    return result;
}

uint64_t SimNodeCore::local_head(double now_ms) const {
    std::lock_guard lock(mu_);
    return local_head_locked(now_ms);
}

bool SimNodeCore::crashed(double now_ms) const {
    std::lock_guard lock(mu_);
    return crashed_locked(now_ms);
}

void SimNodeCore::crash(double now_ms, double duration_s) {
    std::lock_guard lock(mu_);
    if (!crashed_locked(now_ms)) {
        crash_start_ms_ = now_ms;
    }
    crash_until_ms_ = std::max(crash_until_ms_, now_ms + duration_s * 1000.0);
    begin_freeze_locked(now_ms, crash_until_ms_ + config_.crash_catchup_delay_s * 1000.0);
}

void SimNodeCore::restore(double now_ms) {
    std::lock_guard lock(mu_);
    if (!crashed_locked(now_ms)) {
        return;
    }
    crash_until_ms_ = now_ms;
    if (frozen_locked(now_ms)) {
        freeze_until_ms_ =
            std::min(freeze_until_ms_, now_ms + config_.crash_catchup_delay_s * 1000.0);
    }
}

std::vector<uint64_t> SimNodeCore::journal() const {
    std::lock_guard lock(mu_);
    return journal_;
}

uint64_t SimNodeCore::requests_served() const {
    std::lock_guard lock(mu_);
    return seq_;
}

}  // namespace nvgate
