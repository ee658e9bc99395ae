// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvgate/proxy.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nvgate {

void update_score(SubNodeState& state, const AvailabilityVerdict& verdict) {
    state.attempts += 1;
    if (verdict.status == Status::Available) {
        state.successes += 1;
    }
}

std::vector<size_t> stable_rank_order(std::span<const double> scores) {
    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });
    return order;
}

std::vector<std::string> rank(std::span<const SubNodeState> states) {
    std::vector<double> scores;
    scores.reserve(states.size());
    for (const auto& s : states) {
        scores.push_back(s.score());
    }
    std::vector<std::string> ids;
    ids.reserve(states.size());
    for (size_t idx : stable_rank_order(scores)) {
        ids.push_back(states[idx].id);
    }
    return ids;
}

size_t select_best_degraded(std::span<const CandidateResponse> candidates) {
    if (candidates.empty()) {
        throw std::invalid_argument("select_best_degraded over empty candidate set");
    }

    // Rule 1 + Rule 2: best compliant candidate by freshness.
    size_t best = candidates.size();
    uint64_t best_lag = std::numeric_limits<uint64_t>::max();
    size_t best_pos = std::numeric_limits<size_t>::max();
    for (size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        if (!c.verdict.compliant || !c.raw.has_value()) {
            continue;
        }
        const uint64_t lag = c.verdict.freshness.value_or(0);
        if (lag < best_lag || (lag == best_lag && c.dispatch_pos < best_pos)) {
            best = i;
            best_lag = lag;
            best_pos = c.dispatch_pos;
        }
    }
    if (best < candidates.size()) {
        return best;
    }

    // Rule 3: earliest body-bearing candidate.
    for (size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].raw.has_value()) {
            return i;
        }
    }
    // Rule 4: first transport error.
    return 0;
}

std::string denial_body(const RpcRequest& req) {
    nlohmann::json body{
        {"jsonrpc", "2.0"},
        {"id", req.id},
        {"error", {{"code", -32000}, {"message", "all sub-nodes unavailable"}}},
    };
    return body.dump();
}

ProxyCore::ProxyCore(ProxyConfig config, std::vector<std::shared_ptr<SubNodeChannel>> channels,
                     std::function<uint64_t(double)> oracle_head)
    : config_(config), channels_(std::move(channels)), oracle_head_(std::move(oracle_head)) {
    if (channels_.empty()) {
        throw std::invalid_argument("proxy requires at least one sub-node");
    }
    states_.reserve(channels_.size());
    for (const auto& channel : channels_) {
        states_.push_back(SubNodeState{channel->id(), channel->endpoint(), 0, 0});
    }
    windows_.resize(channels_.size());
}

void ProxyCore::apply_score(size_t channel_index, const AvailabilityVerdict& verdict) {
    std::lock_guard lock(mu_);
    SubNodeState& state = states_[channel_index];
    if (config_.score_window == 0) {
        update_score(state, verdict);
        return;
    }
    auto& window = windows_[channel_index];
    window.push_back(verdict.status == Status::Available);
    if (window.size() > config_.score_window) {
        window.pop_front();
    }
    state.attempts = window.size();
    state.successes = static_cast<uint64_t>(std::count(window.begin(), window.end(), true));
}

ProxyOutcome ProxyCore::handle_request(const RpcRequest& req, double now_ms) {
    const uint64_t oracle = oracle_head_(now_ms);
    const double timeout_ms = config_.effective_attempt_timeout();

    // Dispatch order is the ranking at request arrival; score updates made
    // along the retry chain affect subsequent requests.
    std::vector<size_t> order;
    {
        std::lock_guard lock(mu_);
        std::vector<double> scores;
        scores.reserve(states_.size());
        for (const auto& s : states_) {
            scores.push_back(s.score());
        }
        order = stable_rank_order(scores);
    }

    ProxyOutcome outcome;
    std::vector<CandidateResponse> candidates;
    double clock_ms = now_ms;

    for (size_t pos = 0; pos < order.size(); ++pos) {
        const size_t idx = order[pos];
        RpcExchange exchange = channels_[idx]->exchange(req, clock_ms, timeout_ms);
        const AvailabilityVerdict verdict = classify(exchange, oracle, config_.classifier);
        apply_score(idx, verdict);
        clock_ms += exchange.t_r_ms;
        outcome.attempts.push_back(AttemptTrace{exchange.sub_node_id, verdict.status, exchange.t_r_ms});

        if (verdict.status == Status::Available) {
            outcome.response = std::move(exchange);
            outcome.verdict = verdict;
            outcome.end_to_end_ms = clock_ms - now_ms;
            return outcome;
        }
        CandidateResponse candidate;
        candidate.sub_node_id = exchange.sub_node_id;
        candidate.verdict = verdict;
        candidate.raw = exchange.raw_response;
        candidate.error = exchange.error;
        candidate.dispatch_pos = pos;
        candidates.push_back(std::move(candidate));
    }

    const size_t chosen = select_best_degraded(candidates);
    const CandidateResponse& winner = candidates[chosen];
    RpcExchange selected;
    selected.request = req;
    selected.raw_response = winner.raw;
    selected.error = winner.error;
    selected.t_r_ms = winner.verdict.t_r_ms;
    selected.sent_at_ms = now_ms;
    selected.sub_node_id = winner.sub_node_id;

    outcome.response = std::move(selected);
    outcome.verdict = winner.verdict;
    outcome.end_to_end_ms = clock_ms - now_ms;
    outcome.exhausted_denial = !winner.raw.has_value();
    return outcome;
}

std::vector<SubNodeState> ProxyCore::states() const {
    std::lock_guard lock(mu_);
    return states_;
}

std::vector<std::string> ProxyCore::current_ranking() const {
    std::lock_guard lock(mu_);
    return rank(states_);
}

nlohmann::json ProxyCore::admin_snapshot() const {
    std::lock_guard lock(mu_);
    nlohmann::json nodes = nlohmann::json::array();
    const auto ranking = rank(states_);
    for (const auto& state : states_) {
        size_t position = 0;
        for (size_t i = 0; i < ranking.size(); ++i) {
            if (ranking[i] == state.id) {
                position = i;
                break;
            }
        }
        nodes.push_back(nlohmann::json{
            {"id", state.id},
            {"endpoint", state.endpoint},
            {"attempts", state.attempts},
            {"successes", state.successes},
            {"score", state.score()},
            {"rank", position},
        });
    }
    return nlohmann::json{
        {"sub_nodes", std::move(nodes)},
        {"ranking", ranking},
        {"timeliness_ms", config_.classifier.timeliness_ms},
        {"freshness_blocks", config_.classifier.freshness_blocks},
    };
}

}  // namespace nvgate
