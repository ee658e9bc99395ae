// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvgate/classifier.hpp"

#include "nvgate/json_rpc.hpp"
#include "nvgate/methods.hpp"

namespace nvgate {

std::string_view to_string(Status status) {
    switch (status) {
        case Status::Available: return "available";
        case Status::Degraded: return "degraded";
        case Status::Unavailable: return "unavailable";
    }
    return "unknown";
}

std::optional<Status> status_from_string(std::string_view name) {
    if (name == "available") return Status::Available;
    if (name == "degraded") return Status::Degraded;
    if (name == "unavailable") return Status::Unavailable;
    return std::nullopt;
}

bool check_compliance(std::string_view raw, std::string_view method) {
    const ParseOutcome outcome = parse_rpc_response(raw);
    const auto* parsed = std::get_if<ParsedRpcResponse>(&outcome);
    if (parsed == nullptr) {
        return false;
    }
    if (parsed->error.has_value()) {
        return true;
    }
    if (!known_method(method)) {
        return true;
    }
    return validate_result(method, *parsed->result);
}

AvailabilityVerdict classify(const RpcExchange& exchange, uint64_t oracle_head,
                             const ClassifierConfig& config) {
    AvailabilityVerdict verdict;
    verdict.t_r_ms = exchange.t_r_ms;

    if (!exchange.has_body()) {
        // Denied: no response to judge, the node is unavailable no matter
        // how quickly the denial arrived.
        verdict.status = Status::Unavailable;
        return verdict;
    }

    const std::string& raw = *exchange.raw_response;
    verdict.compliant = check_compliance(raw, exchange.request.method);
    if (verdict.compliant) {
        verdict.freshness = 0;
        const ParseOutcome outcome = parse_rpc_response(raw);
        if (const auto* parsed = std::get_if<ParsedRpcResponse>(&outcome);
            parsed != nullptr && parsed->result.has_value()) {
            if (auto head = extract_head(exchange.request.method, *parsed->result)) {
                verdict.freshness = freshness(*head, oracle_head);
            }
        }
    }

    if (exchange.t_r_ms > config.timeliness_ms) {
        // Slow responses are unavailable; compliance and freshness stay
        // populated for diagnostics.
        verdict.status = Status::Unavailable;
        return verdict;
    }
    if (verdict.compliant && verdict.freshness.has_value() &&
        *verdict.freshness <= config.freshness_blocks) {
        verdict.status = Status::Available;
    } else {
        verdict.status = Status::Degraded;
    }
    return verdict;
}

std::optional<TransportErrorKind> diagnose_body_defect(std::string_view raw) {
    const ParseOutcome outcome = parse_rpc_response(raw);
    const auto* failure = std::get_if<ParseFailure>(&outcome);
    if (failure == nullptr) {
        return std::nullopt;
    }
    switch (failure->defect) {
        case ParseDefect::Truncated:
            return TransportErrorKind::UnexpectedEndOfJson;
        case ParseDefect::InvalidCharacter:
        case ParseDefect::NotJson:
            return TransportErrorKind::InvalidCharacterInResponse;
        case ParseDefect::EnvelopeViolation:
            return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace nvgate
