// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvgate/types.hpp"

#include <array>

#include <nlohmann/json.hpp>

namespace nvgate {

namespace {

struct KindName {
    TransportErrorKind kind;
    std::string_view name;
};

// Serialized names are stable identifiers used in logs, histograms, and the
// behavior-map file format.
constexpr std::array<KindName, kTransportErrorKindCount> kKindNames{{
    {TransportErrorKind::ConnectionRefused, "connection_refused"},
    {TransportErrorKind::TimeoutAwaitingHeaders, "timeout_awaiting_headers"},
    {TransportErrorKind::TimeoutReadingBody, "timeout_reading_body"},
    {TransportErrorKind::ConnectionResetByPeer, "connection_reset_by_peer"},
    {TransportErrorKind::ServerClosedIdleConnection, "server_closed_idle_connection"},
    {TransportErrorKind::Eof, "eof"},
    {TransportErrorKind::UnexpectedEof, "unexpected_eof"},
    {TransportErrorKind::MalformedHttpResponse, "malformed_http_response"},
    {TransportErrorKind::InvalidChunkLength, "invalid_chunk_length"},
    {TransportErrorKind::InvalidChecksum, "invalid_checksum"},
    {TransportErrorKind::InvalidCharacterInResponse, "invalid_character_in_response"},
    {TransportErrorKind::UnexpectedEndOfJson, "unexpected_end_of_json"},
}};

}  // namespace

std::string_view to_string(TransportErrorKind kind) {
    for (const auto& entry : kKindNames) {
        if (entry.kind == kind) {
            return entry.name;
        }
    }
    return "unknown";
}

std::optional<TransportErrorKind> transport_error_from_string(std::string_view name) {
    for (const auto& entry : kKindNames) {
        if (entry.name == name) {
            return entry.kind;
        }
    }
    return std::nullopt;
}

bool denies_response(TransportErrorKind kind) {
    switch (kind) {
        case TransportErrorKind::InvalidCharacterInResponse:
        case TransportErrorKind::UnexpectedEndOfJson:
            return false;
        default:
            return true;
    }
}

std::string RpcRequest::dump() const {
    nlohmann::ordered_json j;
    j["jsonrpc"] = jsonrpc;
    j["method"] = method;
    j["params"] = nlohmann::json::parse(params_json);
    j["id"] = id;
    return j.dump();
}

std::optional<RpcRequest> RpcRequest::parse(std::string_view raw) {
    nlohmann::json j = nlohmann::json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
        return std::nullopt;
    }
    if (!j.contains("jsonrpc") || !j["jsonrpc"].is_string() || j["jsonrpc"] != "2.0") {
        return std::nullopt;
    }
    if (!j.contains("method") || !j["method"].is_string() || j["method"].get<std::string>().empty()) {
        return std::nullopt;
    }
    if (!j.contains("id") || !(j["id"].is_number_unsigned() || j["id"].is_string())) {
        return std::nullopt;
    }
    RpcRequest req;
    req.jsonrpc = "2.0";
    req.method = j["method"].get<std::string>();
    req.params_json = j.contains("params") ? j["params"].dump() : "[]";
    if (j["id"].is_string()) {
        // String ids are accepted on the wire but normalized to a numeric id
        // when the text is a decimal number; otherwise hashed.
        const auto& s = j["id"].get_ref<const std::string&>();
        try {
            req.id = std::stoull(s);
        } catch (const std::exception&) {
            req.id = 0;
        }
    } else {
        req.id = j["id"].get<uint64_t>();
    }
    return req;
}

bool operator==(const RpcRequest& a, const RpcRequest& b) {
    return a.jsonrpc == b.jsonrpc && a.method == b.method && a.id == b.id &&
           nlohmann::json::parse(a.params_json) == nlohmann::json::parse(b.params_json);
}

RpcExchange RpcExchange::with_body(RpcRequest req, std::string body, double t_r_ms,
                                   double sent_at_ms, std::string sub_node_id) {
    RpcExchange ex;
    ex.request = std::move(req);
    ex.raw_response = std::move(body);
    ex.t_r_ms = t_r_ms;
    ex.sent_at_ms = sent_at_ms;
    ex.sub_node_id = std::move(sub_node_id);
    return ex;
}

RpcExchange RpcExchange::with_error(RpcRequest req, TransportErrorKind kind, double t_r_ms,
                                    double sent_at_ms, std::string sub_node_id) {
    RpcExchange ex;
    ex.request = std::move(req);
    ex.error = kind;
    ex.t_r_ms = t_r_ms;
    ex.sent_at_ms = sent_at_ms;
    ex.sub_node_id = std::move(sub_node_id);
    return ex;
}

}  // namespace nvgate
