// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvgate/json_rpc.hpp"

#include <cctype>

namespace nvgate {

namespace {

bool looks_like_json_start(std::string_view raw) {
    for (char c : raw) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            continue;
        }
        switch (c) {
            case '{':
            case '[':
            case '"':
            case '-':
            case 't':
            case 'f':
            case 'n':
                return true;
            default:
                return std::isdigit(static_cast<unsigned char>(c)) != 0;
        }
    }
    // Whitespace-only or empty: treat as truncated JSON, not foreign content.
    return true;
}

}  // namespace

std::string_view to_string(ParseDefect defect) {
    switch (defect) {
        case ParseDefect::Truncated: return "truncated";
        case ParseDefect::InvalidCharacter: return "invalid_character";
        case ParseDefect::NotJson: return "not_json";
        case ParseDefect::EnvelopeViolation: return "envelope_violation";
    }
    return "unknown";
}

ParseOutcome parse_rpc_response(std::string_view raw) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
        std::string msg = e.what();
        if (msg.find("unexpected end of input") != std::string::npos) {
            return ParseFailure{ParseDefect::Truncated, msg};
        }
        if (!looks_like_json_start(raw)) {
            return ParseFailure{ParseDefect::NotJson, msg};
        }
        return ParseFailure{ParseDefect::InvalidCharacter, msg};
    }

    if (!j.is_object()) {
        return ParseFailure{ParseDefect::EnvelopeViolation, "top-level value is not an object"};
    }
    if (!j.contains("jsonrpc") || j["jsonrpc"] != "2.0") {
        return ParseFailure{ParseDefect::EnvelopeViolation, "missing or wrong jsonrpc version"};
    }
    if (!j.contains("id")) {
        return ParseFailure{ParseDefect::EnvelopeViolation, "missing id"};
    }
    const bool has_result = j.contains("result");
    const bool has_error = j.contains("error");
    if (has_result == has_error) {
        return ParseFailure{ParseDefect::EnvelopeViolation,
                            has_result ? "both result and error present" : "neither result nor error present"};
    }
    if (has_error) {
        const auto& err = j["error"];
        if (!err.is_object() || !err.contains("code") || !err["code"].is_number_integer() ||
            !err.contains("message") || !err["message"].is_string()) {
            return ParseFailure{ParseDefect::EnvelopeViolation, "malformed error object"};
        }
    }

    ParsedRpcResponse parsed;
    parsed.id = j["id"];
    if (has_result) {
        parsed.result = j["result"];
    } else {
        parsed.error = j["error"];
    }
    return parsed;
}

}  // namespace nvgate
