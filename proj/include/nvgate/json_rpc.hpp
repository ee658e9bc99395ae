// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

namespace nvgate {

// First defect found in a response body. Truncated covers any input that
// ends before the document closes (including the empty body); uncategorized
// syntax damage inside an otherwise JSON-shaped body reports
// InvalidCharacter; NotJson is reserved for bodies that never looked like
// JSON to begin with (HTML error pages, raw garbage).
enum class ParseDefect {
    Truncated,
    InvalidCharacter,
    NotJson,
    EnvelopeViolation,
};

std::string_view to_string(ParseDefect defect);

struct ParsedRpcResponse {
    nlohmann::json id;
    std::optional<nlohmann::json> result;
    std::optional<nlohmann::json> error;
};

struct ParseFailure {
    ParseDefect defect;
    std::string detail;
};

using ParseOutcome = std::variant<ParsedRpcResponse, ParseFailure>;

// Parses a raw JSON-RPC 2.0 response body. Failure is a value, never an
// exception: the whole point of the harness is to measure defective bodies.
ParseOutcome parse_rpc_response(std::string_view raw);

inline bool parse_ok(const ParseOutcome& outcome) {
    return std::holds_alternative<ParsedRpcResponse>(outcome);
}

}  // namespace nvgate
