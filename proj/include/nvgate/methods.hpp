// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace nvgate {

// The read-only method pool served by simulated nodes and sampled by the
// mixed workload. 21 entries.
std::span<const std::string_view> method_pool();

bool known_method(std::string_view method);

// Hex conventions used across the API surface.
bool is_hex_quantity(const nlohmann::json& v);           // "0x" + 1..16 hex digits, no leading zeros except "0x0"
bool is_hex_data(const nlohmann::json& v);               // "0x" + even number of hex digits
bool is_hex_data_len(const nlohmann::json& v, size_t n); // exactly n bytes
std::optional<uint64_t> parse_hex_quantity(std::string_view s);
std::string to_hex_quantity(uint64_t v);

// Structural schema check for a method's result value. Unknown methods are
// not validated here; callers fall back to envelope-only compliance.
bool validate_result(std::string_view method, const nlohmann::json& result);

// Block height carried by a response, for freshness measurement. Only the
// latest-head query exposes the node's sync state; all other methods return
// nullopt and their responses are treated as fresh.
std::optional<uint64_t> extract_head(std::string_view method, const nlohmann::json& result);

// The single method used by the latest-head workload.
inline constexpr std::string_view kHeadQueryMethod = "eth_blockNumber";

}  // namespace nvgate
