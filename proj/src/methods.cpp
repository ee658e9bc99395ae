// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvgate/methods.hpp"

#include <array>
#include <cctype>

namespace nvgate {

namespace {

constexpr std::array<std::string_view, 21> kMethodPool{
    "eth_blockNumber",
    "eth_estimateGas",
    "eth_feeHistory",
    "eth_gasPrice",
    "eth_getBalance",
    "eth_getBlockByHash",
    "eth_getBlockByNumber",
    "eth_getBlockTransactionCountByHash",
    "eth_getBlockTransactionCountByNumber",
    "eth_getCode",
    "eth_getLogs",
    "eth_getStorageAt",
    "eth_getTransactionByBlockHashAndIndex",
    "eth_getTransactionByBlockNumberAndIndex",
    "eth_getTransactionByHash",
    "eth_getTransactionCount",
    "eth_getTransactionReceipt",
    "eth_getUncleByBlockHashAndIndex",
    "eth_getUncleByBlockNumberAndIndex",
    "eth_getUncleCountByBlockHash",
    "eth_getUncleCountByBlockNumber",
};

bool is_hex_digit(char c) {
    return std::isxdigit(static_cast<unsigned char>(c)) != 0;
}

bool hex_string_payload(const nlohmann::json& v, size_t* digits_out) {
    if (!v.is_string()) {
        return false;
    }
    const auto& s = v.get_ref<const std::string&>();
    if (s.size() < 2 || s[0] != '0' || s[1] != 'x') {
        return false;
    }
    for (size_t i = 2; i < s.size(); ++i) {
        if (!is_hex_digit(s[i])) {
            return false;
        }
    }
    if (digits_out != nullptr) {
        *digits_out = s.size() - 2;
    }
    return true;
}

bool field_is(const nlohmann::json& obj, const char* key, bool (*pred)(const nlohmann::json&)) {
    return obj.contains(key) && pred(obj.at(key));
}

bool is_array(const nlohmann::json& v) { return v.is_array(); }

// Block objects as returned by the block and uncle queries. Uncle blocks
// carry the same header fields but no transaction list.
bool validate_block_object(const nlohmann::json& v, bool require_transactions) {
    if (!v.is_object()) {
        return false;
    }
    const char* quantity_fields[] = {"number", "timestamp", "gasLimit", "gasUsed", "size", "difficulty"};
    for (const char* key : quantity_fields) {
        if (!field_is(v, key, is_hex_quantity)) {
            return false;
        }
    }
    if (!field_is(v, "uncles", is_array)) {
        return false;
    }
    if (require_transactions && !field_is(v, "transactions", is_array)) {
        return false;
    }
    // Optional header fields are type-checked when present.
    if (v.contains("hash") && !is_hex_data_len(v.at("hash"), 32)) {
        return false;
    }
    if (v.contains("parentHash") && !is_hex_data_len(v.at("parentHash"), 32)) {
        return false;
    }
    if (v.contains("nonce") && !is_hex_data_len(v.at("nonce"), 8)) {
        return false;
    }
    if (v.contains("totalDifficulty") && !is_hex_quantity(v.at("totalDifficulty"))) {
        return false;
    }
    return true;
}

bool validate_transaction_object(const nlohmann::json& v) {
    if (!v.is_object()) {
        return false;
    }
    if (!field_is(v, "hash", [](const nlohmann::json& x) { return is_hex_data_len(x, 32); })) {
        return false;
    }
    const char* quantity_fields[] = {"nonce", "blockNumber", "transactionIndex", "value", "gas", "gasPrice"};
    for (const char* key : quantity_fields) {
        if (!field_is(v, key, is_hex_quantity)) {
            return false;
        }
    }
    if (!field_is(v, "blockHash", [](const nlohmann::json& x) { return is_hex_data_len(x, 32); })) {
        return false;
    }
    if (!field_is(v, "from", [](const nlohmann::json& x) { return is_hex_data_len(x, 20); })) {
        return false;
    }
    if (!field_is(v, "input", is_hex_data)) {
        return false;
    }
    return true;
}

bool validate_receipt_object(const nlohmann::json& v) {
    if (!v.is_object()) {
        return false;
    }
    if (!field_is(v, "transactionHash", [](const nlohmann::json& x) { return is_hex_data_len(x, 32); })) {
        return false;
    }
    const char* quantity_fields[] = {"blockNumber", "transactionIndex", "gasUsed", "cumulativeGasUsed", "status"};
    for (const char* key : quantity_fields) {
        if (!field_is(v, key, is_hex_quantity)) {
            return false;
        }
    }
    if (!field_is(v, "blockHash", [](const nlohmann::json& x) { return is_hex_data_len(x, 32); })) {
        return false;
    }
    if (!field_is(v, "logs", is_array)) {
        return false;
    }
    return true;
}

bool validate_log_object(const nlohmann::json& v) {
    if (!v.is_object()) {
        return false;
    }
    if (!field_is(v, "address", [](const nlohmann::json& x) { return is_hex_data_len(x, 20); })) {
        return false;
    }
    if (!field_is(v, "topics", is_array)) {
        return false;
    }
    if (!field_is(v, "data", is_hex_data)) {
        return false;
    }
    if (!field_is(v, "blockNumber", is_hex_quantity)) {
        return false;
    }
    return true;
}

bool validate_fee_history(const nlohmann::json& v) {
    if (!v.is_object()) {
        return false;
    }
    if (!field_is(v, "oldestBlock", is_hex_quantity)) {
        return false;
    }
    if (!field_is(v, "baseFeePerGas", is_array)) {
        return false;
    }
    if (!field_is(v, "gasUsedRatio", is_array)) {
        return false;
    }
    for (const auto& fee : v.at("baseFeePerGas")) {
        if (!is_hex_quantity(fee)) {
            return false;
        }
    }
    for (const auto& ratio : v.at("gasUsedRatio")) {
        if (!ratio.is_number()) {
            return false;
        }
    }
    return true;
}

}  // namespace

std::span<const std::string_view> method_pool() {
    return kMethodPool;
}

bool known_method(std::string_view method) {
    for (auto name : kMethodPool) {
        if (name == method) {
            return true;
        }
    }
    return false;
}

bool is_hex_quantity(const nlohmann::json& v) {
    size_t digits = 0;
    if (!hex_string_payload(v, &digits)) {
        return false;
    }
    if (digits == 0) {
        return false;
    }
    const auto& s = v.get_ref<const std::string&>();
    if (digits > 1 && s[2] == '0') {
        return false;
    }
    return true;
}

bool is_hex_data(const nlohmann::json& v) {
    size_t digits = 0;
    return hex_string_payload(v, &digits) && digits % 2 == 0;
}

bool is_hex_data_len(const nlohmann::json& v, size_t n) {
    size_t digits = 0;
    return hex_string_payload(v, &digits) && digits == 2 * n;
}

std::optional<uint64_t> parse_hex_quantity(std::string_view s) {
    if (s.size() < 3 || s.size() > 18 || s[0] != '0' || s[1] != 'x') {
        return std::nullopt;
    }
    uint64_t value = 0;
    for (size_t i = 2; i < s.size(); ++i) {
        char c = s[i];
        uint64_t digit;
        if (c >= '0' && c <= '9') {
            digit = static_cast<uint64_t>(c - '0');
        } else if (c >= 'a' && c <= 'f') {
            digit = static_cast<uint64_t>(c - 'a' + 10);
        } else if (c >= 'A' && c <= 'F') {
            digit = static_cast<uint64_t>(c - 'A' + 10);
        } else {
            return std::nullopt;
        }
        value = (value << 4) | digit;
    }
    return value;
}

std::string to_hex_quantity(uint64_t v) {
    char buf[19];
    int n = std::snprintf(buf, sizeof(buf), "0x%llx", static_cast<unsigned long long>(v));
    return std::string(buf, static_cast<size_t>(n));
}

bool validate_result(std::string_view method, const nlohmann::json& result) {
    if (method == "eth_blockNumber" || method == "eth_estimateGas" || method == "eth_gasPrice" ||
        method == "eth_getBalance" || method == "eth_getTransactionCount" ||
        method == "eth_getBlockTransactionCountByHash" ||
        method == "eth_getBlockTransactionCountByNumber" ||
        method == "eth_getUncleCountByBlockHash" || method == "eth_getUncleCountByBlockNumber") {
        return is_hex_quantity(result);
    }
    if (method == "eth_getCode") {
        return is_hex_data(result);
    }
    if (method == "eth_getStorageAt") {
        return is_hex_data_len(result, 32);
    }
    if (method == "eth_getBlockByHash" || method == "eth_getBlockByNumber") {
        return result.is_null() || validate_block_object(result, /*require_transactions=*/true);
    }
    if (method == "eth_getUncleByBlockHashAndIndex" || method == "eth_getUncleByBlockNumberAndIndex") {
        return result.is_null() || validate_block_object(result, /*require_transactions=*/false);
    }
    if (method == "eth_getTransactionByHash" || method == "eth_getTransactionByBlockHashAndIndex" ||
        method == "eth_getTransactionByBlockNumberAndIndex") {
        return result.is_null() || validate_transaction_object(result);
    }
    if (method == "eth_getTransactionReceipt") {
        return result.is_null() || validate_receipt_object(result);
    }
    if (method == "eth_getLogs") {
        if (!result.is_array()) {
            return false;
        }
        for (const auto& entry : result) {
            if (!validate_log_object(entry)) {
                return false;
            }
        }
        return true;
    }
    if (method == "eth_feeHistory") {
        return validate_fee_history(result);
    }
    return false;
}

std::optional<uint64_t> extract_head(std::string_view method, const nlohmann::json& result) {
    if (method == kHeadQueryMethod && result.is_string()) {
        return parse_hex_quantity(result.get_ref<const std::string&>());
    }
    return std::nullopt;
}

}  // namespace nvgate
