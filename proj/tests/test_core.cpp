// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "nvgate/json_rpc.hpp"
#include "nvgate/methods.hpp"
#include "nvgate/rng.hpp"
#include "nvgate/types.hpp"

using namespace nvgate;

namespace {

// A concrete eth_getBlockByNumber response for block 0xa55e27.
const char* kBlockResponse = R"({
  "jsonrpc": "2.0",
  "id": 1,
  "result": {
    "difficulty": "0xa9ed0e03a6530",
    "gasLimit": "0xbea427",
    "gasUsed": "0xbe64e3",
    "nonce": "0xde84c6458a7c0aa0",
    "number": "0xa55e27",
    "size": "0x6f75",
    "timestamp": "0x5f5ad163",
    "totalDifficulty": "0x3ab7010902da66c075f",
    "transactions": [],
    "uncles": []
  }
})";

}  // namespace

TEST_CASE("parse_rpc_response accepts a block response body") {
    const ParseOutcome outcome = parse_rpc_response(kBlockResponse);
    REQUIRE(parse_ok(outcome));
    const auto& parsed = std::get<ParsedRpcResponse>(outcome);
    REQUIRE(parsed.result.has_value());
    CHECK(parsed.result->at("number") == "0xa55e27");
    CHECK(parsed.id == 1);
}

TEST_CASE("parse_rpc_response flags an empty body as truncation") {
    const ParseOutcome outcome = parse_rpc_response("");
    REQUIRE(!parse_ok(outcome));
    CHECK(std::get<ParseFailure>(outcome).defect == ParseDefect::Truncated);
}

TEST_CASE("parse_rpc_response flags a body missing its last byte as truncation") {
    std::string cut(kBlockResponse);
    cut.pop_back();
    while (!cut.empty() && std::isspace(static_cast<unsigned char>(cut.back()))) {
        cut.pop_back();
    }
    cut.pop_back();  // drop the closing brace
    const ParseOutcome outcome = parse_rpc_response(cut);
    REQUIRE(!parse_ok(outcome));
    CHECK(std::get<ParseFailure>(outcome).defect == ParseDefect::Truncated);
}

TEST_CASE("parse_rpc_response distinguishes defect categories") {
    std::string corrupted(kBlockResponse);
    corrupted[corrupted.find("number")] = '\x01';
    CHECK(std::get<ParseFailure>(parse_rpc_response(corrupted)).defect ==
          ParseDefect::InvalidCharacter);

    CHECK(std::get<ParseFailure>(parse_rpc_response("<html>bad gateway</html>")).defect ==
          ParseDefect::NotJson);

    CHECK(std::get<ParseFailure>(parse_rpc_response("{}")).defect == ParseDefect::EnvelopeViolation);
    CHECK(std::get<ParseFailure>(parse_rpc_response(R"({"jsonrpc":"2.0","id":1})")).defect ==
          ParseDefect::EnvelopeViolation);
    CHECK(std::get<ParseFailure>(
              parse_rpc_response(R"({"jsonrpc":"2.0","id":1,"result":1,"error":{}})"))
              .defect == ParseDefect::EnvelopeViolation);
}

TEST_CASE("rpc requests round-trip through serialization") {
    Rng rng(2026);
    const auto pool = method_pool();
    for (int trial = 0; trial < 200; ++trial) {
        RpcRequest req;
        req.id = rng.next_u64() >> 8;
        req.method = std::string(pool[rng.next_below(pool.size())]);
        nlohmann::json params = nlohmann::json::array();
        const uint64_t n = rng.next_below(4);
        for (uint64_t i = 0; i < n; ++i) {
            switch (rng.next_below(3)) {
                case 0: params.push_back(to_hex_quantity(rng.next_u64() >> 40)); break;
                case 1: params.push_back(rng.next_below(2) == 0); break;
                default: params.push_back("latest"); break;
            }
        }
        req.params_json = params.dump();

        const auto parsed = RpcRequest::parse(req.dump());
        REQUIRE(parsed.has_value());
        CHECK(*parsed == req);
    }
}

TEST_CASE("transport error kinds serialize to distinct names and back") {
    const TransportErrorKind kinds[] = {
        TransportErrorKind::ConnectionRefused,      TransportErrorKind::TimeoutAwaitingHeaders,
        TransportErrorKind::TimeoutReadingBody,     TransportErrorKind::ConnectionResetByPeer,
        TransportErrorKind::ServerClosedIdleConnection, TransportErrorKind::Eof,
        TransportErrorKind::UnexpectedEof,          TransportErrorKind::MalformedHttpResponse,
        TransportErrorKind::InvalidChunkLength,     TransportErrorKind::InvalidChecksum,
        TransportErrorKind::InvalidCharacterInResponse, TransportErrorKind::UnexpectedEndOfJson,
    };
    std::set<std::string> names;
    for (auto kind : kinds) {
        const auto name = std::string(to_string(kind));
        CHECK(names.insert(name).second);
        const auto back = transport_error_from_string(name);
        REQUIRE(back.has_value());
        CHECK(*back == kind);
    }
    CHECK(names.size() == kTransportErrorKindCount);
}

TEST_CASE("chain head is monotone in time") {
    const ChainState chain(0xa55e27, 1000.0, 12'000.0);
    Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const double t1 = rng.uniform(0.0, 1e7);
        const double t2 = t1 + rng.uniform(0.0, 1e6);
        CHECK(chain.head_at(t2) >= chain.head_at(t1));
    }
    CHECK(chain.head_at(0.0) == 0xa55e27);
    CHECK(chain.head_at(1000.0 + 12'000.0) == 0xa55e27 + 1);
}

TEST_CASE("chain rejects a non-positive block interval") {
    CHECK_THROWS_AS(ChainState(1, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ChainState(1, 0.0, -5.0), std::invalid_argument);
}

TEST_CASE("exchange constructors keep body and error mutually exclusive") {
    RpcRequest req;
    req.method = "eth_blockNumber";
    req.id = 1;
    const auto with_body = RpcExchange::with_body(req, "{}", 3.0, 0.0, "a");
    CHECK(with_body.has_body());
    CHECK(!with_body.error.has_value());
    const auto with_error =
        RpcExchange::with_error(req, TransportErrorKind::ConnectionRefused, 0.3, 0.0, "a");
    CHECK(!with_error.has_body());
    REQUIRE(with_error.error.has_value());
    CHECK(denies_response(*with_error.error));
}
