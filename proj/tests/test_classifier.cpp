// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "nvgate/classifier.hpp"
#include "nvgate/methods.hpp"
#include "nvgate/rng.hpp"

using namespace nvgate;

namespace {

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

RpcRequest head_query(uint64_t id = 1) {
    RpcRequest req;
    req.method = std::string(kHeadQueryMethod);
    req.id = id;
    return req;
}

std::string head_body(uint64_t head, uint64_t id = 1) {
    nlohmann::json j{{"jsonrpc", "2.0"}, {"id", id}, {"result", to_hex_quantity(head)}};
    return j.dump();
}

}  // namespace

TEST_CASE("classification matches the availability truth table") {
    const ClassifierConfig config{100.0, 2};

    struct Row {
        bool timely;
        bool compliant;
        bool fresh;  // meaningful only when compliant
        Status expected;
    };
    // Timely+compliant+fresh is available; timely with a defect is
    // degraded; slow is unavailable no matter what the body looked like.
    const Row table[] = {
        {true, true, true, Status::Available},
        {true, true, false, Status::Degraded},
        {true, false, true, Status::Degraded},
        {true, false, false, Status::Degraded},
        {false, true, true, Status::Unavailable},
        {false, true, false, Status::Unavailable},
        {false, false, true, Status::Unavailable},
        {false, false, false, Status::Unavailable},
    };

    for (const Row& row : table) {
        const double t_r = row.timely ? 50.0 : 150.0;
        const uint64_t node_head = 100;
        const uint64_t oracle_head = row.fresh ? 100 : 105;
        std::string body = head_body(node_head);
        if (!row.compliant) {
            body[0] = '\x01';
        }
        const auto exchange = RpcExchange::with_body(head_query(), body, t_r, 0.0);
        const auto verdict = classify(exchange, oracle_head, config);
        CAPTURE(row.timely);
        CAPTURE(row.compliant);
        CAPTURE(row.fresh);
        CHECK(verdict.status == row.expected);
        CHECK(verdict.compliant == row.compliant);
        if (row.compliant) {
            REQUIRE(verdict.freshness.has_value());
            CHECK(*verdict.freshness == (row.fresh ? 0 : 5));
        } else {
            CHECK(!verdict.freshness.has_value());
        }
    }
}

TEST_CASE("a 150 ms response against a 100 ms bound is unavailable") {
    const ClassifierConfig config{100.0, 2};
    const auto exchange = RpcExchange::with_body(head_query(), head_body(100), 150.0, 0.0);
    CHECK(classify(exchange, 100, config).status == Status::Unavailable);
}

TEST_CASE("an instant compliant fresh response is available for any bounds") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const ClassifierConfig config{rng.uniform(0.001, 10'000.0), rng.next_below(100)};
        const auto exchange = RpcExchange::with_body(head_query(), head_body(42), 0.0, 0.0);
        CHECK(classify(exchange, 42, config).status == Status::Available);
    }
}

TEST_CASE("denied requests are unavailable regardless of elapsed time") {
    const ClassifierConfig config{100.0, 2};
    for (auto kind : {TransportErrorKind::ConnectionRefused, TransportErrorKind::ConnectionResetByPeer,
                      TransportErrorKind::Eof, TransportErrorKind::TimeoutAwaitingHeaders}) {
        const auto exchange = RpcExchange::with_error(head_query(), kind, 0.4, 0.0);
        CHECK(classify(exchange, 100, config).status == Status::Unavailable);
    }
}

TEST_CASE("a slow compliant response still records compliance and freshness") {
    const ClassifierConfig config{100.0, 2};
    const auto exchange = RpcExchange::with_body(head_query(), head_body(99), 150.0, 0.0);
    const auto verdict = classify(exchange, 100, config);
    CHECK(verdict.status == Status::Unavailable);
    CHECK(verdict.compliant);
    REQUIRE(verdict.freshness.has_value());
    CHECK(*verdict.freshness == 1);
}

TEST_CASE("compliance accepts the block response body") {
    CHECK(check_compliance(kBlockResponse, "eth_getBlockByNumber"));
}

TEST_CASE("compliance rejects an empty object") {
    CHECK(!check_compliance("{}", "eth_getBlockByNumber"));
}

TEST_CASE("compliance rejects a block body with the number field deleted") {
    auto j = nlohmann::json::parse(kBlockResponse);
    j["result"].erase("number");
    CHECK(!check_compliance(j.dump(), "eth_getBlockByNumber"));
}

TEST_CASE("a well-formed error object is a compliant response") {
    const char* body =
        R"({"jsonrpc":"2.0","id":7,"error":{"code":-32601,"message":"method not found"}})";
    CHECK(check_compliance(body, "eth_noSuchMethod"));
    CHECK(check_compliance(body, "eth_blockNumber"));
}

TEST_CASE("unknown methods fall back to envelope-only compliance") {
    CHECK(check_compliance(R"({"jsonrpc":"2.0","id":1,"result":{"anything":1}})", "web3_clientVersion"));
    CHECK(!check_compliance(R"({"id":1,"result":{}})", "web3_clientVersion"));
}

TEST_CASE("methods without head information classify as fresh") {
    const ClassifierConfig config{100.0, 0};
    RpcRequest req;
    req.method = "eth_gasPrice";
    req.id = 3;
    nlohmann::json body{{"jsonrpc", "2.0"}, {"id", 3}, {"result", "0x3b9aca00"}};
    const auto exchange = RpcExchange::with_body(req, body.dump(), 5.0, 0.0);
    const auto verdict = classify(exchange, 999'999, config);
    CHECK(verdict.status == Status::Available);
    REQUIRE(verdict.freshness.has_value());
    CHECK(*verdict.freshness == 0);
}

TEST_CASE("freshness is clamped distance") {
    CHECK(freshness(100, 100) == 0);
    CHECK(freshness(97, 100) == 3);
    CHECK(freshness(101, 100) == 0);

    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        const uint64_t node = rng.next_below(1'000'000);
        const uint64_t oracle = rng.next_below(1'000'000);
        const uint64_t f = freshness(node, oracle);
        CHECK(f >= 0);
        CHECK(f == (oracle > node ? oracle - node : 0));
    }
}

TEST_CASE("exactly one availability branch fires for every input") {
    Rng rng(13);
    for (int trial = 0; trial < 5000; ++trial) {
        const ClassifierConfig config{rng.uniform(1.0, 200.0), rng.next_below(5)};
        const double t_r = rng.uniform(0.0, 300.0);
        const uint64_t node_head = rng.next_below(1000);
        const uint64_t oracle_head = rng.next_below(1000);
        const bool corrupt = rng.next_below(3) == 0;
        std::string body = head_body(node_head);
        if (corrupt) {
            body[1 + rng.next_below(body.size() - 1)] = '\x01';
        }
        const auto exchange = RpcExchange::with_body(head_query(), body, t_r, 0.0);
        const auto verdict = classify(exchange, oracle_head, config);

        const bool c_r = verdict.compliant;
        const bool timely = t_r <= config.timeliness_ms;
        const bool fresh = c_r && verdict.freshness.has_value() &&
                           *verdict.freshness <= config.freshness_blocks;
        const bool is_available = timely && c_r && fresh;
        const bool is_degraded = timely && (!c_r || !fresh);
        const bool is_unavailable = !timely;
        CHECK(int(is_available) + int(is_degraded) + int(is_unavailable) == 1);
        const Status expected = is_available  ? Status::Available
                                : is_degraded ? Status::Degraded
                                              : Status::Unavailable;
        CHECK(verdict.status == expected);
    }
}

TEST_CASE("availability is monotone in the bounds") {
    Rng rng(17);
    for (int trial = 0; trial < 2000; ++trial) {
        const double t = rng.uniform(1.0, 150.0);
        const uint64_t f = rng.next_below(4);
        const ClassifierConfig tight{t, f};
        const ClassifierConfig looser_t{t + rng.uniform(0.0, 100.0), f};
        const ClassifierConfig looser_f{t, f + rng.next_below(4)};

        const uint64_t node_head = rng.next_below(100);
        const uint64_t oracle_head = node_head + rng.next_below(6);
        const auto exchange = RpcExchange::with_body(head_query(), head_body(node_head),
                                                     rng.uniform(0.0, 200.0), 0.0);
        if (classify(exchange, oracle_head, tight).status == Status::Available) {
            CHECK(classify(exchange, oracle_head, looser_t).status == Status::Available);
            CHECK(classify(exchange, oracle_head, looser_f).status == Status::Available);
        }
    }
}
