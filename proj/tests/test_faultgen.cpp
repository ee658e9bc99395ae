// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "nvgate/faultgen.hpp"
#include "nvgate/rng.hpp"

using namespace nvgate;

namespace {

// Reference aggregator: key-wise minimum over the multiset of all tuples,
// implemented with none of the production code's machinery.
std::map<std::pair<std::string, std::string>, double> brute_force_min(
    const std::vector<ErrorProfile>& profiles) {
    std::map<std::pair<std::string, std::string>, double> out;
    for (const auto& profile : profiles) {
        for (const auto& tuple : profile.tuples) {
            auto key = std::make_pair(tuple.syscall, tuple.err);
            auto it = out.find(key);
            if (it == out.end() || tuple.frequency < it->second) {
                out[key] = tuple.frequency;
            }
        }
    }
    return out;
}

ErrorProfile profile_of(std::string label, std::vector<SyscallErrorTuple> tuples) {
    ErrorProfile p;
    p.client_label = std::move(label);
    p.tuples = std::move(tuples);
    return p;
}

}  // namespace

TEST_CASE("profile lines parse into tuples") {
    std::istringstream in("read,EAGAIN,0.12\n");
    const auto profile = load_profile(in, "geth-like");
    REQUIRE(profile.tuples.size() == 1);
    CHECK(profile.tuples[0].syscall == "read");
    CHECK(profile.tuples[0].err == "EAGAIN");
    CHECK(profile.tuples[0].frequency == doctest::Approx(0.12));
}

TEST_CASE("an empty profile file yields an empty profile") {
    std::istringstream in("");
    CHECK(load_profile(in, "x").tuples.empty());
}

TEST_CASE("comments and blank lines are ignored") {
    std::istringstream in("# header\n\n  read , EAGAIN , 0.5  # trailing\n");
    const auto profile = load_profile(in, "x");
    REQUIRE(profile.tuples.size() == 1);
    CHECK(profile.tuples[0].frequency == doctest::Approx(0.5));
}

TEST_CASE("duplicate keys in one profile are an error naming the line") {
    std::istringstream in("read,EAGAIN,0.1\nread,EAGAIN,0.2\n");
    try {
        load_profile(in, "x");
        FAIL("expected duplicate-key error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
}

TEST_CASE("malformed lines and out-of-range frequencies are errors") {
    {
        std::istringstream in("read,EAGAIN\n");
        CHECK_THROWS_AS(load_profile(in, "x"), std::runtime_error);
    }
    {
        std::istringstream in("read,EAGAIN,1.5\n");
        CHECK_THROWS_AS(load_profile(in, "x"), std::runtime_error);
    }
    {
        std::istringstream in("read,EAGAIN,abc\n");
        CHECK_THROWS_AS(load_profile(in, "x"), std::runtime_error);
    }
}

TEST_CASE("aggregation keeps the minimum for repeated keys") {
    const auto merged = aggregate(std::vector<ErrorProfile>{
        profile_of("a", {{"read", "EAGAIN", 0.2}}),
        profile_of("b", {{"read", "EAGAIN", 0.05}}),
    });
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].frequency == doctest::Approx(0.05));
}

TEST_CASE("aggregating a single profile keeps values and sorts descending") {
    const auto merged = aggregate(std::vector<ErrorProfile>{
        profile_of("a", {{"read", "EAGAIN", 0.1}, {"write", "EPIPE", 0.7}, {"brk", "ENOMEM", 0.3}}),
    });
    REQUIRE(merged.size() == 3);
    CHECK(merged[0].frequency == doctest::Approx(0.7));
    CHECK(merged[1].frequency == doctest::Approx(0.3));
    CHECK(merged[2].frequency == doctest::Approx(0.1));
}

TEST_CASE("aggregation equals the brute-force key-wise minimum on random profiles") {
    Rng rng(99);
    const char* syscalls[] = {"read", "write", "recvfrom", "sendto", "mmap", "futex"};
    const char* errs[] = {"EAGAIN", "EIO", "EPIPE", "ENOMEM", "EINTR"};
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<ErrorProfile> profiles;
        const uint64_t n_profiles = 1 + rng.next_below(4);
        for (uint64_t p = 0; p < n_profiles; ++p) {
            ErrorProfile profile;
            profile.client_label = "p" + std::to_string(p);
            std::set<std::pair<size_t, size_t>> used;
            const uint64_t n_tuples = rng.next_below(12);
            for (uint64_t t = 0; t < n_tuples; ++t) {
                const size_t s = rng.next_below(6);
                const size_t e = rng.next_below(5);
                if (!used.insert({s, e}).second) {
                    continue;
                }
                profile.tuples.push_back(SyscallErrorTuple{syscalls[s], errs[e], rng.next_double()});
            }
            profiles.push_back(std::move(profile));
        }

        const auto merged = aggregate(profiles);
        const auto expected = brute_force_min(profiles);
        REQUIRE(merged.size() == expected.size());
        for (const auto& tuple : merged) {
            auto it = expected.find({tuple.syscall, tuple.err});
            REQUIRE(it != expected.end());
            CHECK(tuple.frequency == doctest::Approx(it->second));
        }
        for (size_t i = 1; i < merged.size(); ++i) {
            CHECK(merged[i - 1].frequency >= merged[i].frequency);
        }
    }
}

TEST_CASE("aggregation is idempotent") {
    const auto merged = aggregate(std::vector<ErrorProfile>{
        profile_of("a", {{"read", "EAGAIN", 0.3}, {"write", "EPIPE", 0.1}}),
        profile_of("b", {{"read", "EAGAIN", 0.2}, {"brk", "ENOMEM", 0.05}}),
    });
    const auto again = aggregate(std::vector<ErrorProfile>{profile_of("merged", merged)});
    CHECK(again == merged);
}

TEST_CASE("synthesis amplifies multiplicatively and nests strictly") {
    const std::vector<SyscallErrorTuple> aggregated{
        {"a", "E1", 0.4},
        {"b", "E2", 0.1},
    };
    const auto strategies = synthesize(aggregated, 2);
    REQUIRE(strategies.size() == 2);
    CHECK(strategies[0].index == 1);
    REQUIRE(strategies[0].tuples.size() == 1);
    CHECK(strategies[0].tuples[0].frequency == doctest::Approx(0.42));
    REQUIRE(strategies[1].tuples.size() == 2);
    CHECK(strategies[1].tuples[0].frequency == doctest::Approx(0.42));
    CHECK(strategies[1].tuples[1].frequency == doctest::Approx(0.105));
}

TEST_CASE("top-1 synthesis keeps only the most frequent tuple") {
    const std::vector<SyscallErrorTuple> aggregated{
        {"a", "E1", 0.4},
        {"b", "E2", 0.1},
    };
    const auto strategies = synthesize(aggregated, 1);
    REQUIRE(strategies.size() == 1);
    REQUIRE(strategies[0].tuples.size() == 1);
    CHECK(strategies[0].tuples[0].syscall == "a");
}

TEST_CASE("amplification clamps at one") {
    const std::vector<SyscallErrorTuple> aggregated{{"a", "E1", 0.99}};
    const auto strategies = synthesize(aggregated, 1);
    CHECK(strategies[0].tuples[0].frequency == doctest::Approx(1.0));

    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const double f = rng.next_double();
        const auto out = synthesize(std::vector<SyscallErrorTuple>{{"s", "e", f}}, 1);
        CHECK(out[0].tuples[0].frequency <= 1.0);
        CHECK(out[0].tuples[0].frequency >= f);
    }
}

TEST_CASE("amplification preserves the descending order") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<SyscallErrorTuple> aggregated;
        const int n = 3 + static_cast<int>(rng.next_below(17));
        for (int i = 0; i < n; ++i) {
            aggregated.push_back(
                SyscallErrorTuple{"s" + std::to_string(i), "E", rng.next_double()});
        }
        std::sort(aggregated.begin(), aggregated.end(),
                  [](const auto& a, const auto& b) { return a.frequency > b.frequency; });
        const auto strategies = synthesize(aggregated, n);
        const auto& last = strategies.back();
        for (size_t i = 1; i < last.tuples.size(); ++i) {
            CHECK(last.tuples[i - 1].frequency >= last.tuples[i].frequency);
        }
        // Strict nesting: every strategy is a prefix of the next.
        for (size_t k = 1; k < strategies.size(); ++k) {
            REQUIRE(strategies[k - 1].tuples.size() + 1 == strategies[k].tuples.size());
            for (size_t i = 0; i < strategies[k - 1].tuples.size(); ++i) {
                CHECK(strategies[k - 1].tuples[i] == strategies[k].tuples[i]);
            }
        }
    }
}

TEST_CASE("additive amplification is available as an option") {
    const std::vector<SyscallErrorTuple> aggregated{{"a", "E1", 0.4}};
    const auto strategies = synthesize(aggregated, 1, 0.05, Amplification::Additive);
    CHECK(strategies[0].tuples[0].frequency == doctest::Approx(0.45));
}

TEST_CASE("requesting more strategies than tuples is an error") {
    const std::vector<SyscallErrorTuple> aggregated{{"a", "E1", 0.4}};
    CHECK_THROWS_AS(synthesize(aggregated, 2), std::invalid_argument);
}

TEST_CASE("synthesis output is bit-exact across runs") {
    std::vector<SyscallErrorTuple> aggregated;
    Rng rng(8);
    for (int i = 0; i < 20; ++i) {
        aggregated.push_back(SyscallErrorTuple{"s" + std::to_string(i), "E", 1.0 - 0.04 * i});
    }
    const auto a = strategies_to_json(synthesize(aggregated, 20)).dump();
    const auto b = strategies_to_json(synthesize(aggregated, 20)).dump();
    CHECK(a == b);

    const auto parsed = strategies_from_json(nlohmann::json::parse(a));
    CHECK(strategies_to_json(parsed).dump() == a);
}

TEST_CASE("behavior map matches patterns in order") {
    FaultBehaviorMap map;
    map.rules = {
        {"read", "EIO", SimFaultMode::StaleHead, 1.0},
        {"read", "*", SimFaultMode::TimeoutReadingBody, 0.5},
        {"*", "*", SimFaultMode::CorruptResponseBody, 1.0},
    };
    CHECK(map.match("read", "EIO")->mode == SimFaultMode::StaleHead);
    CHECK(map.match("read", "EAGAIN")->mode == SimFaultMode::TimeoutReadingBody);
    CHECK(map.match("openat", "EMFILE")->mode == SimFaultMode::CorruptResponseBody);
}

TEST_CASE("behavior map round-trips through json") {
    const auto map = FaultBehaviorMap::builtin_default();
    const auto parsed = FaultBehaviorMap::from_json(map.to_json());
    CHECK(parsed.to_json() == map.to_json());
}

TEST_CASE("strategy_to_simconfig accumulates frequencies onto modes") {
    FaultBehaviorMap map;
    map.rules = {
        {"read", "EAGAIN", SimFaultMode::TimeoutAwaitingHeaders, 1.0},
        {"write", "EPIPE", SimFaultMode::TimeoutAwaitingHeaders, 1.0},
        {"brk", "ENOMEM", SimFaultMode::Crash, 0.5},
    };
    FaultInjectionStrategy strategy;
    strategy.index = 3;
    strategy.tuples = {
        {"read", "EAGAIN", 0.12},
        {"write", "EPIPE", 0.2},
        {"brk", "ENOMEM", 0.1},
    };
    const auto cfg = strategy_to_simconfig(strategy, map, 42);
    CHECK(cfg.probability(SimFaultMode::TimeoutAwaitingHeaders) == doctest::Approx(0.32));
    CHECK(cfg.probability(SimFaultMode::Crash) == doctest::Approx(0.05));
    CHECK(cfg.seed == 42);
}

TEST_CASE("an unmapped tuple key is a configuration error") {
    FaultBehaviorMap map;
    map.rules = {{"read", "EAGAIN", SimFaultMode::StaleHead, 1.0}};
    FaultInjectionStrategy strategy;
    strategy.index = 1;
    strategy.tuples = {{"write", "EPIPE", 0.2}};
    CHECK_THROWS_AS(strategy_to_simconfig(strategy, map, 1), std::runtime_error);
}

TEST_CASE("an empty strategy injects no faults") {
    const auto cfg = strategy_to_simconfig(FaultInjectionStrategy{0, {}},
                                           FaultBehaviorMap::builtin_default(), 7);
    CHECK(cfg.mode_probability.empty());
}
