// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvgate/faultgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace nvgate {

bool operator==(const SyscallErrorTuple& a, const SyscallErrorTuple& b) {
    return a.syscall == b.syscall && a.err == b.err && a.frequency == b.frequency;
}

namespace {

std::string trim(const std::string& s) {
    size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return {};
    }
    size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void profile_error(const std::string& label, int line_no, const std::string& what) {
    std::ostringstream msg;
    msg << "profile";
    if (!label.empty()) {
        msg << " '" << label << "'";
    }
    msg << " line " << line_no << ": " << what;
    throw std::runtime_error(msg.str());
}

}  // namespace

ErrorProfile load_profile(std::istream& in, std::string client_label) {
    ErrorProfile profile;
    profile.client_label = std::move(client_label);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        size_t c1 = line.find(',');
        size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            profile_error(profile.client_label, line_no, "expected syscall,errno,frequency");
        }
        SyscallErrorTuple tuple;
        tuple.syscall = trim(line.substr(0, c1));
        tuple.err = trim(line.substr(c1 + 1, c2 - c1 - 1));
        const std::string freq_text = trim(line.substr(c2 + 1));
        if (tuple.syscall.empty() || tuple.err.empty() || freq_text.empty()) {
            profile_error(profile.client_label, line_no, "empty field");
        }
        try {
            size_t used = 0;
            tuple.frequency = std::stod(freq_text, &used);
            if (used != freq_text.size()) {
                throw std::invalid_argument("trailing characters");
            }
        } catch (const std::exception&) {
            profile_error(profile.client_label, line_no, "unparsable frequency '" + freq_text + "'");
        }
        if (!(tuple.frequency >= 0.0 && tuple.frequency <= 1.0)) {
            profile_error(profile.client_label, line_no, "frequency outside [0,1]");
        }
        for (const auto& seen : profile.tuples) {
            if (seen.same_key(tuple)) {
                profile_error(profile.client_label, line_no,
                              "duplicate key (" + tuple.syscall + ", " + tuple.err + ")");
            }
        }
        profile.tuples.push_back(std::move(tuple));
    }
    return profile;
}

ErrorProfile load_profile_file(const std::string& path, std::string client_label) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open profile file: " + path);
    }
    if (client_label.empty()) {
        // Derive the label from the file stem.
        size_t slash = path.find_last_of('/');
        std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
        if (auto dot = stem.find_last_of('.'); dot != std::string::npos) {
            stem.resize(dot);
        }
        client_label = stem;
    }
    return load_profile(in, std::move(client_label));
}

std::vector<SyscallErrorTuple> aggregate(std::span<const ErrorProfile> profiles) {
    std::map<std::pair<std::string, std::string>, double> min_by_key;
    for (const auto& profile : profiles) {
        for (const auto& tuple : profile.tuples) {
            auto key = std::make_pair(tuple.syscall, tuple.err);
            auto it = min_by_key.find(key);
            if (it == min_by_key.end()) {
                min_by_key.emplace(key, tuple.frequency);
            } else {
                it->second = std::min(it->second, tuple.frequency);
            }
        }
    }
    std::vector<SyscallErrorTuple> out;
    out.reserve(min_by_key.size());
    for (const auto& [key, f] : min_by_key) {
        out.push_back(SyscallErrorTuple{key.first, key.second, f});
    }
    std::sort(out.begin(), out.end(), [](const SyscallErrorTuple& a, const SyscallErrorTuple& b) {
        if (a.frequency != b.frequency) {
            return a.frequency > b.frequency;
        }
        if (a.syscall != b.syscall) {
            return a.syscall < b.syscall;
        }
        return a.err < b.err;
    });
    return out;
}

std::vector<FaultInjectionStrategy> synthesize(std::span<const SyscallErrorTuple> aggregated,
                                               int count, double amplification,
                                               Amplification mode) {
    if (count < 1) {
        throw std::invalid_argument("strategy count must be >= 1");
    }
    if (static_cast<size_t>(count) > aggregated.size()) {
        throw std::invalid_argument("strategy count exceeds aggregated tuple count");
    }
    if (amplification <= 0.0) {
        throw std::invalid_argument("amplification factor must be > 0");
    }
    for (size_t i = 1; i < aggregated.size(); ++i) {
        if (aggregated[i - 1].frequency < aggregated[i].frequency) {
            throw std::invalid_argument("aggregated tuples must be sorted by descending frequency");
        }
    }

    std::vector<SyscallErrorTuple> amplified(aggregated.begin(), aggregated.end());
    for (auto& tuple : amplified) {
        double f = mode == Amplification::Multiplicative ? tuple.frequency * (1.0 + amplification)
                                                         : tuple.frequency + amplification;
        tuple.frequency = std::min(1.0, f);
    }

    std::vector<FaultInjectionStrategy> strategies;
    strategies.reserve(static_cast<size_t>(count));
    for (int k = 1; k <= count; ++k) {
        FaultInjectionStrategy s;
        s.index = k;
        s.tuples.assign(amplified.begin(), amplified.begin() + k);
        strategies.push_back(std::move(s));
    }
    return strategies;
}

nlohmann::json strategies_to_json(std::span<const FaultInjectionStrategy> strategies) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& strategy : strategies) {
        nlohmann::json tuples = nlohmann::json::array();
        for (const auto& tuple : strategy.tuples) {
            tuples.push_back(nlohmann::json{
                {"syscall", tuple.syscall}, {"err", tuple.err}, {"f", tuple.frequency}});
        }
        out.push_back(nlohmann::json{{"index", strategy.index}, {"tuples", std::move(tuples)}});
    }
    return out;
}

std::vector<FaultInjectionStrategy> strategies_from_json(const nlohmann::json& j) {
    std::vector<FaultInjectionStrategy> out;
    for (const auto& entry : j) {
        FaultInjectionStrategy s;
        s.index = entry.at("index").get<int>();
        for (const auto& t : entry.at("tuples")) {
            s.tuples.push_back(SyscallErrorTuple{t.at("syscall").get<std::string>(),
                                                 t.at("err").get<std::string>(),
                                                 t.at("f").get<double>()});
        }
        out.push_back(std::move(s));
    }
    return out;
}

const BehaviorRule* FaultBehaviorMap::match(const std::string& syscall, const std::string& err) const {
    for (const auto& rule : rules) {
        const bool syscall_ok = rule.syscall_pattern == "*" || rule.syscall_pattern == syscall;
        const bool err_ok = rule.err_pattern == "*" || rule.err_pattern == err;
        if (syscall_ok && err_ok) {
            return &rule;
        }
    }
    return nullptr;
}

nlohmann::json FaultBehaviorMap::to_json() const {
    nlohmann::json rule_list = nlohmann::json::array();
    for (const auto& rule : rules) {
        rule_list.push_back(nlohmann::json{{"syscall", rule.syscall_pattern},
                                           {"err", rule.err_pattern},
                                           {"mode", std::string(to_string(rule.mode))},
                                           {"scale", rule.scale}});
    }
    return nlohmann::json{
        {"rules", std::move(rule_list)},
        {"crash_recovery_window_s", crash_recovery_window_s},
        {"crash_catchup_delay_s", crash_catchup_delay_s},
        {"stale_window_s", stale_window_s},
        {"stall_ms", stall_ms},
    };
}

FaultBehaviorMap FaultBehaviorMap::from_json(const nlohmann::json& j) {
    FaultBehaviorMap map;
    for (const auto& entry : j.at("rules")) {
        BehaviorRule rule;
        rule.syscall_pattern = entry.at("syscall").get<std::string>();
        rule.err_pattern = entry.at("err").get<std::string>();
        const auto mode_name = entry.at("mode").get<std::string>();
        auto mode = sim_fault_mode_from_string(mode_name);
        if (!mode.has_value()) {
            throw std::runtime_error("behavior map: unknown fault mode '" + mode_name + "'");
        }
        rule.mode = *mode;
        rule.scale = entry.value("scale", 1.0);
        if (rule.scale < 0.0) {
            throw std::runtime_error("behavior map: negative scale");
        }
        map.rules.push_back(std::move(rule));
    }
    map.crash_recovery_window_s = j.value("crash_recovery_window_s", map.crash_recovery_window_s);
    map.crash_catchup_delay_s = j.value("crash_catchup_delay_s", map.crash_catchup_delay_s);
    map.stale_window_s = j.value("stale_window_s", map.stale_window_s);
    map.stall_ms = j.value("stall_ms", map.stall_ms);
    return map;
}

FaultBehaviorMap FaultBehaviorMap::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open behavior map file: " + path);
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/true,
                                             /*ignore_comments=*/true);
    return from_json(j);
}

FaultBehaviorMap FaultBehaviorMap::builtin_default() {
    FaultBehaviorMap map;
    map.rules = {
        {"futex", "*", SimFaultMode::None, 0.0},
        {"epoll_pwait", "*", SimFaultMode::None, 0.0},
        {"epoll_wait", "*", SimFaultMode::None, 0.0},
        // Network reads feeding chain sync: sync disruption, stale heads.
        {"recvfrom", "EAGAIN", SimFaultMode::StaleHead, 1.0},
        {"read", "EAGAIN", SimFaultMode::StaleHead, 1.0},
        {"read", "EIO", SimFaultMode::StaleHead, 1.0},
        {"fsync", "EIO", SimFaultMode::StaleHead, 1.0},
        // File I/O on the serving path.
        {"pread64", "*", SimFaultMode::TimeoutReadingBody, 1.0},
        {"pwrite64", "*", SimFaultMode::UnexpectedEof, 1.0},
        {"read", "*", SimFaultMode::TimeoutReadingBody, 1.0},
        {"write", "*", SimFaultMode::UnexpectedEof, 1.0},
        // Socket lifecycle errors.
        {"accept4", "*", SimFaultMode::ConnectionRefused, 1.0},
        {"accept", "*", SimFaultMode::ConnectionRefused, 1.0},
        {"connect", "ETIMEDOUT", SimFaultMode::TimeoutAwaitingHeaders, 1.0},
        {"connect", "*", SimFaultMode::ConnectionRefused, 1.0},
        {"recvmsg", "*", SimFaultMode::ConnectionResetByPeer, 1.0},
        {"sendmsg", "*", SimFaultMode::ConnectionResetByPeer, 1.0},
        {"sendto", "*", SimFaultMode::ConnectionResetByPeer, 1.0},
        {"recv", "*", SimFaultMode::ConnectionResetByPeer, 1.0},
        {"send", "*", SimFaultMode::ConnectionResetByPeer, 1.0},
        // Allocation failures take the process down.
        {"mmap", "ENOMEM", SimFaultMode::Crash, 1.0},
        {"brk", "ENOMEM", SimFaultMode::Crash, 1.0},
        {"mmap", "*", SimFaultMode::Crash, 1.0},
        // Residual class: visible as corrupted response bytes.
        {"*", "*", SimFaultMode::CorruptResponseBody, 1.0},
    };
    return map;
}

SimNodeFaultConfig strategy_to_simconfig(const FaultInjectionStrategy& strategy,
                                         const FaultBehaviorMap& map, uint64_t seed) {
    SimNodeFaultConfig cfg;
    cfg.crash_recovery_window_s = map.crash_recovery_window_s;
    cfg.crash_catchup_delay_s = map.crash_catchup_delay_s;
    cfg.stale_window_s = map.stale_window_s;
    cfg.stall_ms = map.stall_ms;
    cfg.seed = seed;
    for (const auto& tuple : strategy.tuples) {
        const BehaviorRule* rule = map.match(tuple.syscall, tuple.err);
        if (rule == nullptr) {
            throw std::runtime_error("behavior map has no entry for (" + tuple.syscall + ", " +
                                     tuple.err + ")");
        }
        if (rule->mode == SimFaultMode::None) {
            continue;
        }
        double& p = cfg.mode_probability[rule->mode];
        p = std::min(1.0, p + tuple.frequency * rule->scale);
    }
    cfg.validate();
    return cfg;
}

}  // namespace nvgate
