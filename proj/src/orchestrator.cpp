// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvgate/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nvgate/channels.hpp"
#include "nvgate/rng.hpp"

namespace nvgate {

std::string DeploymentSpec::label() const {
    if (personas.empty()) {
        return "(empty)";
    }
    std::string out = personas.front();
    for (size_t i = 1; i < personas.size(); ++i) {
        out += "+";
        out += personas[i];
    }
    return out;
}

std::vector<DeploymentSpec> enumerate_combinations(const std::vector<std::string>& personas) {
    std::vector<DeploymentSpec> out;
    const size_t n = personas.size();
    for (size_t size = 2; size <= n; ++size) {
        // Lexicographically advance a positions vector {0,1,...,size-1}.
        std::vector<size_t> pos(size);
        for (size_t i = 0; i < size; ++i) {
            pos[i] = i;
        }
        while (true) {
            DeploymentSpec spec;
            for (size_t p : pos) {
                spec.personas.push_back(personas[p]);
            }
            out.push_back(std::move(spec));
            size_t i = size;
            while (i > 0 && pos[i - 1] == n - size + i - 1) {
                --i;
            }
            if (i == 0) {
                break;
            }
            ++pos[i - 1];
            for (size_t j = i; j < size; ++j) {
                pos[j] = pos[j - 1] + 1;
            }
        }
    }
    return out;
}

const SimNodeProfile* ExperimentPlan::find_persona(const std::string& label) const {
    for (const auto& persona : personas) {
        if (persona.label == label) {
            return &persona;
        }
    }
    return nullptr;
}

namespace {

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) {
        return path;
    }
    return (std::filesystem::path(base_dir) / p).string();
}

}  // namespace

ExperimentPlan ExperimentPlan::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open plan file: " + path);
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/true,
                                             /*ignore_comments=*/true);
    return from_json(j, std::filesystem::path(path).parent_path().string());
}

ExperimentPlan ExperimentPlan::from_json(const nlohmann::json& j, const std::string& base_dir) {
    ExperimentPlan plan;

    if (j.contains("personas_file")) {
        plan.personas = load_personas_file(resolve_path(base_dir, j.at("personas_file")));
    } else if (j.contains("personas")) {
        for (const auto& entry : j.at("personas")) {
            plan.personas.push_back(SimNodeProfile::from_json(entry));
        }
    } else {
        throw std::runtime_error("plan: personas or personas_file required");
    }

    std::vector<std::string> labels;
    for (const auto& persona : plan.personas) {
        labels.push_back(persona.label);
    }

    const nlohmann::json deployments = j.value("deployments", nlohmann::json("all"));
    if (deployments.is_string()) {
        const std::string mode = deployments.get<std::string>();
        for (const auto& label : labels) {
            plan.deployments.push_back(DeploymentSpec{{label}});
        }
        if (mode == "all") {
            for (auto& combo : enumerate_combinations(labels)) {
                plan.deployments.push_back(std::move(combo));
            }
        } else if (mode == "singles") {
            // singles only
        } else if (mode == "singles+full") {
            plan.deployments.push_back(DeploymentSpec{labels});
        } else {
            throw std::runtime_error("plan: unknown deployments mode '" + mode + "'");
        }
    } else {
        for (const auto& entry : deployments) {
            DeploymentSpec spec;
            for (const auto& label : entry) {
                spec.personas.push_back(label.get<std::string>());
            }
            plan.deployments.push_back(std::move(spec));
        }
    }
    for (const auto& deployment : plan.deployments) {
        for (const auto& label : deployment.personas) {
            bool found = std::any_of(labels.begin(), labels.end(),
                                     [&](const std::string& l) { return l == label; });
            if (!found) {
                throw std::runtime_error("plan: deployment references unknown persona '" + label +
                                         "'");
            }
        }
    }

    if (j.contains("strategies_file")) {
        std::ifstream in(resolve_path(base_dir, j.at("strategies_file")));
        if (!in) {
            throw std::runtime_error("plan: cannot open strategies file");
        }
        plan.strategies = strategies_from_json(nlohmann::json::parse(in));
    } else if (j.contains("profiles")) {
        std::vector<ErrorProfile> profiles;
        for (const auto& entry : j.at("profiles")) {
            profiles.push_back(load_profile_file(resolve_path(base_dir, entry.get<std::string>())));
        }
        auto aggregated = aggregate(profiles);
        const int count = j.value("strategy_count", 20);
        const double amplification = j.value("amplification", 0.05);
        const auto mode = j.value("additive_amplification", false) ? Amplification::Additive
                                                                   : Amplification::Multiplicative;
        plan.strategies = synthesize(aggregated, count, amplification, mode);
    } else {
        throw std::runtime_error("plan: strategies_file or profiles required");
    }

    plan.behavior_map = j.contains("behavior_map_file")
                            ? FaultBehaviorMap::load_file(resolve_path(base_dir, j.at("behavior_map_file")))
                            : FaultBehaviorMap::builtin_default();

    if (j.contains("classifier")) {
        const auto& c = j.at("classifier");
        plan.classifier.timeliness_ms = c.value("timeliness_ms", plan.classifier.timeliness_ms);
        plan.classifier.freshness_blocks = c.value("freshness_blocks", plan.classifier.freshness_blocks);
    }
    if (j.contains("workload")) {
        const auto& w = j.at("workload");
        if (w.contains("kind")) {
            auto kind = workload_kind_from_string(w.at("kind").get<std::string>());
            if (!kind.has_value()) {
                throw std::runtime_error("plan: workload kind must be A or B");
            }
            plan.workload_kind = *kind;
        }
        plan.requests_per_cell = w.value("count", plan.requests_per_cell);
        plan.interval_ms = w.value("interval_ms", plan.interval_ms);
    }
    plan.base_seed = j.value("base_seed", plan.base_seed);
    plan.base_head = j.value("base_head", plan.base_head);
    plan.block_interval_s = j.value("block_interval_s", plan.block_interval_s);
    plan.workload_budget_ms = j.value("workload_budget_ms", plan.workload_budget_ms);
    return plan;
}

StateSnapshot snapshot_for_cell(const ExperimentPlan& plan, uint64_t cell_ordinal) {
    const double span_ms = static_cast<double>(plan.requests_per_cell) * plan.interval_ms;
    const uint64_t blocks_per_cell =
        static_cast<uint64_t>(std::ceil(span_ms / (plan.block_interval_s * 1000.0))) + 2;
    return StateSnapshot{plan.base_head + cell_ordinal * blocks_per_cell};
}

CellResult run_cell(const ExperimentPlan& plan, const DeploymentSpec& deployment,
                    const FaultInjectionStrategy& strategy, uint64_t cell_ordinal, bool keep_log) {
    CellResult result;
    result.key = CellKey{deployment.label(), strategy.index};
    try {
        const StateSnapshot snapshot = snapshot_for_cell(plan, cell_ordinal);
        auto chain = std::make_shared<ChainState>(snapshot.head, 0.0, plan.block_interval_s * 1000.0);

        const uint64_t deployment_hash = hash_str(deployment.label());
        std::vector<std::shared_ptr<SubNodeChannel>> channels;
        for (const auto& label : deployment.personas) {
            const SimNodeProfile* profile = plan.find_persona(label);
            if (profile == nullptr) {
                throw std::runtime_error("unknown persona: " + label);
            }
            const uint64_t node_seed = mix_seed(
                plan.base_seed, mix_seed(deployment_hash,
                                         mix_seed(hash_str(label),
                                                  static_cast<uint64_t>(strategy.index))));
            SimNodeFaultConfig fault = strategy_to_simconfig(strategy, plan.behavior_map, node_seed);
            auto node = std::make_shared<SimNodeCore>(label, *profile, chain, std::move(fault));
            channels.push_back(std::make_shared<InProcessChannel>(std::move(node)));
        }

        WorkloadSpec spec;
        spec.kind = plan.workload_kind;
        spec.total_requests = plan.requests_per_cell;
        spec.interval_ms = plan.interval_ms;
        spec.seed = mix_seed(plan.base_seed ^ 0x575eedf00dULL,
                             mix_seed(deployment_hash, static_cast<uint64_t>(strategy.index)));

        VerdictLog log;
        if (deployment.is_single()) {
            DirectTarget target(channels.front(), plan.effective_budget_ms());
            log = run_workload(spec, target, *chain, plan.classifier, 0.0);
        } else {
            ProxyConfig proxy_config;
            proxy_config.classifier = plan.classifier;
            auto proxy = std::make_shared<ProxyCore>(
                proxy_config, channels, [chain](double now_ms) { return chain->head_at(now_ms); });
            ProxyTarget target(std::move(proxy));
            log = run_workload(spec, target, *chain, plan.classifier, 0.0);
        }

        result.summary = summarize(log);
        if (keep_log) {
            result.log_jsonl = log.dump_jsonl();
        }
    } catch (const std::exception& e) {
        result.failed = true;
        result.failure_reason = e.what();
    }
    return result;
}

ExperimentReport run_matrix(const ExperimentPlan& plan, const RunOptions& options) {
    ExperimentReport report;
    for (const auto& deployment : plan.deployments) {
        report.deployments.push_back(deployment.label());
    }
    for (const auto& strategy : plan.strategies) {
        report.strategy_indices.push_back(strategy.index);
    }

    struct CellJob {
        const DeploymentSpec* deployment;
        const FaultInjectionStrategy* strategy;
        uint64_t ordinal;
    };
    std::vector<CellJob> jobs;
    uint64_t ordinal = 0;
    for (const auto& deployment : plan.deployments) {
        for (const auto& strategy : plan.strategies) {
            jobs.push_back(CellJob{&deployment, &strategy, ordinal++});
        }
    }

    std::vector<CellResult> results(jobs.size());
    const unsigned workers = std::max(1u, options.workers);
    if (workers == 1) {
        for (size_t i = 0; i < jobs.size(); ++i) {
            results[i] = run_cell(plan, *jobs[i].deployment, *jobs[i].strategy, jobs[i].ordinal,
                                  options.keep_logs);
        }
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const size_t i = next.fetch_add(1);
                    if (i >= jobs.size()) {
                        return;
                    }
                    results[i] = run_cell(plan, *jobs[i].deployment, *jobs[i].strategy,
                                          jobs[i].ordinal, options.keep_logs);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    for (auto& result : results) {
        report.cells.emplace(result.key, std::move(result));
    }

    for (const auto& deployment : report.deployments) {
        DeploymentAverages avg;
        uint64_t counted = 0;
        for (int strategy_index : report.strategy_indices) {
            const CellResult* cell = report.cell(deployment, strategy_index);
            if (cell == nullptr || cell->failed) {
                continue;
            }
            avg.available += cell->summary.available;
            avg.degraded += cell->summary.degraded;
            avg.unavailable += cell->summary.unavailable;
            ++counted;
        }
        if (counted > 0) {
            avg.available /= static_cast<double>(counted);
            avg.degraded /= static_cast<double>(counted);
            avg.unavailable /= static_cast<double>(counted);
        }
        report.averages[deployment] = avg;
    }
    return report;
}

const CellResult* ExperimentReport::cell(const std::string& deployment, int strategy_index) const {
    auto it = cells.find(CellKey{deployment, strategy_index});
    return it == cells.end() ? nullptr : &it->second;
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json cell_list = nlohmann::json::array();
    for (const auto& [key, result] : cells) {
        nlohmann::json entry{
            {"deployment", key.deployment},
            {"strategy", key.strategy_index},
            {"failed", result.failed},
        };
        if (result.failed) {
            entry["failure_reason"] = result.failure_reason;
        } else {
            entry["summary"] = result.summary.to_json();
        }
        cell_list.push_back(std::move(entry));
    }
    nlohmann::json averages_json = nlohmann::json::object();
    for (const auto& [deployment, avg] : averages) {
        averages_json[deployment] = nlohmann::json{{"available", avg.available},
                                                   {"degraded", avg.degraded},
                                                   {"unavailable", avg.unavailable}};
    }
    nlohmann::json resources = nlohmann::json::object();
    for (const auto& deployment : deployments) {
        // Resource metering is out of scope for the simulated harness.
        resources[deployment] = nlohmann::json{{"cpu_percent", nullptr},
                                               {"ram_gb", nullptr},
                                               {"disk_gb", nullptr},
                                               {"note", "not measured in simulation"}};
    }
    return nlohmann::json{
        {"deployments", deployments},
        {"strategies", strategy_indices},
        {"cells", std::move(cell_list)},
        {"averages", std::move(averages_json)},
        {"resources", std::move(resources)},
    };
}

std::string ExperimentReport::to_csv() const {
    std::ostringstream out;
    out << "strategy,deployment,available,degraded,unavailable\n";
    char buf[64];
    for (int strategy_index : strategy_indices) {
        for (const auto& deployment : deployments) {
            const CellResult* result = cell(deployment, strategy_index);
            if (result == nullptr || result->failed) {
                out << strategy_index << ',' << deployment << ",failed,failed,failed\n";
                continue;
            }
            std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f", result->summary.available,
                          result->summary.degraded, result->summary.unavailable);
            out << strategy_index << ',' << deployment << ',' << buf << '\n';
        }
    }
    return out.str();
}

std::vector<CsvCell> parse_matrix_csv(const std::string& csv) {
    std::vector<CsvCell> out;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        std::string strategy, deployment, available, degraded, unavailable;
        std::getline(fields, strategy, ',');
        std::getline(fields, deployment, ',');
        std::getline(fields, available, ',');
        std::getline(fields, degraded, ',');
        std::getline(fields, unavailable, ',');
        if (available == "failed") {
            continue;
        }
        CsvCell cell;
        cell.strategy_index = std::stoi(strategy);
        cell.deployment = deployment;
        cell.available = std::stod(available);
        cell.degraded = std::stod(degraded);
        cell.unavailable = std::stod(unavailable);
        out.push_back(std::move(cell));
    }
    return out;
}

std::string ExperimentReport::render_text() const {
    std::ostringstream out;
    char buf[128];

    // One column block of Available/Degraded/Unavailable per deployment; the
    // highest available rate in each row carries the best marker.
    out << "Availability rates per fault injection strategy\n";
    out << std::string(16 + deployments.size() * 34, '=') << '\n';
    std::snprintf(buf, sizeof(buf), "%-10s", "FI");
    out << buf;
    for (const auto& deployment : deployments) {
        std::snprintf(buf, sizeof(buf), " | %-31s", deployment.c_str());
        out << buf;
    }
    out << '\n';
    std::snprintf(buf, sizeof(buf), "%-10s", "");
    out << buf;
    for (size_t i = 0; i < deployments.size(); ++i) {
        std::snprintf(buf, sizeof(buf), " | %-9s %-9s %-11s", "Avail", "Degr", "Unavail");
        out << buf;
    }
    out << '\n';

    for (int strategy_index : strategy_indices) {
        double best_available = -1.0;
        for (const auto& deployment : deployments) {
            const CellResult* result = cell(deployment, strategy_index);
            if (result != nullptr && !result->failed) {
                best_available = std::max(best_available, result->summary.available);
            }
        }
        std::snprintf(buf, sizeof(buf), "FI %-7d", strategy_index);
        out << buf;
        for (const auto& deployment : deployments) {
            const CellResult* result = cell(deployment, strategy_index);
            if (result == nullptr || result->failed) {
                std::snprintf(buf, sizeof(buf), " | %-31s", "FAILED");
                out << buf;
                continue;
            }
            const bool best = result->summary.available == best_available;
            std::snprintf(buf, sizeof(buf), " | %8.4f%s %8.4f  %8.4f  ",
                          result->summary.available, best ? "*" : " ", result->summary.degraded,
                          result->summary.unavailable);
            out << buf;
        }
        out << '\n';
    }

    std::snprintf(buf, sizeof(buf), "%-10s", "Avg.");
    out << buf;
    for (const auto& deployment : deployments) {
        auto it = averages.find(deployment);
        if (it == averages.end()) {
            std::snprintf(buf, sizeof(buf), " | %-31s", "-");
            out << buf;
            continue;
        }
        std::snprintf(buf, sizeof(buf), " | %8.4f  %8.4f  %8.4f  ", it->second.available,
                      it->second.degraded, it->second.unavailable);
        out << buf;
    }
    out << '\n';
    out << "(*) highest available rate in the row\n";
    return out.str();
}

void write_report(const ExperimentReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream csv(fs::path(out_dir) / "matrix.csv");
        csv << report.to_csv();
    }
    {
        std::ofstream json(fs::path(out_dir) / "matrix.json");
        json << report.to_json().dump(2) << '\n';
    }
    {
        std::ofstream text(fs::path(out_dir) / "tables.txt");
        text << report.render_text();
    }
    for (const auto& [key, result] : report.cells) {
        if (result.log_jsonl.empty()) {
            continue;
        }
        std::string name = key.deployment;
        std::replace(name.begin(), name.end(), '+', '-');
        std::ostringstream file;
        file << name << "_fi" << key.strategy_index << ".jsonl";
        std::ofstream log(fs::path(out_dir) / file.str());
        log << result.log_jsonl;
    }
}

}  // namespace nvgate
