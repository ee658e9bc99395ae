// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0
//
// nvgate: n-version JSON-RPC gateway harness.
//
//   nvgate synth       synthesize fault injection strategies from profiles
//   nvgate simnode     serve one simulated sub-node over HTTP
//   nvgate proxy       run the n-version gateway over HTTP sub-nodes
//   nvgate workload    drive and summarize measurement workloads
//   nvgate experiment  run a deployment x strategy matrix and render reports

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "nvgate/channels.hpp"
#include "nvgate/methods.hpp"
#include "nvgate/net/http.hpp"
#include "nvgate/orchestrator.hpp"
#include "nvgate/proxy_server.hpp"
#include "nvgate/simnode_server.hpp"

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) {
    g_stop.store(true);
}

struct SynthArgs {
    std::vector<std::string> profiles;
    std::string out;
    int count = 20;
    double amplification = 0.05;
    bool additive = false;
};

int run_synth(const SynthArgs& args) {
    std::vector<nvgate::ErrorProfile> profiles;
    for (const auto& path : args.profiles) {
        profiles.push_back(nvgate::load_profile_file(path));
    }
    auto aggregated = nvgate::aggregate(profiles);
    auto strategies = nvgate::synthesize(aggregated, args.count, args.amplification,
                                         args.additive ? nvgate::Amplification::Additive
                                                       : nvgate::Amplification::Multiplicative);
    const auto doc = nvgate::strategies_to_json(strategies);
    if (args.out.empty()) {
        std::cout << doc.dump(2) << '\n';
    } else {
        std::ofstream out(args.out);
        if (!out) {
            std::cerr << "cannot write " << args.out << '\n';
            return 1;
        }
        out << doc.dump(2) << '\n';
        std::cout << "wrote " << strategies.size() << " strategies to " << args.out << '\n';
    }
    return 0;
}

struct SimNodeArgs {
    int port = 8601;
    std::string personas_file;
    std::string persona = "geth-like";
    std::string fault_config_file;
    uint64_t seed = 1;
    uint64_t base_head = 0xa55e27;
    double block_interval_s = 12.0;
};

int run_simnode(const SimNodeArgs& args) {
    nvgate::SimNodeProfile profile;
    profile.label = args.persona;
    if (!args.personas_file.empty()) {
        bool found = false;
        for (auto& candidate : nvgate::load_personas_file(args.personas_file)) {
            if (candidate.label == args.persona) {
                profile = candidate;
                found = true;
                break;
            }
        }
        if (!found) {
            std::cerr << "persona '" << args.persona << "' not in " << args.personas_file << '\n';
            return 1;
        }
    }
    nvgate::SimNodeFaultConfig fault;
    fault.seed = args.seed;
    if (!args.fault_config_file.empty()) {
        std::ifstream in(args.fault_config_file);
        if (!in) {
            std::cerr << "cannot open " << args.fault_config_file << '\n';
            return 1;
        }
        fault = nvgate::SimNodeFaultConfig::from_json(
            nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true));
    }

    auto clock = std::make_shared<nvgate::SystemClock>();
    auto chain = std::make_shared<nvgate::ChainState>(args.base_head, clock->now_ms(),
                                                      args.block_interval_s * 1000.0);
    auto core = std::make_shared<nvgate::SimNodeCore>(profile.label, profile, chain, fault);
    nvgate::SimNodeServer server(core, clock, args.port);
    if (!server.start()) {
        std::cerr << "cannot bind port " << args.port << '\n';
        return 1;
    }
    std::cout << "simnode '" << profile.label << "' listening on 127.0.0.1:" << server.port()
              << " (head " << nvgate::to_hex_quantity(chain->head_at(clock->now_ms())) << ")\n";
    while (!g_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    server.stop();
    return 0;
}

struct ProxyArgs {
    std::string config_file;
};

int run_proxy(const ProxyArgs& args) {
    auto config = nvgate::ProxyServerConfig::load_file(args.config_file);
    auto clock = std::make_shared<nvgate::SystemClock>();
    nvgate::ProxyServer server(config, clock);
    if (!server.start()) {
        std::cerr << "cannot bind port " << config.listen_port << '\n';
        return 1;
    }
    std::cout << "proxy listening on 127.0.0.1:" << config.listen_port << " with "
              << config.sub_nodes.size() << " sub-nodes\n";
    while (!g_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    server.stop();
    return 0;
}

struct WorkloadArgs {
    std::string kind = "B";
    std::string target;
    uint64_t count = 1000;
    double interval_ms = 5.0;
    uint64_t seed = 1;
    std::string out = "log.jsonl";
    std::string oracle_url;
    double timeliness_ms = 100.0;
    uint64_t freshness_blocks = 2;
    double budget_ms = 0.0;
    std::string summary_json;
    std::string summary_csv;
};

// Open-loop wall-clock driver: requests leave on schedule, slow responses
// only delay their own verdicts.
int run_workload_http(const WorkloadArgs& args) {
    auto kind = nvgate::workload_kind_from_string(args.kind);
    if (!kind.has_value()) {
        std::cerr << "workload kind must be A or B\n";
        return 1;
    }
    auto url = nvgate::net::parse_url(args.target);
    if (!url.has_value()) {
        std::cerr << "bad target url: " << args.target << '\n';
        return 1;
    }
    std::optional<nvgate::net::ParsedUrl> oracle_url;
    if (!args.oracle_url.empty()) {
        oracle_url = nvgate::net::parse_url(args.oracle_url);
        if (!oracle_url.has_value()) {
            std::cerr << "bad oracle url\n";
            return 1;
        }
    }

    nvgate::WorkloadSpec spec;
    spec.kind = *kind;
    spec.total_requests = args.count;
    spec.interval_ms = args.interval_ms;
    spec.seed = args.seed;
    spec.target = args.target;

    const nvgate::ClassifierConfig classifier{args.timeliness_ms, args.freshness_blocks};
    const double budget = args.budget_ms > 0.0 ? args.budget_ms : 2.0 * args.timeliness_ms;

    auto fetch_oracle_head = [&]() -> uint64_t {
        if (!oracle_url.has_value()) {
            return 0;
        }
        auto result = nvgate::net::get(oracle_url->host, oracle_url->port, oracle_url->path, 250.0);
        if (result.response.has_value() && result.response->status == 200) {
            try {
                return nlohmann::json::parse(result.response->body).at("head").get<uint64_t>();
            } catch (const std::exception&) {
            }
        }
        return 0;
    };

    struct Slot {
        nvgate::VerdictRecord record;
        bool done = false;
    };
    std::vector<Slot> slots(args.count);
    std::vector<std::thread> inflight;
    inflight.reserve(args.count);

    const auto t0 = std::chrono::steady_clock::now();
    for (uint64_t i = 1; i <= args.count && !g_stop.load(); ++i) {
        const auto scheduled =
            t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                     std::chrono::duration<double, std::milli>((double)(i - 1) * args.interval_ms));
        std::this_thread::sleep_until(scheduled);
        const double now_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        const uint64_t head_hint = fetch_oracle_head();
        nvgate::RpcRequest req = nvgate::make_request(spec, i, head_hint);

        inflight.emplace_back([&, i, req, now_ms] {
            auto result = nvgate::net::post_json(url->host, url->port, url->path, req.dump(), budget);
            nvgate::RpcExchange exchange;
            double end_to_end = result.elapsed_ms;
            if (result.error.has_value()) {
                exchange = nvgate::RpcExchange::with_error(req, *result.error, result.elapsed_ms,
                                                           now_ms);
            } else if (result.response->status != 200) {
                auto kind_header = result.response->header("X-Error-Kind");
                auto err = kind_header.has_value()
                               ? nvgate::transport_error_from_string(*kind_header)
                               : std::nullopt;
                exchange = nvgate::RpcExchange::with_error(
                    req, err.value_or(nvgate::TransportErrorKind::Eof), result.elapsed_ms, now_ms);
            } else {
                double t_r = result.elapsed_ms;
                if (auto attempt = result.response->header("X-Attempt-Ms")) {
                    try {
                        t_r = std::stod(*attempt);
                    } catch (const std::exception&) {
                    }
                }
                if (auto sub = result.response->header("X-Subnode-Id")) {
                    exchange = nvgate::RpcExchange::with_body(req, result.response->body, t_r,
                                                              now_ms, *sub);
                } else {
                    exchange = nvgate::RpcExchange::with_body(req, result.response->body, t_r, now_ms);
                }
            }
            const auto verdict = nvgate::classify(exchange, fetch_oracle_head(), classifier);
            nvgate::VerdictRecord record;
            record.request_id = i;
            record.sent_at_ms = now_ms;
            record.node_id = exchange.sub_node_id;
            record.method = req.method;
            record.verdict = verdict;
            if (exchange.error.has_value()) {
                record.error = exchange.error;
            } else if (!verdict.compliant) {
                record.error = nvgate::diagnose_body_defect(*exchange.raw_response);
            }
            record.end_to_end_ms = end_to_end;
            slots[i - 1].record = std::move(record);
            slots[i - 1].done = true;
        });
    }
    for (auto& t : inflight) {
        t.join();
    }

    nvgate::VerdictLog log;
    for (auto& slot : slots) {
        if (slot.done) {
            log.append(std::move(slot.record));
        }
    }
    {
        std::ofstream out(args.out);
        if (!out) {
            std::cerr << "cannot write " << args.out << '\n';
            return 1;
        }
        log.write_jsonl(out);
    }
    if (log.size() == 0) {
        std::cerr << "no requests issued\n";
        return 1;
    }
    const auto summary = nvgate::summarize(log);
    std::cout << "requests " << summary.total << "  available " << summary.available
              << "  degraded " << summary.degraded << "  unavailable " << summary.unavailable
              << '\n';
    if (!args.summary_json.empty()) {
        std::ofstream out(args.summary_json);
        out << summary.to_json().dump(2) << '\n';
    }
    if (!args.summary_csv.empty()) {
        std::ofstream out(args.summary_csv);
        out << "deployment,available,degraded,unavailable\n";
        out << args.target << ',' << summary.available << ',' << summary.degraded << ','
            << summary.unavailable << '\n';
    }
    return 0;
}

int run_summarize(const std::string& log_path, const std::string& json_out,
                  const std::string& csv_out) {
    std::ifstream in(log_path);
    if (!in) {
        std::cerr << "cannot open " << log_path << '\n';
        return 1;
    }
    const auto log = nvgate::VerdictLog::load_jsonl(in);
    if (log.size() == 0) {
        std::cerr << "log is empty\n";
        return 1;
    }
    const auto summary = nvgate::summarize(log);
    std::cout << summary.to_json().dump(2) << '\n';
    if (!json_out.empty()) {
        std::ofstream out(json_out);
        out << summary.to_json().dump(2) << '\n';
    }
    if (!csv_out.empty()) {
        std::ofstream out(csv_out);
        out << "available,degraded,unavailable\n"
            << summary.available << ',' << summary.degraded << ',' << summary.unavailable << '\n';
    }
    return 0;
}

struct ExperimentArgs {
    std::string plan;
    std::string out = "report";
    bool paper_scale = false;
    bool wall_clock = false;
    unsigned workers = std::thread::hardware_concurrency();
    bool keep_logs = false;
};

int run_experiment(const ExperimentArgs& args) {
    auto plan = nvgate::ExperimentPlan::load_file(args.plan);
    if (args.paper_scale) {
        plan.requests_per_cell = 360'000;
        plan.block_interval_s = 12.0;
    }
    if (args.wall_clock) {
        std::cerr << "wall-clock matrix execution is not supported; virtual time is used for "
                     "experiment cells. Start `nvgate simnode`/`nvgate proxy` and drive them with "
                     "`nvgate workload run` for wall-clock measurements.\n";
    }
    nvgate::RunOptions options;
    options.workers = std::max(1u, args.workers);
    options.keep_logs = args.keep_logs;

    const auto started = std::chrono::steady_clock::now();
    const auto report = nvgate::run_matrix(plan, options);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    nvgate::write_report(report, args.out);
    std::cout << report.render_text() << '\n';
    uint64_t failed = 0;
    for (const auto& [key, cell] : report.cells) {
        if (cell.failed) {
            ++failed;
            std::cout << "FAILED cell " << key.deployment << " FI " << key.strategy_index << ": "
                      << cell.failure_reason << '\n';
        }
    }
    std::cout << report.cells.size() << " cells in " << elapsed << " s, " << failed
              << " failed; report written to " << args.out << '\n';
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    CLI::App app{"n-version JSON-RPC gateway harness"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "synthesize fault injection strategies");
    synth->add_option("--profiles", synth_args.profiles, "error profile files")->required();
    synth->add_option("--out", synth_args.out, "output strategies JSON path");
    synth->add_option("--count", synth_args.count, "number of strategies");
    synth->add_option("--amplification", synth_args.amplification, "amplification factor");
    synth->add_flag("--additive", synth_args.additive, "amplify additively instead of multiplicatively");

    SimNodeArgs simnode_args;
    auto* simnode = app.add_subcommand("simnode", "serve one simulated sub-node");
    simnode->add_option("--port", simnode_args.port, "listen port");
    simnode->add_option("--personas", simnode_args.personas_file, "personas JSON file");
    simnode->add_option("--persona", simnode_args.persona, "persona label");
    simnode->add_option("--fault-config", simnode_args.fault_config_file, "fault config JSON file");
    simnode->add_option("--seed", simnode_args.seed, "fault schedule seed");
    simnode->add_option("--base-head", simnode_args.base_head, "chain head at startup");
    simnode->add_option("--block-interval-s", simnode_args.block_interval_s, "seconds per block");

    ProxyArgs proxy_args;
    auto* proxy = app.add_subcommand("proxy", "run the n-version gateway");
    proxy->add_option("--config", proxy_args.config_file, "proxy config JSON file")->required();

    auto* workload = app.add_subcommand("workload", "measurement workloads");
    workload->require_subcommand(1);
    WorkloadArgs workload_args;
    auto* workload_run = workload->add_subcommand("run", "drive a target and record verdicts");
    workload_run->add_option("--kind", workload_args.kind, "A or B");
    workload_run->add_option("--target", workload_args.target, "target URL")->required();
    workload_run->add_option("--count", workload_args.count, "request count");
    workload_run->add_option("--interval-ms", workload_args.interval_ms, "inter-request spacing");
    workload_run->add_option("--seed", workload_args.seed, "sampler seed");
    workload_run->add_option("--out", workload_args.out, "verdict log path (jsonl)");
    workload_run->add_option("--oracle", workload_args.oracle_url, "oracle control URL");
    workload_run->add_option("--t-ms", workload_args.timeliness_ms, "timeliness bound T");
    workload_run->add_option("--f-blocks", workload_args.freshness_blocks, "freshness bound F");
    workload_run->add_option("--budget-ms", workload_args.budget_ms, "client timeout per request");
    workload_run->add_option("--summary-json", workload_args.summary_json, "summary JSON path");
    workload_run->add_option("--summary-csv", workload_args.summary_csv, "summary CSV path");

    std::string summarize_log, summarize_json, summarize_csv;
    auto* workload_summarize = workload->add_subcommand("summarize", "summarize a verdict log");
    workload_summarize->add_option("--log", summarize_log, "verdict log path")->required();
    workload_summarize->add_option("--json", summarize_json, "summary JSON output");
    workload_summarize->add_option("--csv", summarize_csv, "summary CSV output");

    ExperimentArgs experiment_args;
    auto* experiment = app.add_subcommand("experiment", "run a deployment x strategy matrix");
    experiment->add_option("--plan", experiment_args.plan, "plan JSON file")->required();
    experiment->add_option("--out", experiment_args.out, "report directory");
    experiment->add_flag("--paper-scale", experiment_args.paper_scale,
                         "360000 requests per cell at 12 s blocks");
    experiment->add_flag("--wall-clock", experiment_args.wall_clock,
                         "acknowledge wall-clock mode (see help)");
    experiment->add_option("--workers", experiment_args.workers, "parallel cell workers");
    experiment->add_flag("--keep-logs", experiment_args.keep_logs, "write per-cell verdict logs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synth(synth_args);
        if (simnode->parsed()) return run_simnode(simnode_args);
        if (proxy->parsed()) return run_proxy(proxy_args);
        if (workload->parsed()) {
            if (workload_run->parsed()) return run_workload_http(workload_args);
            if (workload_summarize->parsed())
                return run_summarize(summarize_log, summarize_json, summarize_csv);
        }
        if (experiment->parsed()) return run_experiment(experiment_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
