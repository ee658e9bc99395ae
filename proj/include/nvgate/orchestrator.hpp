// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvgate/faultgen.hpp"
#include "nvgate/simnode.hpp"
#include "nvgate/workload.hpp"

namespace nvgate {

// One deployment topology: a single persona or an n-version ensemble.
struct DeploymentSpec {
    std::vector<std::string> personas;

    bool is_single() const { return personas.size() == 1; }
    std::string label() const;
};

// All sub-node combinations of the persona set with 2 <= n <= |set|,
// enumerated in a stable order (by size, then lexicographic positions).
// Four personas yield 6 + 4 + 1 = 11 combinations.
std::vector<DeploymentSpec> enumerate_combinations(const std::vector<std::string>& personas);

// Serialized chain state captured before a cell runs: restoring it starts
// the cell's nodes at exactly these heads, so no fault effects leak across
// cells.
struct StateSnapshot {
    uint64_t head = 0;
};

struct ExperimentPlan {
    std::vector<SimNodeProfile> personas;
    std::vector<DeploymentSpec> deployments;
    std::vector<FaultInjectionStrategy> strategies;
    FaultBehaviorMap behavior_map;
    ClassifierConfig classifier;
    WorkloadKind workload_kind = WorkloadKind::B;
    uint64_t requests_per_cell = 10'000;
    double interval_ms = 5.0;
    uint64_t base_seed = 42;
    uint64_t base_head = 0xa55e27;
    double block_interval_s = 1.0;
    double workload_budget_ms = 0.0;  // 0: twice the timeliness bound

    double effective_budget_ms() const {
        return workload_budget_ms > 0.0 ? workload_budget_ms : 2.0 * classifier.timeliness_ms;
    }

    const SimNodeProfile* find_persona(const std::string& label) const;

    // Loads a plan file; relative file references (personas, profiles,
    // strategies, behavior map) resolve against the plan's directory.
    static ExperimentPlan load_file(const std::string& path);
    static ExperimentPlan from_json(const nlohmann::json& j, const std::string& base_dir);
};

struct CellKey {
    std::string deployment;
    int strategy_index = 0;

    bool operator<(const CellKey& other) const {
        if (deployment != other.deployment) return deployment < other.deployment;
        return strategy_index < other.strategy_index;
    }
};

struct CellResult {
    CellKey key;
    bool failed = false;
    std::string failure_reason;
    Summary summary;
    std::string log_jsonl;  // retained when the run keeps logs
};

struct RunOptions {
    unsigned workers = 1;
    bool keep_logs = false;
};

// Deterministic state snapshot for a cell: the chain advances between cells
// by each cell's span, keyed by the cell's stable ordinal (not execution
// order), so shuffling or parallelizing cells cannot change any cell's
// input.
StateSnapshot snapshot_for_cell(const ExperimentPlan& plan, uint64_t cell_ordinal);

// Runs one deployment x strategy cell on virtual time: restores the
// snapshot, boots fresh nodes with the strategy applied, drives the
// workload, summarizes. Failures are captured in the result, never skipped.
CellResult run_cell(const ExperimentPlan& plan, const DeploymentSpec& deployment,
                    const FaultInjectionStrategy& strategy, uint64_t cell_ordinal, bool keep_log);

struct DeploymentAverages {
    double available = 0.0;
    double degraded = 0.0;
    double unavailable = 0.0;
};

struct ExperimentReport {
    std::vector<std::string> deployments;     // column order
    std::vector<int> strategy_indices;        // row order
    std::map<CellKey, CellResult> cells;
    std::map<std::string, DeploymentAverages> averages;

    const CellResult* cell(const std::string& deployment, int strategy_index) const;

    nlohmann::json to_json() const;
    std::string to_csv() const;
    std::string render_text() const;
};

// Rows parsed back from the CSV shape (strategy, deployment, rates).
struct CsvCell {
    int strategy_index = 0;
    std::string deployment;
    double available = 0.0;
    double degraded = 0.0;
    double unavailable = 0.0;
};
std::vector<CsvCell> parse_matrix_csv(const std::string& csv);

ExperimentReport run_matrix(const ExperimentPlan& plan, const RunOptions& options = {});

// Writes matrix.csv, matrix.json, tables.txt, and per-cell verdict logs
// (when retained) under out_dir.
void write_report(const ExperimentReport& report, const std::string& out_dir);

}  // namespace nvgate
