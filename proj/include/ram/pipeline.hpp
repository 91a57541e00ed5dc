#pragma once

#include "ram/config.hpp"
#include "ram/env_sim.hpp"
#include "ram/policies.hpp"
#include "ram/trainer.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace ram {

/// World, behavior policy and logged sessions for one RunConfig.
struct Dataset {
    std::unique_ptr<Environment> env;
    std::unique_ptr<BehaviorPolicy> behavior;
    std::vector<SessionLogRecord> log;
};

Dataset build_dataset(const RunConfig& config);

/// Writes items.csv, ads.csv, sessions.jsonl and a stats.json summary.
void save_dataset(const std::filesystem::path& dir, const Dataset& data);

struct DatasetStats {
    std::size_t sessions = 0;
    std::size_t records = 0;
    double mean_length = 0.0;
    double ad_fraction = 0.0;
    double mean_step_dwell = 0.0;
};

DatasetStats dataset_stats(const std::vector<SessionLogRecord>& log);

struct Agents {
    RsAgent rs;
    AsAgent as;
    TrainProgress progress;
};

/// Fresh agents seeded from the training seed.
Agents make_agents(const RunConfig& config, const Catalog& catalog);

TrainResult train_agents(const RunConfig& config, const Catalog& catalog, const std::vector<SessionLogRecord>& log,
                         Agents& agents, const EpochCallback& on_epoch = {});

/// Checkpoint: progress counters followed by both agents.
void save_checkpoint(const std::filesystem::path& path, const Agents& agents);
void load_checkpoint(const std::filesystem::path& path, Agents& agents);

std::string curve_csv(const std::vector<CurveRecord>& curve);

struct EvalRow {
    std::string policy;
    std::string parameter;  // sweep parameter label, empty for plain evals
    double value = 0.0;
    MetricSummary metrics;
};

/// Online test of `policy` on the config's test sessions (behavior warm-up, common seeds).
MetricSummary evaluate(const RunConfig& config, const Environment& env, const Policy& behavior,
                       const Policy& policy);

/// Mean ± std table in the R_rs / R_as / R_rev layout.
std::string metrics_table(const std::vector<EvalRow>& rows);
std::string metrics_jsonl(const std::vector<EvalRow>& rows);

/// Spearman rank correlation with average ranks for ties; 0 when either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ram
