#pragma once

#include "ram/as_agent.hpp"
#include "ram/env_sim.hpp"
#include "ram/replay_buffer.hpp"
#include "ram/rs_agent.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ram {

struct TrainConfig {
    double gamma = 0.95;
    int batch_size = 32;
    double lr_rs = 1e-3;
    double lr_as = 1e-3;
    int target_sync = 100;  // optimizer steps between hard target copies
    int epochs = 3;         // passes over the log
    std::size_t buffer_capacity = 10000;
    nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
    int log_interval = 100;  // updates per interval curve row
    int update_every = 1;    // logged steps per minibatch update
    std::uint64_t seed = 2019;
    BiddingRule rule;  // used for the ad bootstrap action
    RevenueSettings revenue;

    void validate() const;
};

/// One transition per log record; next state and pools come from the following record.
std::vector<Transition> transitions_from_log(const std::vector<SessionLogRecord>& log, std::size_t history_cap);

struct Targets {
    double y_rs = 0.0;
    double y_as = 0.0;
    std::vector<int> next_rec_list;  // a'^rs, empty when terminal
    AdAction next_ad;
    double next_rs_value = 0.0;
    double next_as_value = 0.0;
};

/// Bootstrap targets for one transition from the target networks only.
Targets compute_targets(const RsAgent& rs, const AsAgent& as, const Catalog& catalog, const Transition& t,
                        double gamma, const BiddingRule& rule, const RevenueSettings& revenue);

struct CurveRecord {
    std::string kind;  // "interval" or "epoch"
    int epoch = 0;
    std::uint64_t step = 0;  // optimizer updates so far
    double loss_rs = 0.0;
    double loss_as = 0.0;
    std::size_t updates = 0;  // updates averaged into this row
};

/// Counters that survive checkpoints.
struct TrainProgress {
    std::uint64_t updates = 0;
    std::uint64_t syncs = 0;
    int epochs_completed = 0;
};

struct TrainResult {
    std::vector<CurveRecord> curve;
    std::size_t max_buffer_size = 0;
};

using EpochCallback = std::function<void(const TrainProgress&)>;

/// Off-policy training over the logged transitions, replayed for the remaining epochs.
/// Resuming at epoch e first refills the buffer exactly as it stood after epoch e-1.
TrainResult train_offpolicy(const Catalog& catalog, std::span<const Transition> transitions,
                            const TrainConfig& config, RsAgent& rs, AsAgent& as, TrainProgress& progress,
                            const EpochCallback& on_epoch = {});

struct StepTrace {
    double r_rs = 0.0;
    int r_as = 0;
    double revenue = 0.0;
};

struct SessionMetrics {
    double r_rs = 0.0;
    double r_as = 0.0;
    double r_rev = 0.0;
    int length = 0;  // requests including warm-up
};

/// Plain sums over the trace.
SessionMetrics compute_session_metrics(std::span<const StepTrace> trace);

struct SessionRun {
    SessionMetrics metrics;
    std::vector<StepTrace> trace;  // policy steps only
    int leaves = 0;
};

/// Warm-up requests are served by `warmup` and excluded from the metrics;
/// the policy then acts greedily until leave or T_max. Sessions use common seeds
/// across policies.
std::vector<SessionRun> run_online_test(const Environment& env, const Policy& policy, const Policy& warmup,
                                        int sessions, std::uint64_t seed);

struct MetricSummary {
    double rs_mean = 0.0, rs_std = 0.0;
    double as_mean = 0.0, as_std = 0.0;
    double rev_mean = 0.0, rev_std = 0.0;
    std::size_t sessions = 0;
};

MetricSummary summarize(std::span<const SessionRun> runs);

}  // namespace ram
