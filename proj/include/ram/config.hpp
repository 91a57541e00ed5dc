#pragma once

#include "ram/env_sim.hpp"
#include "ram/state_encoder.hpp"
#include "ram/trainer.hpp"

#include <filesystem>
#include <string>

namespace ram {

struct BiddingConfig {
    std::string variant = "ram-l";
    double alpha = 0.5;
    int n = 2;

    BiddingRule rule() const { return parse_bidding_rule(variant, alpha, n); }
};

struct RunConfig {
    EnvConfig env;
    NetDims net;
    TrainConfig train;
    BiddingConfig bidding;
    int log_sessions = 2000;
    int test_sessions = 500;

    /// Cross-section checks plus each section's own validation.
    void validate() const;
};

/// JSON object with optional sections "env", "net", "train", "bidding" and
/// top-level "log_sessions", "test_sessions". Unknown keys are a ConfigError.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Every field, pretty-printed; parse_run_config(dump_run_config(c)) == c.
std::string dump_run_config(const RunConfig& config);

}  // namespace ram
