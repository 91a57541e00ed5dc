#pragma once

#include "ram/auction.hpp"
#include "ram/domain.hpp"
#include "ram/policy.hpp"
#include "ram/state_encoder.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

namespace ram {

/// Synthetic environment settings. Zero `quality_hazard` / `dwell_scale`
/// request calibration against the behavior policy at construction.
struct EnvConfig {
    std::uint64_t seed = 2019;

    int num_items = 3000;
    int num_ads = 300;
    int num_users = 1000;
    int topics = 4;

    int rec_pool = 15;
    int ad_pool = 5;
    int k = 6;
    int max_requests = 12;  // T_max, warm-up included
    int warmup_requests = 3;
    int history_cap = 20;

    // affinity logit = quality_weight*(q-0.5) + topic_weight*(fav - 1/topics) + taste_weight*<w, x-0.5>
    double quality_weight = 6.0;
    double topic_weight = 3.0;
    double taste_weight = 3.0;
    double position_decay = 0.15;
    double dwell_shape = 4.0;  // gamma noise around the expected dwell

    // continue probability = p_max * 2 * sigmoid(-hazard)
    double p_max = 0.99;
    double quality_hazard = 0.0;
    double ad_hazard = 0.5;
    double fatigue_hazard = 0.01;
    // slot intrusiveness falls linearly from the first slot to the appended slot
    double intrusiveness_first = 2.0;
    double intrusiveness_last = 0.2;
    // ad affinity logit = tolerance + ad_recall_weight*(recall-0.5) - ad_bid_weight*ln(bid)
    double ad_recall_weight = 3.0;
    double ad_bid_weight = 1.5;
    double dwell_scale = 0.0;
    // RS reward branch; "income" is accepted as an alias of the dwell-time reward
    std::string rs_reward = "dwell";

    // calibration targets under the behavior policy
    double target_mean_length = 8.40;   // requests per session
    double target_step_dwell = 2.1407;  // minutes per request
    int calibration_sessions = 2000;

    int recall_shortlist = 60;
    double recall_temperature = 1.0;

    double bid_lo = 0.3;
    double bid_hi = 3.0;
    RevenueSettings revenue;

    double behavior_p_ad = 0.5523;
    double behavior_temperature = 3.0;

    void validate() const;
};

struct UserProfile {
    int id = 0;
    int favorite_topic = 0;
    std::array<double, kScoreCount> taste{};
    double ad_tolerance = 0.0;
    int app_version = 0;
    int os = 0;
};

/// Mutable per-session state; the environment itself stays const.
struct SessionState {
    std::int64_t session = 0;
    int user = 0;
    int t = 0;
    BrowsingHistory history;
    Context context;
    std::unordered_set<int> shown;
    int ads_shown = 0;
    bool finished = false;
    std::mt19937_64 rng;
};

struct StepOutcome {
    double dwell = 0.0;
    bool cont = false;
    double revenue = 0.0;
    bool clicked = false;
    bool terminal = false;
    double expected_dwell = 0.0;
    double continue_probability = 0.0;
};

class Environment {
public:
    explicit Environment(EnvConfig config);

    /// Effective config, calibrated values filled in.
    const EnvConfig& config() const noexcept { return config_; }
    const Catalog& catalog() const noexcept { return catalog_; }
    const std::vector<UserProfile>& users() const noexcept { return users_; }

    SessionState start_session(std::int64_t session, std::uint64_t session_seed) const;

    /// 15 regular + 5 ad candidates, preference-biased, excluding items shown this session.
    Request recall_candidates(SessionState& state) const;

    /// Draws dwell, continue and revenue for the hybrid list without touching history.
    StepOutcome simulate_response(SessionState& state, const Request& request, const std::vector<int>& rec_list,
                                  const AdAction& ad) const;

    /// simulate_response, then history transition, context refresh and termination bookkeeping.
    StepOutcome step(SessionState& state, const Request& request, const Decision& decision) const;

    double affinity(int user, int item) const;
    double ad_affinity(int user, int ad) const;
    /// Position-weighted mean affinity of the rec items; an ad pushes later items down one position.
    double list_match(int user, const std::vector<int>& rec_list, const AdAction& ad) const;
    double expected_dwell(double match) const { return config_.dwell_scale * match; }
    /// p_max * 2*sigmoid(-hazard), hazard = quality_hazard*(1-match) + ad terms; NO_AD with match 1 gives p_max.
    double continue_probability(double match, const AdAction& ad, double ad_affinity, int ads_shown) const;
    double slot_intrusiveness(int head) const;

    void check_decision(const Request& request, const Decision& decision) const;

private:
    void build_world();
    void calibrate();
    Context draw_context(const UserProfile& user, std::mt19937_64& rng) const;

    EnvConfig config_;
    Catalog catalog_;
    std::vector<UserProfile> users_;
    std::vector<int> item_topic_;
};

/// Logged production policy: score-weighted rec sampling without replacement;
/// inserts an ad with probability p_ad at a uniform slot, ad sampled by bid.
class BehaviorPolicy final : public Policy {
public:
    BehaviorPolicy(const Catalog& catalog, int k, double p_ad, double temperature);
    Decision decide(const PolicyInput& input, std::mt19937_64& rng) const override;
    std::string name() const override { return "behavior"; }

private:
    const Catalog* catalog_;
    int k_;
    double p_ad_;
    double temperature_;
};

/// Weighted sampling without replacement (exponential keys); returns `count` picks in draw order.
std::vector<int> weighted_sample(const std::vector<int>& ids, const std::vector<double>& weights, int count,
                                 std::mt19937_64& rng);

/// M sessions under `behavior`, seeded from (config seed, session index).
std::vector<SessionLogRecord> generate_log(const Environment& env, const Policy& behavior, int sessions);

}  // namespace ram
