#include "ram/env_sim.hpp"

#include "ram/errors.hpp"
#include "ram/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace ram {

namespace {

double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

double uniform(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::exp(std::log(lo) + uniform(rng) * (std::log(hi) - std::log(lo)));
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("env config: " + what);
}

}  // namespace

void EnvConfig::validate() const {
    require(num_items > 0 && num_ads > 0 && num_users > 0, "catalog sizes must be positive");
    require(topics >= 1, "topics must be >= 1");
    require(k >= 1, "k must be >= 1");
    require(rec_pool >= k, "rec_pool must be >= k");
    require(ad_pool >= 1, "ad_pool must be >= 1");
    require(recall_shortlist >= rec_pool, "recall_shortlist must be >= rec_pool");
    require(max_requests >= 1, "max_requests must be >= 1");
    require(warmup_requests >= 0 && warmup_requests < max_requests, "warmup_requests must be in [0, max_requests)");
    require(history_cap >= 1, "history_cap must be >= 1");
    require(rs_reward == "dwell" || rs_reward == "income", "rs_reward must be dwell or income");
    require(num_items >= recall_shortlist + max_requests * k,
            "num_items too small for recall without repeats (need recall_shortlist + max_requests*k)");
    require(num_ads >= ad_pool, "num_ads must be >= ad_pool");
    require(p_max > 0.0 && p_max <= 1.0, "p_max must be in (0, 1]");
    require(quality_hazard >= 0.0 && ad_hazard >= 0.0 && fatigue_hazard >= 0.0, "hazards must be >= 0");
    require(dwell_scale >= 0.0 && dwell_shape > 0.0, "dwell_scale >= 0 and dwell_shape > 0");
    require(position_decay >= 0.0, "position_decay must be >= 0");
    require(intrusiveness_first >= 0.0 && intrusiveness_last >= 0.0, "intrusiveness must be >= 0");
    require(bid_lo > 0.0 && bid_hi > bid_lo, "need 0 < bid_lo < bid_hi");
    require(behavior_p_ad >= 0.0 && behavior_p_ad <= 1.0, "behavior_p_ad must be in [0, 1]");
    require(revenue.reserve_price >= 0.0, "reserve_price must be >= 0");
    require(target_mean_length >= 1.0 && target_mean_length <= max_requests,
            "target_mean_length must be in [1, max_requests]");
    require(target_step_dwell > 0.0, "target_step_dwell must be > 0");
    require(calibration_sessions >= 1, "calibration_sessions must be >= 1");
}

Environment::Environment(EnvConfig config) : config_(std::move(config)) {
    config_.validate();
    build_world();
    if (config_.quality_hazard == 0.0 || config_.dwell_scale == 0.0) calibrate();
}

void Environment::build_world() {
    std::mt19937_64 rng(derive_seed(config_.seed, seed_stream::world));
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<RegularItem> items;
    items.reserve(static_cast<std::size_t>(config_.num_items));
    for (int i = 0; i < config_.num_items; ++i) {
        const double latent = uniform(rng);
        auto score = [&] { return std::clamp(0.6 * latent + 0.4 * uniform(rng), 0.0, 1.0); };
        RegularItem it;
        it.id = i;
        it.like_score = score();
        it.finish_score = score();
        it.comment_score = score();
        it.follow_score = score();
        it.group_score = uniform(rng);
        items.push_back(it);
        item_topic_.push_back(std::min(config_.topics - 1, static_cast<int>(it.group_score * config_.topics)));
    }

    std::vector<AdItem> ads;
    ads.reserve(static_cast<std::size_t>(config_.num_ads));
    for (int i = 0; i < config_.num_ads; ++i) {
        AdItem ad;
        ad.id = config_.num_items + i;
        ad.image_size = static_cast<int>(rng() % 4);
        ad.bid_price = log_uniform(rng, config_.bid_lo, config_.bid_hi);
        ad.hidden_cost = log_uniform(rng, 0.01, 1.0);
        ad.predicted_ctr = 0.02 + 0.38 * uniform(rng);
        ad.predicted_recall = uniform(rng);
        ads.push_back(ad);
    }
    catalog_ = Catalog(std::move(items), std::move(ads));

    users_.reserve(static_cast<std::size_t>(config_.num_users));
    for (int u = 0; u < config_.num_users; ++u) {
        UserProfile p;
        p.id = u;
        p.favorite_topic = static_cast<int>(rng() % static_cast<std::uint64_t>(config_.topics));
        double norm = 0.0;
        for (auto& w : p.taste) {
            w = normal(rng);
            norm += w * w;
        }
        norm = std::sqrt(norm);
        for (auto& w : p.taste) w /= norm > 0.0 ? norm : 1.0;
        p.app_version = static_cast<int>(rng() % 5);
        p.os = uniform(rng) < 0.4 ? 1 : 0;
        p.ad_tolerance = 0.5 * normal(rng) - 0.3 * p.os;
        users_.push_back(p);
    }
}

double Environment::affinity(int user, int item) const {
    const UserProfile& u = users_.at(static_cast<std::size_t>(user));
    const RegularItem& it = catalog_.item(item);
    const auto scores = it.scores();
    double taste = 0.0;
    for (int i = 0; i < kScoreCount; ++i) taste += u.taste[i] * (scores[i] - 0.5);
    const double topic = (item_topic_[static_cast<std::size_t>(item)] == u.favorite_topic ? 1.0 : 0.0) -
                         1.0 / config_.topics;
    return sigmoid(config_.quality_weight * (it.quality() - 0.5) + config_.topic_weight * topic +
                   2.0 * config_.taste_weight * taste);
}

double Environment::ad_affinity(int user, int ad_id) const {
    const UserProfile& u = users_.at(static_cast<std::size_t>(user));
    const AdItem& ad = catalog_.ad(ad_id);
    return sigmoid(u.ad_tolerance + config_.ad_recall_weight * (ad.predicted_recall - 0.5) -
                   config_.ad_bid_weight * std::log(ad.bid_price));
}

double Environment::list_match(int user, const std::vector<int>& rec_list, const AdAction& ad) const {
    if (rec_list.empty()) return 0.0;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < rec_list.size(); ++j) {
        const int slot = static_cast<int>(j) + 1;
        const int pos = (!ad.is_no_ad() && ad.head <= slot) ? slot : slot - 1;
        num += affinity(user, rec_list[j]) / (1.0 + config_.position_decay * pos);
        den += 1.0 / (1.0 + config_.position_decay * static_cast<double>(j));
    }
    return num / den;
}

double Environment::slot_intrusiveness(int head) const {
    return config_.intrusiveness_first -
           (config_.intrusiveness_first - config_.intrusiveness_last) * static_cast<double>(head - 1) / config_.k;
}

double Environment::continue_probability(double match, const AdAction& ad, double ad_aff, int ads_shown) const {
    double hazard = config_.quality_hazard * (1.0 - match);
    if (!ad.is_no_ad()) {
        hazard += config_.ad_hazard * (1.0 - ad_aff) * slot_intrusiveness(ad.head) +
                  config_.fatigue_hazard * std::min(ads_shown, 4);
    }
    return config_.p_max * 2.0 * sigmoid(-hazard);
}

Context Environment::draw_context(const UserProfile& user, std::mt19937_64& rng) const {
    Context c;
    c.app_version = user.app_version;
    c.os = user.os;
    c.feed_type = uniform(rng) < 0.3 ? 1 : 0;
    return c;
}

SessionState Environment::start_session(std::int64_t session, std::uint64_t session_seed) const {
    SessionState s;
    s.session = session;
    s.rng.seed(session_seed);
    s.user = static_cast<int>(s.rng() % static_cast<std::uint64_t>(users_.size()));
    s.history.cap = static_cast<std::size_t>(config_.history_cap);
    s.context = draw_context(users_[static_cast<std::size_t>(s.user)], s.rng);
    return s;
}

std::vector<int> weighted_sample(const std::vector<int>& ids, const std::vector<double>& weights, int count,
                                 std::mt19937_64& rng) {
    if (ids.size() != weights.size()) throw UsageError("weighted_sample: ids and weights differ in length");
    if (count < 0 || static_cast<std::size_t>(count) > ids.size())
        throw EnvironmentError("weighted_sample: not enough candidates");
    // Key u^(1/w): the largest keys form a weighted sample without replacement.
    std::vector<std::pair<double, std::size_t>> keys;
    keys.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) throw UsageError("weighted_sample: bad weight");
        const double u = std::max(uniform(rng), 1e-300);
        keys.emplace_back(std::log(u) / weights[i], i);
    }
    std::partial_sort(keys.begin(), keys.begin() + count, keys.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(ids[keys[static_cast<std::size_t>(i)].second]);
    return out;
}

Request Environment::recall_candidates(SessionState& state) const {
    const int available = config_.num_items - static_cast<int>(state.shown.size());
    if (available < config_.recall_shortlist) throw ConfigError("recall: catalog smaller than candidate shortlist");

    std::vector<int> shortlist;
    std::unordered_set<int> picked;
    shortlist.reserve(static_cast<std::size_t>(config_.recall_shortlist));
    while (static_cast<int>(shortlist.size()) < config_.recall_shortlist) {
        const int id = static_cast<int>(state.rng() % static_cast<std::uint64_t>(config_.num_items));
        if (state.shown.count(id) || !picked.insert(id).second) continue;
        shortlist.push_back(id);
    }
    std::vector<double> w;
    w.reserve(shortlist.size());
    for (int id : shortlist) w.push_back(std::exp(config_.recall_temperature * affinity(state.user, id)));

    Request req;
    req.rec_pool = weighted_sample(shortlist, w, config_.rec_pool, state.rng);

    const int ad_short = std::min(config_.num_ads, std::max(config_.ad_pool, 4 * config_.ad_pool));
    std::vector<int> ads;
    std::unordered_set<int> picked_ads;
    while (static_cast<int>(ads.size()) < ad_short) {
        const int id = config_.num_items + static_cast<int>(state.rng() % static_cast<std::uint64_t>(config_.num_ads));
        if (picked_ads.insert(id).second) ads.push_back(id);
    }
    std::vector<double> aw;
    aw.reserve(ads.size());
    for (int id : ads) aw.push_back(std::exp(config_.recall_temperature * ad_affinity(state.user, id)));
    req.ad_pool = weighted_sample(ads, aw, config_.ad_pool, state.rng);
    return req;
}

void Environment::check_decision(const Request& request, const Decision& decision) const {
    if (static_cast<int>(decision.rec_list.size()) != config_.k)
        throw UsageError("decision: rec-list must have exactly k items");
    std::unordered_set<int> seen;
    for (int id : decision.rec_list) {
        if (std::find(request.rec_pool.begin(), request.rec_pool.end(), id) == request.rec_pool.end())
            throw UsageError("decision: rec item " + std::to_string(id) + " not in the candidate pool");
        if (!seen.insert(id).second) throw UsageError("decision: duplicate rec item");
    }
    const AdAction& a = decision.ad;
    if (a.is_no_ad()) {
        if (a.head != 0) throw UsageError("decision: NO_AD must use head 0");
    } else {
        if (std::find(request.ad_pool.begin(), request.ad_pool.end(), a.ad_id) == request.ad_pool.end())
            throw UsageError("decision: ad " + std::to_string(a.ad_id) + " not in the candidate pool");
        if (a.head < 1 || a.head > config_.k + 1) throw UsageError("decision: ad slot out of range");
    }
}

StepOutcome Environment::simulate_response(SessionState& state, const Request& request,
                                           const std::vector<int>& rec_list, const AdAction& ad) const {
    StepOutcome out;
    const double match = list_match(state.user, rec_list, ad);
    out.expected_dwell = expected_dwell(match);
    if (out.expected_dwell > 0.0) {
        std::gamma_distribution<double> gamma(config_.dwell_shape, out.expected_dwell / config_.dwell_shape);
        out.dwell = gamma(state.rng);
    }
    const double ad_aff = ad.is_no_ad() ? 1.0 : ad_affinity(state.user, ad.ad_id);
    out.continue_probability = continue_probability(match, ad, ad_aff, state.ads_shown);
    const double u_cont = uniform(state.rng);
    const double u_click = uniform(state.rng);
    out.cont = state.t < config_.warmup_requests || u_cont < out.continue_probability;

    if (!ad.is_no_ad()) {
        const auto it = std::find(request.ad_pool.begin(), request.ad_pool.end(), ad.ad_id);
        if (it == request.ad_pool.end()) throw UsageError("simulate_response: ad not in pool");
        std::vector<double> bids;
        for (int id : request.ad_pool) bids.push_back(catalog_.ad(id).bid_price);
        const double price = gsp_price(bids, static_cast<std::size_t>(it - request.ad_pool.begin()),
                                       config_.revenue.reserve_price);
        out.clicked = u_click < catalog_.ad(ad.ad_id).predicted_ctr;
        out.revenue = out.clicked ? price : 0.0;
    }
    out.terminal = !out.cont || state.t + 1 >= config_.max_requests;
    return out;
}

StepOutcome Environment::step(SessionState& state, const Request& request, const Decision& decision) const {
    if (state.finished) throw UsageError("step: session already finished");
    check_decision(request, decision);
    StepOutcome out = simulate_response(state, request, decision.rec_list, decision.ad);
    state.history = transition_state(state.history, decision.rec_list, decision.ad.ad_id);
    state.shown.insert(decision.rec_list.begin(), decision.rec_list.end());
    if (!decision.ad.is_no_ad()) ++state.ads_shown;
    ++state.t;
    state.finished = out.terminal;
    if (!state.finished) state.context = draw_context(users_[static_cast<std::size_t>(state.user)], state.rng);
    return out;
}

void Environment::calibrate() {
    const bool fit_hazard = config_.quality_hazard == 0.0;
    const BehaviorPolicy behavior(catalog_, config_.k, config_.behavior_p_ad, config_.behavior_temperature);

    struct Stats {
        double mean_length = 0.0;
        double mean_match = 0.0;
    };
    // Common random numbers: every evaluation replays the same session seeds.
    auto run = [&](double hazard) {
        EnvConfig saved = config_;
        config_.quality_hazard = hazard;
        config_.dwell_scale = 1.0;
        double steps = 0.0;
        double match = 0.0;
        for (int i = 0; i < config_.calibration_sessions; ++i) {
            SessionState s = start_session(i, derive_seed(config_.seed, seed_stream::calibration, i));
            std::mt19937_64 prng(derive_seed(config_.seed, seed_stream::policy ^ seed_stream::calibration, i));
            while (!s.finished) {
                const Request req = recall_candidates(s);
                const Decision d = behavior.decide({s.history, s.context, req, s.shown}, prng);
                match += list_match(s.user, d.rec_list, d.ad);
                step(s, req, d);
                steps += 1.0;
            }
        }
        config_ = saved;
        return Stats{steps / config_.calibration_sessions, match / steps};
    };

    double hazard = config_.quality_hazard;
    if (fit_hazard) {
        double lo = 0.0;
        double hi = 1.0;
        if (run(lo).mean_length < config_.target_mean_length)
            throw ConfigError("calibration: target_mean_length unreachable even with zero quality hazard");
        while (run(hi).mean_length > config_.target_mean_length) {
            hi *= 2.0;
            if (hi > 1e4) throw ConfigError("calibration: target_mean_length unreachable");
        }
        for (int it = 0; it < 30; ++it) {
            const double mid = 0.5 * (lo + hi);
            (run(mid).mean_length > config_.target_mean_length ? lo : hi) = mid;
        }
        hazard = 0.5 * (lo + hi);
    }
    const Stats stats = run(hazard);
    config_.quality_hazard = hazard;
    if (config_.dwell_scale == 0.0) config_.dwell_scale = config_.target_step_dwell / stats.mean_match;
}

BehaviorPolicy::BehaviorPolicy(const Catalog& catalog, int k, double p_ad, double temperature)
    : catalog_(&catalog), k_(k), p_ad_(p_ad), temperature_(temperature) {}

Decision BehaviorPolicy::decide(const PolicyInput& input, std::mt19937_64& rng) const {
    std::vector<int> ids;
    std::vector<double> w;
    for (int id : input.request.rec_pool) {
        if (input.exclude.count(id)) continue;
        ids.push_back(id);
        w.push_back(std::exp(temperature_ * catalog_->item(id).quality()));
    }
    Decision d;
    d.rec_list = weighted_sample(ids, w, k_, rng);
    const double u = uniform(rng);
    if (u < p_ad_ && !input.request.ad_pool.empty()) {
        std::vector<double> bids;
        for (int id : input.request.ad_pool) bids.push_back(catalog_->ad(id).bid_price);
        std::discrete_distribution<std::size_t> pick(bids.begin(), bids.end());
        d.ad.ad_id = input.request.ad_pool[pick(rng)];
        d.ad.head = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(k_ + 1));
    }
    return d;
}

std::vector<SessionLogRecord> generate_log(const Environment& env, const Policy& behavior, int sessions) {
    if (sessions < 0) throw ConfigError("generate_log: sessions must be >= 0");
    const EnvConfig& cfg = env.config();
    std::vector<SessionLogRecord> log;
    for (int i = 0; i < sessions; ++i) {
        SessionState s = env.start_session(i, derive_seed(cfg.seed, seed_stream::log_sessions, i));
        std::mt19937_64 prng(derive_seed(cfg.seed, seed_stream::policy, i));
        while (!s.finished) {
            const Request req = env.recall_candidates(s);
            const Decision d = behavior.decide({s.history, s.context, req, s.shown}, prng);
            SessionLogRecord r;
            r.session = i;
            r.user = s.user;
            r.t = s.t;
            r.context = s.context;
            r.rec_history = s.history.recs;
            r.ad_history = s.history.ads;
            r.rec_pool = req.rec_pool;
            r.ad_pool = req.ad_pool;
            r.rec_list = d.rec_list;
            r.ad_id = d.ad.ad_id;
            r.slot = d.ad.head;
            const StepOutcome out = env.step(s, req, d);
            r.r_rs = out.dwell;
            r.r_as = out.cont ? 1 : 0;
            r.revenue = out.revenue;
            r.terminal = out.terminal;
            log.push_back(std::move(r));
        }
    }
    return log;
}

}  // namespace ram
