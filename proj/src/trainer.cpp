#include "ram/trainer.hpp"

#include "ram/errors.hpp"
#include "ram/seeding.hpp"

#include <algorithm>
#include <cmath>

namespace ram {

void TrainConfig::validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in [0, 1]");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(lr_rs > 0.0) || !(lr_as > 0.0)) throw ConfigError("learning rates must be > 0");
    if (target_sync < 1) throw ConfigError("target_sync must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (buffer_capacity < 1) throw ConfigError("buffer_capacity must be >= 1");
    if (log_interval < 1) throw ConfigError("log_interval must be >= 1");
    if (update_every < 1) throw ConfigError("update_every must be >= 1");
}

std::vector<Transition> transitions_from_log(const std::vector<SessionLogRecord>& log, std::size_t history_cap) {
    std::vector<Transition> out;
    out.reserve(log.size());
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& r = log[i];
        Transition t;
        t.state.history = BrowsingHistory{r.rec_history, r.ad_history, history_cap};
        t.state.context = r.context;
        t.rec_list = r.rec_list;
        t.ad = r.ad_action();
        t.r_rs = r.r_rs;
        t.r_as = r.r_as;
        t.revenue = r.revenue;
        t.terminal = r.terminal;
        if (!r.terminal) {
            if (i + 1 >= log.size() || log[i + 1].session != r.session)
                throw InputError("session " + std::to_string(r.session) + " ends without a terminal record");
            const auto& n = log[i + 1];
            t.next.history = BrowsingHistory{n.rec_history, n.ad_history, history_cap};
            t.next.context = n.context;
            t.next_request = Request{n.rec_pool, n.ad_pool};
        } else {
            t.next.history = transition_state(t.state.history, r.rec_list, r.ad_id);
            t.next.context = r.context;
        }
        out.push_back(std::move(t));
    }
    return out;
}

Targets compute_targets(const RsAgent& rs, const AsAgent& as, const Catalog& catalog, const Transition& t,
                        double gamma, const BiddingRule& rule, const RevenueSettings& revenue) {
    Targets out;
    if (t.terminal) {
        out.y_rs = rs_target(t.r_rs, 0.0, true, gamma);
        out.y_as = as_target(t.r_as, 0.0, true, gamma);
        return out;
    }
    const CascadeQNet& rs_net = rs.target();
    const EncodedState s_next = rs_net.encode(catalog, t.next.history, t.next.context);
    const CascadeResult list =
        rs_net.select_rec_list(s_next, catalog, t.next_request.rec_pool, rs_net.dims().k);
    out.next_rec_list = list.items;
    out.next_rs_value = list.value;
    const AsBootstrap boot = as_bootstrap(as.target(), catalog, t.next.history, t.next.context, list.items,
                                          t.next_request.ad_pool, rule, revenue);
    out.next_ad = boot.action;
    out.next_as_value = boot.value;
    out.y_rs = rs_target(t.r_rs, list.value, false, gamma);
    out.y_as = as_target(t.r_as, boot.value, false, gamma);
    return out;
}

TrainResult train_offpolicy(const Catalog& catalog, std::span<const Transition> transitions,
                            const TrainConfig& config, RsAgent& rs, AsAgent& as, TrainProgress& progress,
                            const EpochCallback& on_epoch) {
    config.validate();
    if (transitions.empty()) throw InputError("training log is empty");
    rs.set_learning_rate(config.lr_rs);
    as.set_learning_rate(config.lr_as);

    TrainResult result;
    ReplayBuffer buffer(config.buffer_capacity);
    const std::size_t batch = static_cast<std::size_t>(config.batch_size);

    // Replaying the earlier pushes reproduces the buffer of an uninterrupted run slot for slot.
    for (int e = 0; e < progress.epochs_completed; ++e)
        for (const auto& t : transitions) buffer.push(t);

    for (int epoch = progress.epochs_completed; epoch < config.epochs; ++epoch) {
        std::mt19937_64 rng(derive_seed(config.seed, seed_stream::replay, static_cast<std::uint64_t>(epoch)));
        double ep_rs = 0.0, ep_as = 0.0, iv_rs = 0.0, iv_as = 0.0;
        std::size_t ep_n = 0, iv_n = 0;

        for (std::size_t i = 0; i < transitions.size(); ++i) {
            buffer.push(transitions[i]);
            result.max_buffer_size = std::max(result.max_buffer_size, buffer.size());
            if (buffer.size() < batch || (i + 1) % static_cast<std::size_t>(config.update_every) != 0) continue;

            const auto picked = buffer.sample(batch, rng);
            std::vector<RsSample> rs_batch;
            std::vector<AsSample> as_batch;
            rs_batch.reserve(batch);
            as_batch.reserve(batch);
            // Every target is formed before either network moves.
            for (const Transition* t : picked) {
                const Targets y = compute_targets(rs, as, catalog, *t, config.gamma, config.rule, config.revenue);
                rs_batch.push_back(RsSample{&t->state.history, t->state.context, t->rec_list, y.y_rs});
                as_batch.push_back(AsSample{&t->state.history, t->state.context, t->rec_list, t->ad, y.y_as});
            }
            const double l_rs = rs.update(catalog, rs_batch);
            const double l_as = as.update(catalog, as_batch);
            ++progress.updates;
            if (progress.updates % static_cast<std::uint64_t>(config.target_sync) == 0) {
                rs.sync_target();
                as.sync_target();
                ++progress.syncs;
            }
            ep_rs += l_rs;
            ep_as += l_as;
            ++ep_n;
            iv_rs += l_rs;
            iv_as += l_as;
            ++iv_n;
            if (iv_n == static_cast<std::size_t>(config.log_interval)) {
                result.curve.push_back({"interval", epoch, progress.updates, iv_rs / iv_n, iv_as / iv_n, iv_n});
                iv_rs = iv_as = 0.0;
                iv_n = 0;
            }
        }
        const double n = ep_n ? static_cast<double>(ep_n) : 1.0;
        result.curve.push_back({"epoch", epoch, progress.updates, ep_rs / n, ep_as / n, ep_n});
        progress.epochs_completed = epoch + 1;
        if (on_epoch) on_epoch(progress);
    }
    return result;
}

SessionMetrics compute_session_metrics(std::span<const StepTrace> trace) {
    SessionMetrics m;
    for (const auto& s : trace) {
        m.r_rs += s.r_rs;
        m.r_as += s.r_as;
        m.r_rev += s.revenue;
    }
    return m;
}

std::vector<SessionRun> run_online_test(const Environment& env, const Policy& policy, const Policy& warmup,
                                        int sessions, std::uint64_t seed) {
    if (sessions < 0) throw ConfigError("test sessions must be >= 0");
    const int warm = env.config().warmup_requests;
    std::vector<SessionRun> runs;
    runs.reserve(static_cast<std::size_t>(sessions));
    for (int i = 0; i < sessions; ++i) {
        SessionState s = env.start_session(i, derive_seed(seed, seed_stream::test_sessions, i));
        std::mt19937_64 warm_rng(derive_seed(seed, seed_stream::policy, i));
        std::mt19937_64 prng(derive_seed(seed, seed_stream::policy ^ seed_stream::test_sessions, i));
        SessionRun run;
        while (!s.finished) {
            const Request req = env.recall_candidates(s);
            const bool warming = s.t < warm;
            const PolicyInput in{s.history, s.context, req, s.shown};
            const Decision d = warming ? warmup.decide(in, warm_rng) : policy.decide(in, prng);
            const StepOutcome out = env.step(s, req, d);
            if (!warming) run.trace.push_back({out.dwell, out.cont ? 1 : 0, out.revenue});
            if (!out.cont) ++run.leaves;
        }
        run.metrics = compute_session_metrics(run.trace);
        run.metrics.length = s.t;
        runs.push_back(std::move(run));
    }
    return runs;
}

MetricSummary summarize(std::span<const SessionRun> runs) {
    MetricSummary m;
    m.sessions = runs.size();
    if (runs.empty()) return m;
    auto stat = [&](auto field, double& mean, double& sd) {
        double s = 0.0;
        for (const auto& r : runs) s += field(r.metrics);
        mean = s / runs.size();
        double v = 0.0;
        for (const auto& r : runs) v += (field(r.metrics) - mean) * (field(r.metrics) - mean);
        sd = runs.size() > 1 ? std::sqrt(v / (runs.size() - 1)) : 0.0;
    };
    stat([](const SessionMetrics& x) { return x.r_rs; }, m.rs_mean, m.rs_std);
    stat([](const SessionMetrics& x) { return x.r_as; }, m.as_mean, m.as_std);
    stat([](const SessionMetrics& x) { return x.r_rev; }, m.rev_mean, m.rev_std);
    return m;
}

}  // namespace ram
