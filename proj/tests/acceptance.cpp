// Acceptance run: one PASS/FAIL line per criterion. Exits nonzero only if a check crashes.

#include "hand_trace.hpp"
#include "test_support.hpp"

#include "ram/errors.hpp"
#include "ram/log_io.hpp"
#include "ram/pipeline.hpp"
#include "ram/replay_buffer.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

using namespace ram;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---------------------------------------------------------------- 1

// Passes when |a - n| <= 1e-6 or |a - n| / max(|a|, |n|) <= 1e-3, with n from central differences at eps 1e-4.
struct FdResult {
    double worst_rel = 0.0;  // over scalars with |gradient| above 1e-8
    double max_grad = 0.0;
    std::size_t failures = 0;
    std::size_t checked = 0;
};

void fd_check(nn::ParamStore& store, const std::function<double()>& loss, FdResult& out) {
    const double eps = 1e-4;
    for (std::size_t p = 0; p < store.size(); ++p) {
        auto& param = store.at(p);
        for (Eigen::Index i = 0; i < param.value.size(); ++i) {
            const double saved = param.value.data()[i];
            param.value.data()[i] = saved + eps;
            const double up = loss();
            param.value.data()[i] = saved - eps;
            const double down = loss();
            param.value.data()[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double analytic = param.grad.data()[i];
            const double diff = std::abs(analytic - numeric);
            const double scale = std::max(std::abs(analytic), std::abs(numeric));
            const double rel = scale > 0.0 ? diff / scale : 0.0;
            ++out.checked;
            out.max_grad = std::max(out.max_grad, std::abs(analytic));
            if (scale > 1e-8) out.worst_rel = std::max(out.worst_rel, rel);
            if (diff > 1e-6 && rel > 1e-3) ++out.failures;
        }
    }
}

NetDims check_dims() {
    NetDims d;
    d.embed_dim = 4;
    d.state_hidden = 4;
    d.k = 3;
    d.hidden1 = 6;
    d.hidden2 = 5;
    return d;
}

Verdict criterion_gradients() {
    const Catalog cat = test::small_catalog();
    const NetDims dims = check_dims();
    FdResult rs_res, as_res;
    std::mt19937_64 rng(101);
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo)); };
    for (int point = 0; point < 5; ++point) {
        const BrowsingHistory h = test::history_of({pick(0, 12), pick(0, 12), pick(0, 12)}, {pick(100, 106)});
        const Context ctx{pick(0, 3), pick(0, 2), pick(0, 2)};
        std::vector<int> list{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
        std::shuffle(list.begin(), list.end(), rng);
        list.resize(3);
        const double y = std::uniform_real_distribution<double>(-1.0, 2.0)(rng);

        CascadeQNet rs(dims, cat.schema(), 200 + point);
        test::jitter(rs.params(), rng, 0.3);
        rs.params().zero_grads();
        rs.accumulate_loss(cat, h, ctx, list, y, 1.0);
        fd_check(rs.params(), [&] {
            double s = 0.0;
            for (double q : rs.cascade_values(cat, h, ctx, list)) s += (y - q) * (y - q);
            return s;
        }, rs_res);

        AdQNet as(dims, cat.schema(), 300 + point);
        test::jitter(as.params(), rng, 0.3);
        // alternate between an inserted ad and NO_AD
        const AdAction a = point % 2 == 0 ? AdAction{pick(100, 106), pick(1, dims.k + 2)} : AdAction{};
        as.params().zero_grads();
        as.accumulate_loss(cat, h, ctx, list, a, y, 1.0);
        fd_check(as.params(), [&] {
            const EncodedState s = as.encode(cat, h, ctx);
            const Vec row = as.q_row(s, as.rec_list_encoding(cat, list), as.ad_input(cat, a.ad_id));
            const double q = row(a.head);
            return (y - q) * (y - q);
        }, as_res);
    }
    Verdict v;
    v.pass = rs_res.failures == 0 && as_res.failures == 0;
    v.detail = "CascadeQNet " + std::to_string(rs_res.checked) + " scalars, worst rel " +
               fmt("%.2e", rs_res.worst_rel) + " (max |g| " + fmt("%.2g", rs_res.max_grad) + "); AdQNet " +
               std::to_string(as_res.checked) + " scalars, worst rel " + fmt("%.2e", as_res.worst_rel) +
               " (max |g| " + fmt("%.2g", as_res.max_grad) + ")";
    return v;
}

// ---------------------------------------------------------------- 2

double list_value(const std::vector<int>& list, const std::map<int, double>& v) {
    double total = 0.0;
    for (std::size_t i = 0; i < list.size(); ++i) total += v.at(list[i]) / static_cast<double>(i + 1);
    return total;
}

std::vector<int> brute_force(const std::vector<int>& pool, int k, const std::map<int, double>& v) {
    std::vector<int> best, tuple;
    double best_value = -1e300;
    std::vector<bool> used(pool.size(), false);
    std::function<void()> rec = [&] {
        if (static_cast<int>(tuple.size()) == k) {
            const double total = list_value(tuple, v);
            if (total > best_value) {
                best_value = total;
                best = tuple;
            }
            return;
        }
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (used[i]) continue;
            used[i] = true;
            tuple.push_back(pool[i]);
            rec();
            tuple.pop_back();
            used[i] = false;
        }
    };
    rec();
    return best;
}

Verdict criterion_cascade() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int agree = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 5);
        const int k = 1 + static_cast<int>(rng() % 3);
        std::map<int, double> v;
        std::vector<int> pool;
        for (int i = 0; i < n; ++i) {
            pool.push_back(static_cast<int>(rng() % 1000));
            while (v.count(pool.back())) pool.back() = static_cast<int>(rng() % 1000);
            v[pool.back()] = u(rng);
        }
        const auto r = cascade_select(pool, k, {}, [&](std::span<const int> prefix, std::span<const int> rem) {
            std::vector<int> list(prefix.begin(), prefix.end());
            std::vector<double> q;
            for (int id : rem) {
                list.push_back(id);
                q.push_back(list_value(list, v));
                list.pop_back();
            }
            return q;
        });
        if (r.items == brute_force(pool, k, v)) ++agree;
    }

    // the network path runs the same cascade over its own Q
    const Catalog cat = test::small_catalog();
    CascadeQNet net(check_dims(), cat.schema(), 203);
    int net_agree = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const EncodedState s = net.encode(cat, test::history_of({trial % 12}, {}), {});
        std::vector<int> cands{0, 1, 2, 3, 4, 5, 6};
        const auto fast = net.select_rec_list(s, cat, cands, 3);
        const auto slow = cascade_select(cands, 3, {}, [&](std::span<const int> prefix, std::span<const int> rem) {
            std::vector<double> q;
            for (int id : rem) q.push_back(net.q_value(s, cat, prefix, id));
            return q;
        });
        if (fast.items == slow.items) ++net_agree;
    }
    return {agree == 200 && net_agree == 20, std::to_string(agree) + "/200 additive instances match brute force; " +
                                                 std::to_string(net_agree) + "/20 network cascades match"};
}

// ---------------------------------------------------------------- 3

Verdict criterion_as_shape() {
    const Environment env(test::small_world(31));
    const Catalog& cat = env.catalog();
    const NetDims dims;  // full size, k = 6
    const AdQNet net(dims, cat.schema(), 301);
    const BehaviorPolicy behavior(cat, dims.k, 0.5523, 3.0);
    std::mt19937_64 rng(302);
    int shape_ok = 0, head_ok = 0, rev_ok = 0, realized_ok = 0, inserted = 0;
    const int decisions = 1000;
    std::int64_t session = 0;
    SessionState st = env.start_session(session, rng());
    for (int i = 0; i < decisions; ++i) {
        if (st.finished) st = env.start_session(++session, rng());
        Request req = env.recall_candidates(st);
        req.ad_pool.resize(rng() % (req.ad_pool.size() + 1));
        const Decision base = behavior.decide({st.history, st.context, req, st.shown}, rng);
        const EncodedState s = net.encode(cat, st.history, st.context);
        const QTable t = net.q_table(s, net.rec_list_encoding(cat, base.rec_list), cat, req.ad_pool);
        if (t.rows() == req.ad_pool.size() + 1 && t.heads() == 8) ++shape_ok;

        const BiddingRule rule = i % 2 == 0 ? BiddingRule::linear(std::uniform_real_distribution<double>(0, 3)(rng))
                                            : BiddingRule::top_n(1 + static_cast<int>(rng() % 12));
        const RevenueModel rev = revenue_model(cat, req.ad_pool, env.config().revenue);
        const AdAction a = bid_select(t, rev, rule);
        if (a.is_no_ad() == (a.head == 0)) ++head_ok;
        const std::size_t row = a.is_no_ad() ? t.no_ad_row()
                                              : static_cast<std::size_t>(std::find(t.ad_ids.begin(), t.ad_ids.end(),
                                                                                   a.ad_id) - t.ad_ids.begin());
        if ((rev.row_revenue[row] == 0.0) == a.is_no_ad()) ++rev_ok;
        if (!a.is_no_ad()) ++inserted;
        const StepOutcome out = env.step(st, req, {base.rec_list, a});
        if (!a.is_no_ad() || out.revenue == 0.0) ++realized_ok;
    }
    const bool pass = shape_ok == decisions && head_ok == decisions && rev_ok == decisions && realized_ok == decisions;
    return {pass, "table (|ads|+1)x8 " + std::to_string(shape_ok) + "/1000; NO_AD<=>head 0 " + std::to_string(head_ok) +
                      "/1000; NO_AD<=>revenue 0 " + std::to_string(rev_ok) + "/1000 (" + std::to_string(inserted) +
                      " inserted); realized NO_AD revenue 0 " + std::to_string(realized_ok) + "/1000"};
}

// ---------------------------------------------------------------- 4

Verdict criterion_auction() {
    std::mt19937_64 rng(401);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.01, 1.0);
    int n1 = 0, nall = 0, scale = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int ads = 1 + static_cast<int>(rng() % 6);
        const int heads = 2 + static_cast<int>(rng() % 7);
        QTable t;
        for (int i = 0; i < ads; ++i) t.ad_ids.push_back(100 + i);
        t.ad_ids.push_back(kNoAd);
        t.q = Mat(ads + 1, heads);
        for (Eigen::Index i = 0; i < t.q.size(); ++i) t.q.data()[i] = u(rng);
        RevenueModel rev;
        for (int i = 0; i < ads; ++i) rev.row_revenue.push_back(pos(rng));
        rev.row_revenue.push_back(0.0);

        const auto cells = admissible_actions(t);
        AdAction q_best = cells.front();
        for (const auto& c : cells)
            if (t.value(c) > t.value(q_best)) q_best = c;
        if (ram_n_select(t, rev, 1) == q_best) ++n1;

        // revenue argmax over rows, then the best head of that row
        const auto top_row = static_cast<std::size_t>(
            std::max_element(rev.row_revenue.begin(), rev.row_revenue.end()) - rev.row_revenue.begin());
        const AdAction all = ram_n_select(t, rev, static_cast<int>(cells.size()));
        if (all.ad_id == t.ad_ids[top_row]) {
            bool best_head = true;
            for (int h = 1; h < heads; ++h)
                if (t.q(static_cast<Eigen::Index>(top_row), h) > t.value(all)) best_head = false;
            if (best_head) ++nall;
        }

        const double alpha = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
        const double c = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
        QTable ts = t;
        ts.q *= c;
        RevenueModel rs = rev;
        for (double& r : rs.row_revenue) r *= c;
        if (ram_l_select(ts, rs, alpha) == ram_l_select(t, rev, alpha)) ++scale;
    }

    int gsp_ok = 0, gsp_total = 0;
    for (int v = 0; v < 5; ++v) {
        std::vector<double> bids(5);
        for (double& b : bids) b = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
        std::vector<double> sorted = bids;
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        std::sort(bids.begin(), bids.end());
        do {
            const auto w = static_cast<std::size_t>(std::max_element(bids.begin(), bids.end()) - bids.begin());
            ++gsp_total;
            if (gsp_payment(bids, w) == sorted[1]) ++gsp_ok;
        } while (std::next_permutation(bids.begin(), bids.end()));
    }
    const bool pass = n1 == 1000 && nall == 1000 && scale == 1000 && gsp_ok == gsp_total;
    return {pass, "ram_n(1)=Q-argmax " + std::to_string(n1) + "/1000; ram_n(all)=revenue-argmax " +
                      std::to_string(nall) + "/1000; ram_l scale invariance " + std::to_string(scale) +
                      "/1000; gsp second price " + std::to_string(gsp_ok) + "/" + std::to_string(gsp_total)};
}

// ---------------------------------------------------------------- 5

Verdict criterion_targets() {
    const Catalog cat = test::small_catalog();
    RsAgent rs(test::tiny_dims(2), cat.schema(), 61);
    AsAgent as(test::tiny_dims(2), cat.schema(), 62);
    std::mt19937_64 rng(61);
    test::jitter(rs.target_mut().params(), rng, 0.4);
    test::jitter(as.target_mut().params(), rng, 0.4);
    const auto log = test::three_step_log();
    const auto tr = transitions_from_log(log, 20);
    double worst = 0.0;
    int compared = 0;
    bool terminal_ok = true;
    for (const BiddingRule rule : {BiddingRule::linear(0.5), BiddingRule::top_n(2), BiddingRule::linear(3.0)}) {
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const Targets y = compute_targets(rs, as, cat, tr[i], 0.95, rule, {});
            const test::HandTargets h =
                test::hand_targets(rs, as, cat, log[i], i + 1 < log.size() ? &log[i + 1] : nullptr, 0.95, rule);
            worst = std::max({worst, std::abs(y.y_rs - h.y_rs), std::abs(y.y_as - h.y_as)});
            compared += 2;
            if (tr[i].terminal) terminal_ok = terminal_ok && y.y_rs == log[i].r_rs && y.y_as == log[i].r_as;
        }
    }
    return {worst <= 1e-12 && terminal_ok && tr.back().terminal,
            std::to_string(compared) + " targets, max |diff| " + fmt("%.1e", worst) + "; terminal branch " +
                (terminal_ok ? "bare reward" : "WRONG")};
}

// ---------------------------------------------------------------- 6 and 7

RunConfig learning_config(std::uint64_t seed, const std::string& variant) {
    RunConfig c = parse_run_config(R"({
        "net": {"embed_dim": 16, "state_hidden": 16, "hidden1": 32, "hidden2": 16},
        "train": {"update_every": 4, "lr_rs": 1e-4, "lr_as": 1e-4}})");
    c.train.seed = seed;
    c.bidding.variant = variant;
    c.train.rule = c.bidding.rule();
    return c;
}

struct LearningRun {
    std::uint64_t seed;
    std::string variant;
    MetricSummary metrics;
    std::unique_ptr<Agents> agents;
};

struct LearningState {
    std::unique_ptr<Dataset> data;
    MetricSummary random, greedy;
    std::vector<LearningRun> runs;
};

LearningState& learning() {
    static LearningState state = [] {
        LearningState s;
        const RunConfig base = learning_config(1, "ram-l");
        s.data = std::make_unique<Dataset>(build_dataset(base));
        const Environment& env = *s.data->env;
        const RandomPolicy random(env.config().k);
        const GreedyPolicy greedy(env.catalog(), env.config().k, env.config().revenue);
        s.random = evaluate(base, env, *s.data->behavior, random);
        s.greedy = evaluate(base, env, *s.data->behavior, greedy);
        for (std::uint64_t seed : {1, 2, 3}) {
            for (const std::string variant : {"ram-l", "ram-n"}) {
                const RunConfig c = learning_config(seed, variant);
                auto agents = std::make_unique<Agents>(make_agents(c, env.catalog()));
                train_agents(c, env.catalog(), s.data->log, *agents);
                const RamPolicy policy(agents->rs.eval(), agents->as.eval(), env.catalog(), c.bidding.rule(),
                                       env.config().revenue);
                const MetricSummary m = evaluate(c, env, *s.data->behavior, policy);
                std::cout << "    seed " << seed << " " << policy.name() << ": R_rs " << fmt("%.3f", m.rs_mean)
                          << ", R_as " << fmt("%.3f", m.as_mean) << ", R_rev " << fmt("%.4f", m.rev_mean) << std::endl;
                s.runs.push_back({seed, variant, m, std::move(agents)});
            }
        }
        return s;
    }();
    return state;
}

Verdict criterion_learning() {
    const LearningState& s = learning();
    std::cout << "    random: R_rs " << fmt("%.3f", s.random.rs_mean) << ", R_as " << fmt("%.3f", s.random.as_mean)
              << "; greedy: R_rs " << fmt("%.3f", s.greedy.rs_mean) << ", R_as " << fmt("%.3f", s.greedy.as_mean)
              << std::endl;
    std::map<std::string, int> wins;
    for (const auto& r : s.runs) {
        const auto& m = r.metrics;
        const bool ok = m.rs_mean >= 1.1 * s.random.rs_mean && m.as_mean >= 1.1 * s.random.as_mean &&
                        m.rs_mean >= s.greedy.rs_mean && m.as_mean >= s.greedy.as_mean;
        if (ok) ++wins[r.variant];
    }
    const bool pass = wins["ram-l"] >= 2 && wins["ram-n"] >= 2;
    return {pass, "seeds passing: RAM-l " + std::to_string(wins["ram-l"]) + "/3, RAM-n " +
                      std::to_string(wins["ram-n"]) + "/3 (need R >= 1.1x random and >= greedy on R_rs and R_as)"};
}

Verdict criterion_sensitivity() {
    LearningState& s = learning();
    const Environment& env = *s.data->env;
    std::vector<double> a_x, a_rev, a_as, n_x, n_rev, n_as;
    for (const auto& r : s.runs) {
        const RunConfig c = learning_config(r.seed, r.variant);
        const bool linear = r.variant == "ram-l";
        const std::vector<double> values = linear ? std::vector<double>{0.0, 0.5, 1.0, 2.0}
                                                  : std::vector<double>{1, 2, 4, 1e9};
        for (double v : values) {
            const BiddingRule rule = linear ? BiddingRule::linear(v) : BiddingRule::top_n(v > 1e8 ? 1 << 30 : static_cast<int>(v));
            const RamPolicy policy(r.agents->rs.eval(), r.agents->as.eval(), env.catalog(), rule, env.config().revenue);
            const MetricSummary m = evaluate(c, env, *s.data->behavior, policy);
            (linear ? a_x : n_x).push_back(v);
            (linear ? a_rev : n_rev).push_back(m.rev_mean);
            (linear ? a_as : n_as).push_back(m.as_mean);
            std::cout << "    seed " << r.seed << " " << (linear ? "alpha " : "N ")
                      << (v > 1e8 ? std::string("all") : fmt("%g", v)) << ": R_as " << fmt("%.3f", m.as_mean)
                      << ", R_rev " << fmt("%.4f", m.rev_mean) << std::endl;
        }
    }
    const double ar = spearman(a_x, a_rev), aa = spearman(a_x, a_as);
    const double nr = spearman(n_x, n_rev), na = spearman(n_x, n_as);
    const bool pass = ar > 0 && aa < 0 && nr > 0 && na < 0;
    return {pass, "alpha: rho(R_rev) " + fmt("%+.3f", ar) + ", rho(R_as) " + fmt("%+.3f", aa) + "; N: rho(R_rev) " +
                      fmt("%+.3f", nr) + ", rho(R_as) " + fmt("%+.3f", na)};
}

// ---------------------------------------------------------------- 8

std::string file_bytes(const std::filesystem::path& p) {
    return read_text_file(p);
}

Verdict criterion_reproducible() {
    const auto root = std::filesystem::temp_directory_path() / "ram_acceptance_repro";
    std::filesystem::remove_all(root);
    RunConfig c = parse_run_config(R"({"log_sessions": 150, "test_sessions": 100,
        "env": {"num_items": 600, "num_ads": 60, "num_users": 80, "calibration_sessions": 300},
        "net": {"embed_dim": 6, "state_hidden": 6, "hidden1": 12, "hidden2": 8},
        "train": {"epochs": 2, "update_every": 4}})");
    std::vector<std::string> produced;
    for (int run = 0; run < 2; ++run) {
        const auto dir = root / ("run" + std::to_string(run));
        const Dataset d = build_dataset(c);
        save_dataset(dir / "data", d);
        // train from the files on disk, as the command line does
        const std::vector<SessionLogRecord> log = load_log(dir / "data" / kLogFile);
        Agents agents = make_agents(c, d.env->catalog());
        const TrainResult res = train_agents(c, d.env->catalog(), log, agents);
        write_text_file(dir / "curve.csv", curve_csv(res.curve));
        save_checkpoint(dir / "checkpoint.txt", agents);
        const RamPolicy policy(agents.rs.eval(), agents.as.eval(), d.env->catalog(), c.bidding.rule(),
                               d.env->config().revenue);
        const RandomPolicy random(c.env.k);
        const std::vector<EvalRow> rows{{policy.name(), "", 0.0, evaluate(c, *d.env, *d.behavior, policy)},
                                        {"random", "", 0.0, evaluate(c, *d.env, *d.behavior, random)}};
        write_text_file(dir / "eval.txt", metrics_table(rows));
        write_text_file(dir / "eval.jsonl", metrics_jsonl(rows));
    }
    int same = 0, total = 0;
    for (const char* f : {"data/items.csv", "data/ads.csv", "data/sessions.jsonl", "data/stats.json", "curve.csv",
                          "checkpoint.txt", "eval.txt", "eval.jsonl"}) {
        ++total;
        if (file_bytes(root / "run0" / f) == file_bytes(root / "run1" / f)) ++same;
    }
    std::filesystem::remove_all(root);
    return {same == total, std::to_string(same) + "/" + std::to_string(total) +
                               " artifacts byte-identical (dataset, curves, checkpoint, eval tables)"};
}

// ---------------------------------------------------------------- 9

Verdict criterion_buffer() {
    ReplayBuffer buf(10000);
    bool fifo = buf.capacity() == 10000;
    std::mt19937_64 rng(901);
    const int extra = 1 + static_cast<int>(rng() % 5000);
    for (int i = 0; i < 10000 + extra; ++i) {
        Transition t;
        t.r_rs = i;
        buf.push(std::move(t));
        fifo = fifo && buf.size() == std::min<std::size_t>(static_cast<std::size_t>(i + 1), 10000);
    }
    for (std::size_t i = 0; i < buf.size(); ++i) fifo = fifo && buf.at(i).r_rs == static_cast<double>(extra + i);
    for (const Transition* t : buf.sample(2000, rng)) fifo = fifo && t->r_rs >= extra;

    const Environment env(test::small_world(91));
    const BehaviorPolicy b(env.catalog(), env.config().k, 0.5523, 3.0);
    const auto log = generate_log(env, b, 300);
    std::stringstream ss;
    write_log(ss, log);
    const auto back = read_log(ss);
    const auto path = std::filesystem::temp_directory_path() / "ram_acceptance_log" / kLogFile;
    save_log(path, log);
    const auto from_file = load_log(path);
    std::filesystem::remove_all(path.parent_path());
    const bool round_trip = back == log && from_file == log &&
                            transitions_from_log(from_file, 20).size() == log.size() &&
                            validate_log(from_file, env.catalog(), env.config().k, 20).ok();
    return {fifo && round_trip, "FIFO at capacity 10000 with " + std::to_string(extra) + " evictions " +
                                    (fifo ? "ok" : "BROKEN") + "; " + std::to_string(log.size()) +
                                    " record log round trip " + (round_trip ? "identical" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RAM acceptance checks"};
    std::vector<int> only;
    std::string report;
    app.add_option("--only", only, "criteria to run (default: all)")->check(CLI::Range(1, 9));
    app.add_option("--report", report, "also write the verdict lines to this file");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"gradient correctness", criterion_gradients},
        {"cascade oracle", criterion_cascade},
        {"AS shape and semantics", criterion_as_shape},
        {"auction laws", criterion_auction},
        {"algorithm-1 targets", criterion_targets},
        {"learning effect", criterion_learning},
        {"sensitivity trends", criterion_sensitivity},
        {"reproducibility", criterion_reproducible},
        {"buffer and log contracts", criterion_buffer},
    };
    int failed = 0;
    std::string lines;
    try {
        for (std::size_t i = 0; i < criteria.size(); ++i) {
            const int id = static_cast<int>(i) + 1;
            if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
            const auto t0 = std::chrono::steady_clock::now();
            const Verdict v = criteria[i].second();
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (!v.pass) ++failed;
            const std::string line = "criterion " + std::to_string(id) + " " + (v.pass ? "PASS" : "FAIL") + "  " +
                                     criteria[i].first + ": " + v.detail + " [" + fmt("%.1f", secs) + " s]\n";
            std::cout << line << std::flush;
            lines += line;
        }
    } catch (const std::exception& e) {
        std::cout << "acceptance aborted: " << e.what() << std::endl;
        return 2;
    }
    const std::string summary = failed == 0 ? "all criteria passed\n" : std::to_string(failed) + " criteria failed\n";
    std::cout << summary << std::flush;
    if (!report.empty()) write_text_file(report, lines + summary);
    return 0;
}
