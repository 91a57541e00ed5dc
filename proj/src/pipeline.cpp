#include "ram/pipeline.hpp"

#include "ram/errors.hpp"
#include "ram/log_io.hpp"
#include "ram/seeding.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace ram {

Dataset build_dataset(const RunConfig& config) {
    config.validate();
    Dataset d;
    d.env = std::make_unique<Environment>(config.env);
    const EnvConfig& e = d.env->config();
    d.behavior = std::make_unique<BehaviorPolicy>(d.env->catalog(), e.k, e.behavior_p_ad, e.behavior_temperature);
    d.log = generate_log(*d.env, *d.behavior, config.log_sessions);
    return d;
}

DatasetStats dataset_stats(const std::vector<SessionLogRecord>& log) {
    DatasetStats s;
    s.records = log.size();
    std::map<std::int64_t, int> lengths;
    double dwell = 0.0;
    std::size_t with_ad = 0;
    for (const auto& r : log) {
        ++lengths[r.session];
        dwell += r.r_rs;
        if (r.ad_id != kNoAd) ++with_ad;
    }
    s.sessions = lengths.size();
    if (s.records > 0) {
        s.mean_length = static_cast<double>(s.records) / static_cast<double>(s.sessions);
        s.ad_fraction = static_cast<double>(with_ad) / static_cast<double>(s.records);
        s.mean_step_dwell = dwell / static_cast<double>(s.records);
    }
    return s;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& data) {
    save_catalog(dir, data.env->catalog());
    save_log(dir / kLogFile, data.log);
    const DatasetStats s = dataset_stats(data.log);
    nlohmann::ordered_json j;
    j["sessions"] = s.sessions;
    j["records"] = s.records;
    j["mean_length"] = s.mean_length;
    j["ad_fraction"] = s.ad_fraction;
    j["mean_step_dwell"] = s.mean_step_dwell;
    j["calibrated_quality_hazard"] = data.env->config().quality_hazard;
    j["calibrated_dwell_scale"] = data.env->config().dwell_scale;
    write_text_file(dir / "stats.json", j.dump(2) + "\n");
}

Agents make_agents(const RunConfig& config, const Catalog& catalog) {
    const std::uint64_t seed = config.train.seed;
    return Agents{RsAgent(config.net, catalog.schema(), derive_seed(seed, seed_stream::rs_init),
                          config.train.optimizer, config.train.lr_rs),
                  AsAgent(config.net, catalog.schema(), derive_seed(seed, seed_stream::as_init),
                          config.train.optimizer, config.train.lr_as),
                  {}};
}

TrainResult train_agents(const RunConfig& config, const Catalog& catalog, const std::vector<SessionLogRecord>& log,
                         Agents& agents, const EpochCallback& on_epoch) {
    const auto transitions = transitions_from_log(log, static_cast<std::size_t>(config.env.history_cap));
    return train_offpolicy(catalog, transitions, config.train, agents.rs, agents.as, agents.progress, on_epoch);
}

void save_checkpoint(const std::filesystem::path& path, const Agents& agents) {
    std::ostringstream out;
    out << "progress " << agents.progress.updates << ' ' << agents.progress.syncs << ' '
        << agents.progress.epochs_completed << '\n';
    agents.rs.write(out);
    agents.as.write(out);
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    write_text_file(tmp, out.str());
    std::filesystem::rename(tmp, path);
}

void load_checkpoint(const std::filesystem::path& path, Agents& agents) {
    std::istringstream in(read_text_file(path));
    std::string tag;
    TrainProgress p;
    if (!(in >> tag >> p.updates >> p.syncs >> p.epochs_completed) || tag != "progress")
        throw InputError("checkpoint " + path.string() + ": missing progress header");
    in.ignore(1);
    try {
        agents.rs.read(in);
        agents.as.read(in);
    } catch (const ConfigError& e) {
        throw InputError("checkpoint " + path.string() + ": " + e.what());
    }
    agents.progress = p;
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fixed(double v, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string curve_csv(const std::vector<CurveRecord>& curve) {
    std::string out = "kind,epoch,step,loss_rs,loss_as,updates\n";
    for (const auto& c : curve)
        out += c.kind + "," + std::to_string(c.epoch) + "," + std::to_string(c.step) + "," + num(c.loss_rs) + "," +
               num(c.loss_as) + "," + std::to_string(c.updates) + "\n";
    return out;
}

MetricSummary evaluate(const RunConfig& config, const Environment& env, const Policy& behavior,
                       const Policy& policy) {
    const auto runs = run_online_test(env, policy, behavior, config.test_sessions, config.env.seed);
    return summarize(runs);
}

std::string metrics_table(const std::vector<EvalRow>& rows) {
    std::size_t w = 6;
    for (const auto& r : rows) w = std::max(w, r.policy.size() + (r.parameter.empty() ? 0 : r.parameter.size() + 8));
    auto pad = [](std::string s, std::size_t n) {
        s.resize(std::max(n, s.size()), ' ');
        return s;
    };
    std::string out = pad("policy", w) + "  " + pad("R_rs", 16) + "  " + pad("R_as", 16) + "  R_rev\n";
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        std::string label = r.policy;
        if (!r.parameter.empty()) label += " " + r.parameter + "=" + num(r.value);
        out += pad(label, w) + "  " + pad(fixed(m.rs_mean, 3) + " ± " + fixed(m.rs_std, 3), 17) + "  " +
               pad(fixed(m.as_mean, 3) + " ± " + fixed(m.as_std, 3), 17) + "  " + fixed(m.rev_mean, 4) + " ± " +
               fixed(m.rev_std, 4) + "\n";
    }
    return out;
}

std::string metrics_jsonl(const std::vector<EvalRow>& rows) {
    std::string out;
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["policy"] = r.policy;
        if (!r.parameter.empty()) {
            j["parameter"] = r.parameter;
            j["value"] = r.value;
        }
        j["sessions"] = r.metrics.sessions;
        j["r_rs_mean"] = r.metrics.rs_mean;
        j["r_rs_std"] = r.metrics.rs_std;
        j["r_as_mean"] = r.metrics.as_mean;
        j["r_as_std"] = r.metrics.as_std;
        j["r_rev_mean"] = r.metrics.rev_mean;
        j["r_rev_std"] = r.metrics.rev_std;
        out += j.dump() + "\n";
    }
    return out;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t m = i; m <= j; ++m) r[idx[m]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw UsageError("spearman: length mismatch");
    if (x.size() < 2) return 0.0;
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace ram
