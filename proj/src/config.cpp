#include "ram/config.hpp"

#include "ram/errors.hpp"
#include "ram/log_io.hpp"

#include <json.hpp>

#include <set>

namespace ram {

using nlohmann::json;

namespace {

template <class V>
void visit(EnvConfig& c, V&& v) {
    v("seed", c.seed);
    v("num_items", c.num_items);
    v("num_ads", c.num_ads);
    v("num_users", c.num_users);
    v("topics", c.topics);
    v("rec_pool", c.rec_pool);
    v("ad_pool", c.ad_pool);
    v("k", c.k);
    v("max_requests", c.max_requests);
    v("warmup_requests", c.warmup_requests);
    v("history_cap", c.history_cap);
    v("quality_weight", c.quality_weight);
    v("topic_weight", c.topic_weight);
    v("taste_weight", c.taste_weight);
    v("position_decay", c.position_decay);
    v("dwell_shape", c.dwell_shape);
    v("p_max", c.p_max);
    v("quality_hazard", c.quality_hazard);
    v("ad_hazard", c.ad_hazard);
    v("fatigue_hazard", c.fatigue_hazard);
    v("intrusiveness_first", c.intrusiveness_first);
    v("intrusiveness_last", c.intrusiveness_last);
    v("ad_recall_weight", c.ad_recall_weight);
    v("ad_bid_weight", c.ad_bid_weight);
    v("dwell_scale", c.dwell_scale);
    v("rs_reward", c.rs_reward);
    v("target_mean_length", c.target_mean_length);
    v("target_step_dwell", c.target_step_dwell);
    v("calibration_sessions", c.calibration_sessions);
    v("recall_shortlist", c.recall_shortlist);
    v("recall_temperature", c.recall_temperature);
    v("bid_lo", c.bid_lo);
    v("bid_hi", c.bid_hi);
    v("reserve_price", c.revenue.reserve_price);
    v("scale_by_ctr", c.revenue.scale_by_ctr);
    v("behavior_p_ad", c.behavior_p_ad);
    v("behavior_temperature", c.behavior_temperature);
}

template <class V>
void visit(NetDims& c, V&& v) {
    v("embed_dim", c.embed_dim);
    v("state_hidden", c.state_hidden);
    v("hidden1", c.hidden1);
    v("hidden2", c.hidden2);
}

template <class V>
void visit(TrainConfig& c, V&& v) {
    v("gamma", c.gamma);
    v("batch_size", c.batch_size);
    v("lr_rs", c.lr_rs);
    v("lr_as", c.lr_as);
    v("target_sync", c.target_sync);
    v("epochs", c.epochs);
    v("buffer_capacity", c.buffer_capacity);
    v("optimizer", c.optimizer);
    v("log_interval", c.log_interval);
    v("update_every", c.update_every);
    v("seed", c.seed);
}

template <class V>
void visit(BiddingConfig& c, V&& v) {
    v("variant", c.variant);
    v("alpha", c.alpha);
    v("n", c.n);
}

template <class T>
void read_value(const json& j, T& out, const std::string& key) {
    try {
        if constexpr (std::is_same_v<T, nn::OptimizerKind>) {
            out = nn::parse_optimizer_kind(j.get<std::string>());
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!j.is_boolean()) throw ConfigError("expected true/false");
            out = j.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!j.is_number_integer()) throw ConfigError("expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (j.is_number_unsigned() || j.get<std::int64_t>() >= 0) {
                    out = j.get<T>();
                } else {
                    throw ConfigError("expected a non-negative integer");
                }
            } else {
                out = j.get<T>();
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!j.is_number()) throw ConfigError("expected a number");
            out = j.get<T>();
        } else {
            out = j.get<T>();
        }
    } catch (const ConfigError& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    } catch (const std::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

template <class Section>
void read_section(const json& j, Section& section, const std::string& name) {
    if (!j.is_object()) throw ConfigError("config section '" + name + "' must be an object");
    std::set<std::string> known;
    visit(section, [&](const char* key, auto& field) {
        known.insert(key);
        if (j.contains(key)) read_value(j.at(key), field, name + "." + key);
    });
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown config key '" + name + "." + key + "'");
    }
}

template <class Section>
json write_section(Section section) {
    json j = json::object();
    visit(section, [&](const char* key, auto& field) {
        using T = std::decay_t<decltype(field)>;
        if constexpr (std::is_same_v<T, nn::OptimizerKind>) {
            j[key] = nn::to_string(field);
        } else {
            j[key] = field;
        }
    });
    return j;
}

}  // namespace

void RunConfig::validate() const {
    env.validate();
    train.validate();
    if (net.embed_dim < 1 || net.state_hidden < 1 || net.hidden1 < 1 || net.hidden2 < 1)
        throw ConfigError("net widths must be >= 1");
    if (net.k != env.k) throw ConfigError("net.k must equal env.k");
    (void)bidding.rule();
    if (log_sessions < 1) throw ConfigError("log_sessions must be >= 1");
    if (test_sessions < 1) throw ConfigError("test_sessions must be >= 1");
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "env") {
            read_section(value, c.env, "env");
        } else if (key == "net") {
            read_section(value, c.net, "net");
        } else if (key == "train") {
            read_section(value, c.train, "train");
        } else if (key == "bidding") {
            read_section(value, c.bidding, "bidding");
        } else if (key == "log_sessions") {
            read_value(value, c.log_sessions, key);
        } else if (key == "test_sessions") {
            read_value(value, c.test_sessions, key);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    c.net.k = c.env.k;
    c.train.rule = c.bidding.rule();
    c.train.revenue = c.env.revenue;
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
    return parse_run_config(text);
}

std::string dump_run_config(const RunConfig& config) {
    json j;
    j["env"] = write_section(config.env);
    j["net"] = write_section(config.net);
    j["train"] = write_section(config.train);
    j["bidding"] = write_section(config.bidding);
    j["log_sessions"] = config.log_sessions;
    j["test_sessions"] = config.test_sessions;
    return j.dump(2) + "\n";
}

}  // namespace ram
