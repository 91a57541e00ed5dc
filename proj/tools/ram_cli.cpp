#include "ram/config.hpp"
#include "ram/errors.hpp"
#include "ram/log_io.hpp"
#include "ram/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ram;

namespace {

enum Exit { kOk = 0, kConfigExit = 2, kDataExit = 3, kRuntimeExit = 4 };

constexpr const char* kConfigSnapshot = "config.json";
constexpr const char* kCheckpoint = "checkpoint.txt";
constexpr const char* kCurve = "curve.csv";

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::optional<int> n;
    std::optional<std::string> variant;
    std::optional<double> gamma;
    std::optional<int> epochs;
    std::optional<int> log_sessions;
    std::optional<int> test_sessions;

    void attach(CLI::App& cmd) {
        cmd.add_option("-c,--config", config, "JSON config file (defaults apply for missing keys)");
        cmd.add_option("--seed", seed, "seed for world, log, test sessions and training");
        cmd.add_option("--alpha", alpha, "RAM-l revenue weight");
        cmd.add_option("--n", n, "RAM-n shortlist size");
        cmd.add_option("--variant", variant, "bidding rule: ram-l or ram-n");
        cmd.add_option("--gamma", gamma, "discount factor");
        cmd.add_option("--epochs", epochs, "passes over the log");
        cmd.add_option("--log-sessions", log_sessions, "logged sessions to generate");
        cmd.add_option("--test-sessions", test_sessions, "online test sessions per policy");
    }

    /// Config file (or `fallback` snapshot when no file is given) with command-line values on top.
    RunConfig resolve(const fs::path& fallback = {}) const {
        json j = json::object();
        fs::path source = config;
        if (source.empty() && !fallback.empty() && fs::exists(fallback)) source = fallback;
        if (!source.empty()) {
            try {
                j = json::parse(read_text_file(source));
            } catch (const InputError& e) {
                throw ConfigError(e.what());
            } catch (const json::exception& e) {
                throw ConfigError(source.string() + ": " + e.what());
            }
        }
        if (seed) {
            j["env"]["seed"] = *seed;
            j["train"]["seed"] = *seed;
        }
        if (alpha) j["bidding"]["alpha"] = *alpha;
        if (n) j["bidding"]["n"] = *n;
        if (variant) j["bidding"]["variant"] = *variant;
        if (gamma) j["train"]["gamma"] = *gamma;
        if (epochs) j["train"]["epochs"] = *epochs;
        if (log_sessions) j["log_sessions"] = *log_sessions;
        if (test_sessions) j["test_sessions"] = *test_sessions;
        return parse_run_config(j.dump());
    }
};

/// Relative output paths land under $RAM_OUTPUT_ROOT when it is set.
fs::path output_path(const std::string& p) {
    const fs::path path(p);
    if (path.is_absolute()) return path;
    if (const char* root = std::getenv("RAM_OUTPUT_ROOT"); root && *root) return fs::path(root) / path;
    return path;
}

void snapshot(const fs::path& dir, const RunConfig& c) {
    write_text_file(dir / kConfigSnapshot, dump_run_config(c) + "\n");
}

void write_results(const fs::path& dir, const std::string& stem, const std::vector<EvalRow>& rows) {
    std::cout << metrics_table(rows);
    if (dir.empty()) return;
    write_text_file(dir / (stem + ".txt"), metrics_table(rows));
    write_text_file(dir / (stem + ".jsonl"), metrics_jsonl(rows));
}

// ---- gen-data

int gen_data(const Overrides& o, const std::string& out) {
    const RunConfig c = o.resolve();
    const fs::path dir = output_path(out);
    const Dataset d = build_dataset(c);
    save_dataset(dir, d);
    snapshot(dir, c);
    const DatasetStats s = dataset_stats(d.log);
    std::cout << "sessions " << s.sessions << ", records " << s.records << ", mean length " << s.mean_length
              << ", ad fraction " << s.ad_fraction << ", mean dwell per request " << s.mean_step_dwell << "\n"
              << "wrote " << dir.string() << "\n";
    return kOk;
}

// ---- train

std::string kept_curve_rows(const fs::path& path, int epochs_done) {
    if (!fs::exists(path)) return "";
    std::istringstream in(read_text_file(path));
    std::string line, out;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string kind, epoch;
        std::getline(row, kind, ',');
        std::getline(row, epoch, ',');
        if (!epoch.empty() && std::stoi(epoch) < epochs_done) out += line + "\n";
    }
    return out;
}

int train(const Overrides& o, const std::string& data_dir, const std::string& out, bool resume) {
    const fs::path dir = output_path(out);
    const fs::path data = output_path(data_dir);
    const RunConfig c = o.resolve(resume ? dir / kConfigSnapshot : data / kConfigSnapshot);
    const Catalog catalog = load_catalog(data);
    const auto log = load_log(data / kLogFile);
    const LogReport report = validate_log(log, catalog, c.env.k, static_cast<std::size_t>(c.env.history_cap));
    if (!report.ok()) throw InputError("log failed validation:\n" + report.summary());

    Agents agents = make_agents(c, catalog);
    std::string earlier;
    if (resume) {
        load_checkpoint(dir / kCheckpoint, agents);
        earlier = kept_curve_rows(dir / kCurve, agents.progress.epochs_completed);
        std::cout << "resuming after epoch " << agents.progress.epochs_completed << " at update "
                  << agents.progress.updates << "\n";
    }
    snapshot(dir, c);
    const TrainResult res = train_agents(c, catalog, log, agents, [&](const TrainProgress& p) {
        save_checkpoint(dir / kCheckpoint, agents);
        std::cout << "epoch " << p.epochs_completed << "/" << c.train.epochs << ", updates " << p.updates
                  << ", target syncs " << p.syncs << std::endl;
    });
    const std::string csv = curve_csv(res.curve);
    write_text_file(dir / kCurve, csv.substr(0, csv.find('\n') + 1) + earlier + csv.substr(csv.find('\n') + 1));
    for (const auto& r : res.curve)
        if (r.kind == "epoch")
            std::cout << "epoch " << r.epoch << " mean loss: rs " << r.loss_rs << ", as " << r.loss_as << "\n";
    std::cout << "wrote " << dir.string() << "\n";
    return kOk;
}

// ---- eval and sweep

struct Loaded {
    RunConfig config;
    std::unique_ptr<Environment> env;
    std::unique_ptr<BehaviorPolicy> behavior;
    std::optional<Agents> agents;
};

Loaded load_run(const Overrides& o, const std::string& run_dir) {
    Loaded l;
    const fs::path run = run_dir.empty() ? fs::path{} : output_path(run_dir);
    l.config = o.resolve(run.empty() ? fs::path{} : run / kConfigSnapshot);
    l.env = std::make_unique<Environment>(l.config.env);
    const EnvConfig& e = l.env->config();
    l.behavior = std::make_unique<BehaviorPolicy>(l.env->catalog(), e.k, e.behavior_p_ad, e.behavior_temperature);
    if (!run.empty()) {
        l.agents.emplace(make_agents(l.config, l.env->catalog()));
        load_checkpoint(run / kCheckpoint, *l.agents);
    }
    return l;
}

int eval(const Overrides& o, const std::string& run_dir, std::vector<std::string> policies, const std::string& out) {
    const Loaded l = load_run(o, run_dir);
    if (policies.empty()) {
        policies = {"random", "greedy", "behavior"};
        if (l.agents) policies.insert(policies.begin(), "ram");
    }
    const int k = l.config.env.k;
    std::vector<EvalRow> rows;
    for (const auto& name : policies) {
        std::unique_ptr<Policy> p;
        if (name == "ram") {
            if (!l.agents) throw ConfigError("policy 'ram' needs --run");
            p = std::make_unique<RamPolicy>(l.agents->rs.eval(), l.agents->as.eval(), l.env->catalog(),
                                            l.config.bidding.rule(), l.config.env.revenue);
        } else if (name == "random") {
            p = std::make_unique<RandomPolicy>(k);
        } else if (name == "greedy") {
            p = std::make_unique<GreedyPolicy>(l.env->catalog(), k, l.config.env.revenue);
        } else if (name == "behavior") {
            p = std::make_unique<BehaviorPolicy>(l.env->catalog(), k, l.config.env.behavior_p_ad,
                                                 l.config.env.behavior_temperature);
        } else {
            throw ConfigError("unknown policy '" + name + "' (ram, random, greedy, behavior)");
        }
        rows.push_back({p->name(), "", 0.0, evaluate(l.config, *l.env, *l.behavior, *p)});
    }
    const fs::path dir = out.empty() ? fs::path{} : output_path(out);
    if (!dir.empty()) snapshot(dir, l.config);
    write_results(dir, "eval", rows);
    return kOk;
}

int sweep(const Overrides& o, const std::string& run_dir, const std::string& param, const std::vector<double>& values,
          const std::string& out) {
    const Loaded l = load_run(o, run_dir);
    std::vector<EvalRow> rows;
    for (double v : values) {
        BiddingRule rule;
        if (param == "alpha") {
            rule = parse_bidding_rule("ram-l", v, l.config.bidding.n);
        } else {
            if (v != std::floor(v)) throw ConfigError("N values must be integers");
            rule = parse_bidding_rule("ram-n", l.config.bidding.alpha, static_cast<int>(v));
        }
        const RamPolicy p(l.agents->rs.eval(), l.agents->as.eval(), l.env->catalog(), rule, l.config.env.revenue);
        rows.push_back({p.name(), param, v, evaluate(l.config, *l.env, *l.behavior, p)});
    }
    const fs::path dir = out.empty() ? fs::path{} : output_path(out);
    if (!dir.empty()) snapshot(dir, l.config);
    write_results(dir, "sweep_" + param, rows);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RAM: joint recommendation and advertising with off-policy RL on a synthetic simulator"};
    app.require_subcommand(1);

    Overrides o;
    std::string out, data_dir, run_dir, param;
    bool resume = false;
    std::vector<std::string> policies;
    std::vector<double> values;

    auto* gen = app.add_subcommand("gen-data", "simulate the behavior policy and write the logged dataset");
    o.attach(*gen);
    gen->add_option("-o,--out", out, "dataset directory")->required();

    auto* tr = app.add_subcommand("train", "off-policy training over a logged dataset");
    o.attach(*tr);
    tr->add_option("-d,--data", data_dir, "dataset directory from gen-data")->required();
    tr->add_option("-o,--out", out, "run directory for checkpoint, curve and config snapshot")->required();
    tr->add_flag("--resume", resume, "continue from the run directory's checkpoint and config snapshot");

    auto* ev = app.add_subcommand("eval", "online test: mean and std of R_rs, R_as, R_rev");
    o.attach(*ev);
    ev->add_option("-r,--run", run_dir, "trained run directory (omit for baselines only)");
    ev->add_option("-p,--policy", policies, "ram, random, greedy, behavior (repeatable)");
    ev->add_option("-o,--out", out, "directory for eval.txt and eval.jsonl");

    auto* sw = app.add_subcommand("sweep", "evaluate a trained run over values of alpha or N");
    o.attach(*sw);
    sw->add_option("-r,--run", run_dir, "trained run directory")->required();
    sw->add_option("--param", param, "alpha or N")->required()->check(CLI::IsMember({"alpha", "N"}));
    sw->add_option("--values", values, "parameter values")->required()->delimiter(',');
    sw->add_option("-o,--out", out, "directory for sweep_<param>.txt and .jsonl");

    auto* show = app.add_subcommand("print-config", "print the resolved config with every default filled in");
    o.attach(*show);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigExit;
    }

    try {
        if (show->parsed()) {
            std::cout << dump_run_config(o.resolve()) << "\n";
            return kOk;
        }
        if (gen->parsed()) return gen_data(o, out);
        if (tr->parsed()) return train(o, data_dir, out, resume);
        if (ev->parsed()) return eval(o, run_dir, policies, out);
        if (sw->parsed()) return sweep(o, run_dir, param, values, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const InputError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataExit;
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataExit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeExit;
    }
    return kRuntimeExit;
}
