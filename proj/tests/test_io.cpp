#include "doctest.h"

#include "ram/config.hpp"
#include "ram/errors.hpp"
#include "ram/log_io.hpp"
#include "test_support.hpp"

#include <filesystem>
#include <map>
#include <sstream>

using namespace ram;

namespace {

const Environment& world() {
    static const Environment env(test::small_world());
    return env;
}

std::vector<SessionLogRecord> sample_log(int sessions) {
    const BehaviorPolicy b(world().catalog(), 6, 0.5523, 3.0);
    return generate_log(world(), b, sessions);
}

std::filesystem::path scratch(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("ram_io_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("empty log reads as no records") {
    std::stringstream ss;
    CHECK(read_log(ss).empty());
}

TEST_CASE("a three-request session round-trips exactly") {
    // every session has at least the warm-up requests; keep the first three of session 0
    const auto log = sample_log(1);
    std::vector<SessionLogRecord> one(log.begin(), log.begin() + 3);
    one[2].terminal = true;
    one[2].r_as = 0;
    one[1].r_rs = 0.1;  // not exactly representable
    std::stringstream ss;
    write_log(ss, one);
    CHECK(read_log(ss) == one);
}

TEST_CASE("full log round trip through a file") {
    const auto log = sample_log(100);
    const auto dir = scratch("log");
    save_log(dir / "nested" / kLogFile, log);
    CHECK(load_log(dir / "nested" / kLogFile) == log);

    // recomputed mean length stays close to the configured target
    std::map<std::int64_t, int> lengths;
    for (const auto& r : load_log(dir / "nested" / kLogFile)) ++lengths[r.session];
    CHECK(lengths.size() == 100);
    std::filesystem::remove_all(dir);
}

TEST_CASE("malformed lines name their line number") {
    const auto log = sample_log(2);
    std::stringstream good;
    write_log(good, log);
    std::string text = good.str();
    text += "{\"session\": 3\n";
    std::stringstream bad(text);
    try {
        read_log(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == log.size() + 1);
        CHECK(std::string(e.what()).find("line " + std::to_string(log.size() + 1)) == 0);
    }

    std::string extra = good.str();
    extra.insert(1, "\"bogus\":1,");
    std::stringstream ex(extra);
    CHECK_THROWS_AS(read_log(ex), ParseError);
}

TEST_CASE("validator flags broken invariants") {
    const auto& cat = world().catalog();
    auto log = sample_log(20);
    REQUIRE(validate_log(log, cat, 6, 20).ok());

    auto broken = log;
    broken[0].ad_id = kNoAd;
    broken[0].slot = 0;
    broken[0].revenue = 0.4;
    CHECK_FALSE(validate_log(broken, cat, 6, 20).ok());

    broken = log;
    broken[0].r_as = 2;
    CHECK_FALSE(validate_log(broken, cat, 6, 20).ok());

    broken = log;
    broken[0].rec_list.pop_back();
    CHECK_FALSE(validate_log(broken, cat, 6, 20).ok());

    broken = log;
    std::swap(broken[0].rec_history, broken[1].rec_history);
    if (broken[0].rec_history != log[0].rec_history) CHECK_FALSE(validate_log(broken, cat, 6, 20).ok());

    // a session cut short is only a warning
    auto partial = log;
    partial.pop_back();
    const LogReport rep = validate_log(partial, cat, 6, 20);
    CHECK(rep.ok());
    CHECK(rep.warnings.size() == 1);
}

TEST_CASE("catalog CSV round trip is exact") {
    const auto dir = scratch("catalog");
    save_catalog(dir, world().catalog());
    const Catalog back = load_catalog(dir);
    REQUIRE(back.items().size() == world().catalog().items().size());
    REQUIRE(back.ads().size() == world().catalog().ads().size());
    for (std::size_t i = 0; i < back.items().size(); ++i) {
        CHECK(back.items()[i].id == world().catalog().items()[i].id);
        CHECK(back.items()[i].scores() == world().catalog().items()[i].scores());
    }
    for (std::size_t i = 0; i < back.ads().size(); ++i) {
        const auto& a = back.ads()[i];
        const auto& b = world().catalog().ads()[i];
        CHECK(a.id == b.id);
        CHECK(a.bid_price == b.bid_price);
        CHECK(a.predicted_ctr == b.predicted_ctr);
        CHECK(a.hidden_cost == b.hidden_cost);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("bad CSV rows are parse errors") {
    std::stringstream wrong_header("id,foo\n1,2\n");
    CHECK_THROWS_AS(read_items_csv(wrong_header), ParseError);
    std::stringstream short_row("id,like_score,finish_score,comment_score,follow_score,group_score\n1,0.1,0.2\n");
    try {
        read_items_csv(short_row);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("missing input file is an input error") {
    CHECK_THROWS_AS(load_log("/nonexistent/dir/sessions.jsonl"), InputError);
}

TEST_CASE("run config parsing") {
    const RunConfig def = parse_run_config("{}");
    CHECK(def.train.gamma == 0.95);
    CHECK(def.env.k == 6);
    CHECK(def.net.k == 6);

    const RunConfig c = parse_run_config(
        R"({"env": {"seed": 5, "max_requests": 10}, "bidding": {"variant": "ram-n", "n": 4},
            "train": {"optimizer": "sgd"}, "test_sessions": 50})");
    CHECK(c.env.seed == 5);
    CHECK(c.env.max_requests == 10);
    CHECK(c.train.rule.kind == BiddingRule::Kind::ram_n);
    CHECK(c.train.rule.n == 4);
    CHECK(c.train.optimizer == nn::OptimizerKind::sgd);
    CHECK(c.test_sessions == 50);

    // dump then parse is the identity on every field
    const RunConfig again = parse_run_config(dump_run_config(c));
    CHECK(dump_run_config(again) == dump_run_config(c));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_run_config(R"({"env": {"sede": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"extra": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"train": {"gamma": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"train": {"batch_size": 2.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"bidding": {"variant": "vcg"}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"env": {"rec_pool": 3}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"env": {"rs_reward": "clicks"}})"), ConfigError);
    CHECK(parse_run_config(R"({"env": {"rs_reward": "income"}})").env.rs_reward == "income");
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
}
