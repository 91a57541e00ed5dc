#include "ram/log_io.hpp"

#include "ram/errors.hpp"
#include "ram/state_encoder.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ram {

using nlohmann::json;

namespace {

json to_json(const SessionLogRecord& r) {
    json j;
    j["session"] = r.session;
    j["user"] = r.user;
    j["t"] = r.t;
    j["context"] = {r.context.app_version, r.context.os, r.context.feed_type};
    j["rec_history"] = r.rec_history;
    j["ad_history"] = r.ad_history;
    j["rec_pool"] = r.rec_pool;
    j["ad_pool"] = r.ad_pool;
    j["rec_list"] = r.rec_list;
    j["ad_id"] = r.ad_id;
    j["slot"] = r.slot;
    j["r_rs"] = r.r_rs;
    j["r_as"] = r.r_as;
    j["revenue"] = r.revenue;
    j["terminal"] = r.terminal;
    return j;
}

SessionLogRecord from_json(const json& j) {
    static const char* const keys[] = {"session", "user",    "t",     "context", "rec_history", "ad_history",
                                       "rec_pool", "ad_pool", "rec_list", "ad_id", "slot",        "r_rs",
                                       "r_as",    "revenue", "terminal"};
    if (!j.is_object()) throw std::runtime_error("record is not a JSON object");
    for (const char* k : keys) {
        if (!j.contains(k)) throw std::runtime_error(std::string("missing field '") + k + "'");
    }
    if (j.size() != std::size(keys)) throw std::runtime_error("unexpected extra fields");
    SessionLogRecord r;
    r.session = j.at("session").get<std::int64_t>();
    r.user = j.at("user").get<int>();
    r.t = j.at("t").get<int>();
    const auto ctx = j.at("context").get<std::vector<int>>();
    if (ctx.size() != 3) throw std::runtime_error("context must have 3 entries");
    r.context = Context{ctx[0], ctx[1], ctx[2]};
    r.rec_history = j.at("rec_history").get<std::vector<int>>();
    r.ad_history = j.at("ad_history").get<std::vector<int>>();
    r.rec_pool = j.at("rec_pool").get<std::vector<int>>();
    r.ad_pool = j.at("ad_pool").get<std::vector<int>>();
    r.rec_list = j.at("rec_list").get<std::vector<int>>();
    r.ad_id = j.at("ad_id").get<int>();
    r.slot = j.at("slot").get<int>();
    r.r_rs = j.at("r_rs").get<double>();
    r.r_as = j.at("r_as").get<int>();
    r.revenue = j.at("revenue").get<double>();
    r.terminal = j.at("terminal").get<bool>();
    return r;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError("not a number: '" + s + "'", line);
    }
}

int parse_int(const std::string& s, std::size_t line) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError("not an integer: '" + s + "'", line);
    return v;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename Row>
std::vector<Row> read_csv(std::istream& in, const std::string& header, std::size_t columns,
                          Row (*parse)(const std::vector<std::string>&, std::size_t)) {
    std::string line;
    std::size_t n = 0;
    if (!std::getline(in, line)) return {};
    ++n;
    if (line != header) throw ParseError("expected header '" + header + "'", n);
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != columns)
            throw ParseError("expected " + std::to_string(columns) + " columns, got " + std::to_string(cells.size()),
                             n);
        rows.push_back(parse(cells, n));
    }
    return rows;
}

const std::string kItemsHeader = "id,like_score,finish_score,comment_score,follow_score,group_score";
const std::string kAdsHeader = "id,image_size,bid_price,hidden_cost,predicted_ctr,predicted_recall";

RegularItem parse_item(const std::vector<std::string>& c, std::size_t line) {
    RegularItem it;
    it.id = parse_int(c[0], line);
    it.like_score = parse_double(c[1], line);
    it.finish_score = parse_double(c[2], line);
    it.comment_score = parse_double(c[3], line);
    it.follow_score = parse_double(c[4], line);
    it.group_score = parse_double(c[5], line);
    try {
        validate(it);
    } catch (const std::exception& e) {
        throw ParseError(e.what(), line);
    }
    return it;
}

AdItem parse_ad(const std::vector<std::string>& c, std::size_t line) {
    AdItem ad;
    ad.id = parse_int(c[0], line);
    ad.image_size = parse_int(c[1], line);
    ad.bid_price = parse_double(c[2], line);
    ad.hidden_cost = parse_double(c[3], line);
    ad.predicted_ctr = parse_double(c[4], line);
    ad.predicted_recall = parse_double(c[5], line);
    try {
        validate(ad);
    } catch (const std::exception& e) {
        throw ParseError(e.what(), line);
    }
    return ad;
}

}  // namespace

void write_log(std::ostream& out, const std::vector<SessionLogRecord>& records) {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<SessionLogRecord> read_log(std::istream& in) {
    std::vector<SessionLogRecord> records;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            records.push_back(from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw ParseError(e.what(), n);
        }
    }
    return records;
}

void save_log(const std::filesystem::path& path, const std::vector<SessionLogRecord>& records) {
    std::ostringstream ss;
    write_log(ss, records);
    write_text_file(path, ss.str());
}

std::vector<SessionLogRecord> load_log(const std::filesystem::path& path) {
    std::istringstream ss(read_text_file(path));
    try {
        return read_log(ss);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.detail(), e.line());
    }
}

std::string LogReport::summary(std::size_t max_lines) const {
    std::ostringstream ss;
    ss << records << " records, " << sessions << " sessions, " << errors.size() << " errors, " << warnings.size()
       << " warnings\n";
    std::size_t shown = 0;
    for (const auto& e : errors) {
        if (shown++ >= max_lines) break;
        ss << "  error: " << e << '\n';
    }
    for (const auto& w : warnings) {
        if (shown++ >= max_lines) break;
        ss << "  warning: " << w << '\n';
    }
    return ss.str();
}

LogReport validate_log(const std::vector<SessionLogRecord>& records, const Catalog& catalog, int k,
                       std::size_t history_cap) {
    LogReport rep;
    rep.records = records.size();
    std::map<std::int64_t, std::vector<std::size_t>> by_session;
    std::vector<std::int64_t> order;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& v = by_session[records[i].session];
        if (v.empty()) order.push_back(records[i].session);
        v.push_back(i);
    }
    rep.sessions = by_session.size();

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const std::string at = "record " + std::to_string(i) + " (session " + std::to_string(r.session) + ", t " +
                               std::to_string(r.t) + "): ";
        auto err = [&](const std::string& m) { rep.errors.push_back(at + m); };
        if (static_cast<int>(r.rec_list.size()) != k) err("rec_list length " + std::to_string(r.rec_list.size()));
        for (int id : r.rec_list) {
            if (!catalog.has_item(id)) err("unknown item " + std::to_string(id));
            if (std::find(r.rec_pool.begin(), r.rec_pool.end(), id) == r.rec_pool.end())
                err("rec item " + std::to_string(id) + " not in rec_pool");
        }
        for (int id : r.rec_history)
            if (!catalog.has_item(id)) err("unknown history item " + std::to_string(id));
        for (int id : r.ad_history)
            if (!catalog.has_ad(id)) err("unknown history ad " + std::to_string(id));
        if (r.rec_history.size() > history_cap || r.ad_history.size() > history_cap) err("history exceeds cap");
        if (r.ad_id == kNoAd) {
            if (r.slot != 0) err("NO_AD with slot " + std::to_string(r.slot));
            if (r.revenue != 0.0) err("NO_AD with nonzero revenue");
        } else {
            if (!catalog.has_ad(r.ad_id)) err("unknown ad " + std::to_string(r.ad_id));
            if (std::find(r.ad_pool.begin(), r.ad_pool.end(), r.ad_id) == r.ad_pool.end()) err("ad not in ad_pool");
            if (r.slot < 1 || r.slot > k + 1) err("ad slot " + std::to_string(r.slot) + " out of range");
        }
        if (!(r.revenue >= 0.0) || !std::isfinite(r.revenue)) err("revenue must be finite and >= 0");
        if (!(r.r_rs >= 0.0) || !std::isfinite(r.r_rs)) err("r_rs must be finite and >= 0");
        if (r.r_as != 0 && r.r_as != 1) err("r_as must be 0 or 1");
        if (r.r_as == 0 && !r.terminal) err("leave without terminal flag");
    }

    for (std::int64_t sid : order) {
        const auto& idx = by_session[sid];
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const auto& r = records[idx[j]];
            const std::string at = "session " + std::to_string(sid) + ", t " + std::to_string(r.t) + ": ";
            if (r.t != static_cast<int>(j)) rep.errors.push_back(at + "request index out of order");
            if (j + 1 < idx.size()) {
                if (idx[j + 1] != idx[j] + 1) rep.errors.push_back(at + "session records are not contiguous");
                if (r.terminal) rep.errors.push_back(at + "terminal record is not the last of its session");
                const auto& next = records[idx[j + 1]];
                if (next.user != r.user) rep.errors.push_back(at + "user changes within session");
                BrowsingHistory h{r.rec_history, r.ad_history, history_cap};
                const BrowsingHistory expect = transition_state(h, r.rec_list, r.ad_id);
                if (expect.recs != next.rec_history || expect.ads != next.ad_history)
                    rep.errors.push_back(at + "next state is not the transition of this state");
            } else if (!r.terminal) {
                rep.warnings.push_back("session " + std::to_string(sid) + " has no terminal record (partial session)");
            }
        }
    }
    return rep;
}

void write_items_csv(std::ostream& out, const std::vector<RegularItem>& items) {
    out << kItemsHeader << '\n';
    for (const auto& it : items) {
        out << it.id << ',' << fmt(it.like_score) << ',' << fmt(it.finish_score) << ',' << fmt(it.comment_score)
            << ',' << fmt(it.follow_score) << ',' << fmt(it.group_score) << '\n';
    }
}

void write_ads_csv(std::ostream& out, const std::vector<AdItem>& ads) {
    out << kAdsHeader << '\n';
    for (const auto& ad : ads) {
        out << ad.id << ',' << ad.image_size << ',' << fmt(ad.bid_price) << ',' << fmt(ad.hidden_cost) << ','
            << fmt(ad.predicted_ctr) << ',' << fmt(ad.predicted_recall) << '\n';
    }
}

std::vector<RegularItem> read_items_csv(std::istream& in) {
    return read_csv<RegularItem>(in, kItemsHeader, 6, &parse_item);
}

std::vector<AdItem> read_ads_csv(std::istream& in) {
    return read_csv<AdItem>(in, kAdsHeader, 6, &parse_ad);
}

void save_catalog(const std::filesystem::path& dir, const Catalog& catalog) {
    std::ostringstream items;
    write_items_csv(items, catalog.items());
    write_text_file(dir / kItemsFile, items.str());
    std::ostringstream ads;
    write_ads_csv(ads, catalog.ads());
    write_text_file(dir / kAdsFile, ads.str());
}

Catalog load_catalog(const std::filesystem::path& dir, const FeatureSchema& schema) {
    auto load = [&](const char* name, auto reader) {
        std::istringstream ss(read_text_file(dir / name));
        try {
            return reader(ss);
        } catch (const ParseError& e) {
            throw ParseError((dir / name).string() + ": " + e.detail(), e.line());
        }
    };
    auto items = load(kItemsFile, read_items_csv);
    auto ads = load(kAdsFile, read_ads_csv);
    return Catalog(std::move(items), std::move(ads), schema);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw InputError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw InputError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace ram
