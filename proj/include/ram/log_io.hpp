#pragma once

#include "ram/domain.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ram {

/// One JSON object per line. Doubles are written with round-trip precision.
void write_log(std::ostream& out, const std::vector<SessionLogRecord>& records);
std::vector<SessionLogRecord> read_log(std::istream& in);

void save_log(const std::filesystem::path& path, const std::vector<SessionLogRecord>& records);
std::vector<SessionLogRecord> load_log(const std::filesystem::path& path);

struct LogReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    std::size_t sessions = 0;
    std::size_t records = 0;

    bool ok() const noexcept { return errors.empty(); }
    std::string summary(std::size_t max_lines = 20) const;
};

/// Structural checks: ids in catalog, list sizes, NO_AD encoding, revenue sign,
/// r_as in {0,1}, chronological t, history chain between consecutive records.
/// A session without a terminal record is a warning.
LogReport validate_log(const std::vector<SessionLogRecord>& records, const Catalog& catalog, int k,
                       std::size_t history_cap);

/// Catalog files: header line plus one CSV row per item.
void write_items_csv(std::ostream& out, const std::vector<RegularItem>& items);
void write_ads_csv(std::ostream& out, const std::vector<AdItem>& ads);
std::vector<RegularItem> read_items_csv(std::istream& in);
std::vector<AdItem> read_ads_csv(std::istream& in);

inline constexpr const char* kItemsFile = "items.csv";
inline constexpr const char* kAdsFile = "ads.csv";
inline constexpr const char* kLogFile = "sessions.jsonl";

void save_catalog(const std::filesystem::path& dir, const Catalog& catalog);
Catalog load_catalog(const std::filesystem::path& dir, const FeatureSchema& schema = {});

/// Creates parent directories; I/O failures throw InputError.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace ram
