#pragma once

#include "ram/domain.hpp"

#include <span>
#include <string>
#include <vector>

namespace ram {

/// Ad-network output over (candidate ads + NO_AD) x (k+2 heads).
/// Row i belongs to ad_ids[i]; the NO_AD row carries id kNoAd.
struct QTable {
    std::vector<int> ad_ids;
    Mat q;

    std::size_t rows() const noexcept { return ad_ids.size(); }
    int heads() const noexcept { return static_cast<int>(q.cols()); }
    std::size_t no_ad_row() const;
    /// Q of an executed action; NO_AD maps to (NO_AD row, head 0).
    double value(const AdAction& a) const;
};

/// Immediate revenue per QTable row; the NO_AD row is exactly 0.
struct RevenueModel {
    std::vector<double> row_revenue;
};

struct BiddingRule {
    enum class Kind { ram_l, ram_n };
    Kind kind = Kind::ram_l;
    double alpha = 0.5;
    int n = 2;

    static BiddingRule linear(double alpha) { return {Kind::ram_l, alpha, 2}; }
    static BiddingRule top_n(int n) { return {Kind::ram_n, 0.5, n}; }
    std::string name() const;
};

BiddingRule parse_bidding_rule(const std::string& variant, double alpha, int n);

/// Admissible cells are (real ad, head >= 1) and (NO_AD, head 0).
std::vector<AdAction> admissible_actions(const QTable& table);

/// argmax of Q + alpha * rev over admissible cells; ties go to the lowest (ad id, head).
AdAction ram_l_select(const QTable& table, const RevenueModel& rev, double alpha);

/// Top-N admissible cells by Q, then the one with the highest revenue
/// (revenue ties: higher Q, then lowest (ad id, head)). N is clamped to [1, #cells].
AdAction ram_n_select(const QTable& table, const RevenueModel& rev, int n);

AdAction bid_select(const QTable& table, const RevenueModel& rev, const BiddingRule& rule);

/// Second-price payment of the highest bidder. A lone bidder pays the reserve.
/// Empty bids, or a winner that is not the highest bid, is a usage error.
double gsp_payment(std::span<const double> bids, std::size_t winner, double reserve = 0.0);

/// GSP price when `index` is awarded the slot while ranked by bid: it pays the
/// highest competing bid not above its own, or the reserve if none. Equals
/// gsp_payment for the top bidder and never exceeds the ad's own bid (when bid >= reserve).
double gsp_price(std::span<const double> bids, std::size_t index, double reserve = 0.0);

struct RevenueSettings {
    double reserve_price = 0.05;
    bool scale_by_ctr = true;  // expected revenue under pay-per-click
};

/// Revenue per row of a table built over `ad_pool` (pool order, NO_AD last).
RevenueModel revenue_model(const Catalog& catalog, std::span<const int> ad_pool, const RevenueSettings& settings);

}  // namespace ram
