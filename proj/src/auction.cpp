#include "ram/auction.hpp"

#include "ram/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ram {

namespace {

bool key_less(const AdAction& a, const AdAction& b) {
    return a.ad_id != b.ad_id ? a.ad_id < b.ad_id : a.head < b.head;
}

std::size_t row_of(const QTable& table, int ad_id) {
    const auto it = std::find(table.ad_ids.begin(), table.ad_ids.end(), ad_id);
    if (it == table.ad_ids.end()) throw UsageError("ad " + std::to_string(ad_id) + " not in Q table");
    return static_cast<std::size_t>(it - table.ad_ids.begin());
}

void check_revenue(const QTable& table, const RevenueModel& rev) {
    if (rev.row_revenue.size() != table.rows()) throw UsageError("revenue model does not match Q table rows");
}

}  // namespace

std::size_t QTable::no_ad_row() const {
    return row_of(*this, kNoAd);
}

double QTable::value(const AdAction& a) const {
    if (a.is_no_ad()) return q(static_cast<Eigen::Index>(no_ad_row()), 0);
    return q(static_cast<Eigen::Index>(row_of(*this, a.ad_id)), a.head);
}

std::string BiddingRule::name() const {
    return kind == Kind::ram_l ? "RAM-l" : "RAM-n";
}

BiddingRule parse_bidding_rule(const std::string& variant, double alpha, int n) {
    if (!std::isfinite(alpha) || alpha < 0.0) throw ConfigError("alpha must be finite and >= 0");
    if (n < 1) throw ConfigError("N must be >= 1");
    if (variant == "ram-l" || variant == "RAM-l") return {BiddingRule::Kind::ram_l, alpha, n};
    if (variant == "ram-n" || variant == "RAM-n") return {BiddingRule::Kind::ram_n, alpha, n};
    throw ConfigError("unknown bidding variant: " + variant + " (expected ram-l or ram-n)");
}

std::vector<AdAction> admissible_actions(const QTable& table) {
    std::vector<AdAction> cells;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const int id = table.ad_ids[r];
        if (id == kNoAd) {
            cells.push_back({kNoAd, 0});
        } else {
            for (int h = 1; h < table.heads(); ++h) cells.push_back({id, h});
        }
    }
    return cells;
}

AdAction ram_l_select(const QTable& table, const RevenueModel& rev, double alpha) {
    check_revenue(table, rev);
    bool have = false;
    AdAction best;
    double best_score = 0.0;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const int id = table.ad_ids[r];
        const int h_lo = id == kNoAd ? 0 : 1;
        const int h_hi = id == kNoAd ? 1 : table.heads();
        for (int h = h_lo; h < h_hi; ++h) {
            const AdAction cell{id, h};
            const double score = table.q(static_cast<Eigen::Index>(r), h) + alpha * rev.row_revenue[r];
            if (!have || score > best_score || (score == best_score && key_less(cell, best))) {
                have = true;
                best = cell;
                best_score = score;
            }
        }
    }
    if (!have) throw UsageError("ram_l_select: empty Q table");
    return best;
}

AdAction ram_n_select(const QTable& table, const RevenueModel& rev, int n) {
    check_revenue(table, rev);
    struct Cell {
        AdAction action;
        double q;
        double rev;
    };
    std::vector<Cell> cells;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const int id = table.ad_ids[r];
        if (id == kNoAd) {
            cells.push_back({{kNoAd, 0}, table.q(static_cast<Eigen::Index>(r), 0), 0.0});
        } else {
            for (int h = 1; h < table.heads(); ++h)
                cells.push_back({{id, h}, table.q(static_cast<Eigen::Index>(r), h), rev.row_revenue[r]});
        }
    }
    if (cells.empty()) throw UsageError("ram_n_select: empty Q table");
    const std::size_t take = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(n, 1)), 1, cells.size());
    std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        if (a.q != b.q) return a.q > b.q;
        return key_less(a.action, b.action);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < take; ++i) {
        const Cell& c = cells[i];
        const Cell& b = cells[best];
        if (c.rev > b.rev || (c.rev == b.rev && (c.q > b.q || (c.q == b.q && key_less(c.action, b.action)))))
            best = i;
    }
    return cells[best].action;
}

AdAction bid_select(const QTable& table, const RevenueModel& rev, const BiddingRule& rule) {
    return rule.kind == BiddingRule::Kind::ram_l ? ram_l_select(table, rev, rule.alpha)
                                                 : ram_n_select(table, rev, rule.n);
}

double gsp_payment(std::span<const double> bids, std::size_t winner, double reserve) {
    if (bids.empty() || winner >= bids.size()) throw UsageError("gsp_payment: no bids for the winner");
    for (std::size_t i = 0; i < bids.size(); ++i) {
        if (bids[i] > bids[winner]) throw UsageError("gsp_payment: winner is not the highest bidder");
    }
    return gsp_price(bids, winner, reserve);
}

double gsp_price(std::span<const double> bids, std::size_t index, double reserve) {
    if (bids.empty() || index >= bids.size()) throw UsageError("gsp_price: index out of range");
    bool found = false;
    double price = reserve;
    for (std::size_t i = 0; i < bids.size(); ++i) {
        if (i == index || bids[i] > bids[index]) continue;
        if (!found || bids[i] > price) {
            price = bids[i];
            found = true;
        }
    }
    return found ? std::max(price, reserve) : reserve;
}

RevenueModel revenue_model(const Catalog& catalog, std::span<const int> ad_pool, const RevenueSettings& settings) {
    std::vector<double> bids;
    bids.reserve(ad_pool.size());
    for (int id : ad_pool) bids.push_back(catalog.ad(id).bid_price);
    RevenueModel model;
    model.row_revenue.reserve(ad_pool.size() + 1);
    for (std::size_t i = 0; i < ad_pool.size(); ++i) {
        double r = gsp_price(bids, i, settings.reserve_price);
        if (settings.scale_by_ctr) r *= catalog.ad(ad_pool[i]).predicted_ctr;
        model.row_revenue.push_back(r);
    }
    model.row_revenue.push_back(0.0);
    return model;
}

}  // namespace ram
