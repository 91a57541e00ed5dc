#include "ram/policies.hpp"

#include "ram/errors.hpp"

#include <algorithm>

namespace ram {

namespace {

std::vector<int> admissible(const PolicyInput& input) {
    std::vector<int> ids;
    for (int id : input.request.rec_pool)
        if (!input.exclude.count(id) && std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    return ids;
}

}  // namespace

RamPolicy::RamPolicy(const CascadeQNet& rs, const AdQNet& as, const Catalog& catalog, BiddingRule rule,
                     RevenueSettings revenue)
    : rs_(&rs), as_(&as), catalog_(&catalog), rule_(rule), revenue_(revenue) {}

Decision RamPolicy::decide(const PolicyInput& input, std::mt19937_64&) const {
    Decision d;
    const EncodedState s_rs = rs_->encode(*catalog_, input.history, input.context);
    d.rec_list = rs_->select_rec_list(s_rs, *catalog_, input.request.rec_pool, rs_->dims().k, input.exclude).items;
    const EncodedState s_as = as_->encode(*catalog_, input.history, input.context);
    const QTable table = as_->q_table(s_as, as_->rec_list_encoding(*catalog_, d.rec_list), *catalog_,
                                      input.request.ad_pool);
    d.ad = bid_select(table, revenue_model(*catalog_, input.request.ad_pool, revenue_), rule_);
    return d;
}

RandomPolicy::RandomPolicy(int k) : k_(k) {}

Decision RandomPolicy::decide(const PolicyInput& input, std::mt19937_64& rng) const {
    std::vector<int> ids = admissible(input);
    if (static_cast<int>(ids.size()) < k_) throw EnvironmentError("random policy: not enough candidates");
    Decision d;
    for (int j = 0; j < k_; ++j) {
        std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(j), ids.size() - 1);
        std::swap(ids[static_cast<std::size_t>(j)], ids[pick(rng)]);
        d.rec_list.push_back(ids[static_cast<std::size_t>(j)]);
    }
    if (std::bernoulli_distribution(0.5)(rng) && !input.request.ad_pool.empty()) {
        std::uniform_int_distribution<std::size_t> ad(0, input.request.ad_pool.size() - 1);
        std::uniform_int_distribution<int> slot(1, k_ + 1);
        d.ad = AdAction{input.request.ad_pool[ad(rng)], slot(rng)};
    }
    return d;
}

GreedyPolicy::GreedyPolicy(const Catalog& catalog, int k, RevenueSettings revenue)
    : catalog_(&catalog), k_(k), revenue_(revenue) {}

Decision GreedyPolicy::decide(const PolicyInput& input, std::mt19937_64&) const {
    std::vector<int> ids = admissible(input);
    if (static_cast<int>(ids.size()) < k_) throw EnvironmentError("greedy policy: not enough candidates");
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
        const double qa = catalog_->item(a).quality();
        const double qb = catalog_->item(b).quality();
        return qa != qb ? qa > qb : a < b;
    });
    Decision d;
    d.rec_list.assign(ids.begin(), ids.begin() + k_);
    const auto& pool = input.request.ad_pool;
    if (!pool.empty()) {
        const RevenueModel rev = revenue_model(*catalog_, pool, revenue_);
        std::size_t best = 0;
        for (std::size_t i = 1; i < pool.size(); ++i) {
            if (rev.row_revenue[i] > rev.row_revenue[best] ||
                (rev.row_revenue[i] == rev.row_revenue[best] && pool[i] < pool[best]))
                best = i;
        }
        d.ad = AdAction{pool[best], 1};
    }
    return d;
}

}  // namespace ram
