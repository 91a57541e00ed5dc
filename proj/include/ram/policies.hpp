#pragma once

#include "ram/as_agent.hpp"
#include "ram/auction.hpp"
#include "ram/policy.hpp"
#include "ram/rs_agent.hpp"

namespace ram {

/// Trained RAM: cascade rec-list from the RS net, then the bidding rule over the AS Q table.
class RamPolicy final : public Policy {
public:
    RamPolicy(const CascadeQNet& rs, const AdQNet& as, const Catalog& catalog, BiddingRule rule,
              RevenueSettings revenue);
    Decision decide(const PolicyInput& input, std::mt19937_64& rng) const override;
    std::string name() const override { return rule_.name(); }

private:
    const CascadeQNet* rs_;
    const AdQNet* as_;
    const Catalog* catalog_;
    BiddingRule rule_;
    RevenueSettings revenue_;
};

/// Uniform random list; a fair coin decides insertion, then a uniform ad and slot.
class RandomPolicy final : public Policy {
public:
    explicit RandomPolicy(int k);
    Decision decide(const PolicyInput& input, std::mt19937_64& rng) const override;
    std::string name() const override { return "random"; }

private:
    int k_;
};

/// Myopic: top-k by mean predicted score, and always the highest-revenue ad at the first slot.
class GreedyPolicy final : public Policy {
public:
    GreedyPolicy(const Catalog& catalog, int k, RevenueSettings revenue);
    Decision decide(const PolicyInput& input, std::mt19937_64& rng) const override;
    std::string name() const override { return "greedy"; }

private:
    const Catalog* catalog_;
    int k_;
    RevenueSettings revenue_;
};

}  // namespace ram
