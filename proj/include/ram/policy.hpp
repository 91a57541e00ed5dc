#pragma once

#include "ram/domain.hpp"
#include "ram/state_encoder.hpp"

#include <random>
#include <string>
#include <unordered_set>
#include <vector>

namespace ram {

/// Candidate pools returned by recall for one request.
struct Request {
    std::vector<int> rec_pool;
    std::vector<int> ad_pool;
};

/// The hybrid action: ordered rec-list plus the ad decision.
struct Decision {
    std::vector<int> rec_list;
    AdAction ad;
};

struct PolicyInput {
    const BrowsingHistory& history;
    const Context& context;
    const Request& request;
    const std::unordered_set<int>& exclude;  // items already recommended this session
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual Decision decide(const PolicyInput& input, std::mt19937_64& rng) const = 0;
    virtual std::string name() const = 0;
};

}  // namespace ram
