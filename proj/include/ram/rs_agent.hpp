#pragma once

#include "ram/errors.hpp"
#include "ram/nn/optimizer.hpp"
#include "ram/state_encoder.hpp"

#include <algorithm>
#include <iosfwd>
#include <limits>
#include <span>
#include <unordered_set>
#include <vector>

namespace ram {

struct CascadeResult {
    std::vector<int> items;
    double value = 0.0;  // Q^k of the completed list
    std::size_t evaluations = 0;
};

/// Greedy cascade over positions 1..k. `score(prefix, remaining)` returns one
/// Q^j value per remaining candidate. At each position the argmax is taken,
/// ties going to the lowest item id, and the winner leaves the pool.
template <class PositionScorer>
CascadeResult cascade_select(std::span<const int> candidates, int k, const std::unordered_set<int>& exclude,
                             PositionScorer&& score) {
    std::vector<int> pool;
    pool.reserve(candidates.size());
    for (int id : candidates) {
        if (exclude.count(id) == 0 && std::find(pool.begin(), pool.end(), id) == pool.end()) pool.push_back(id);
    }
    if (k < 1 || static_cast<int>(pool.size()) < k) {
        throw EnvironmentError("cascade: " + std::to_string(pool.size()) + " admissible candidates for k = " +
                               std::to_string(k));
    }
    CascadeResult out;
    out.items.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const std::vector<double> q = score(std::span<const int>(out.items), std::span<const int>(pool));
        out.evaluations += pool.size();
        std::size_t best = 0;
        for (std::size_t i = 1; i < pool.size(); ++i) {
            if (q[i] > q[best] || (q[i] == q[best] && pool[i] < pool[best])) best = i;
        }
        out.items.push_back(pool[best]);
        out.value = q[best];
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return out;
}

/// Cascading Q-network. Q^j(s, a(1:j-1), c) = MLP(s, GRU(prefix embeddings), embed(c)),
/// one parameter set shared by every position.
class CascadeQNet {
public:
    CascadeQNet(const NetDims& dims, const FeatureSchema& schema, std::uint64_t seed);

    const NetDims& dims() const noexcept { return dims_; }
    nn::ParamStore& params() noexcept { return store_; }
    const nn::ParamStore& params() const noexcept { return store_; }
    const StateEncoder& encoder() const noexcept { return encoder_; }
    const nn::GruCell& prefix_gru() const noexcept { return prefix_gru_; }
    const nn::Dense& layer(int i) const { return i == 0 ? l1_ : (i == 1 ? l2_ : out_); }

    EncodedState encode(const Catalog& catalog, const BrowsingHistory& history, const Context& context) const;

    /// Q^j with j = prefix.size() + 1. A prefix of k or more items is a usage error.
    double q_value(const EncodedState& s, const Catalog& catalog, std::span<const int> prefix, int candidate) const;

    CascadeResult select_rec_list(const EncodedState& s, const Catalog& catalog, std::span<const int> candidates,
                                  int k, const std::unordered_set<int>& exclude = {}) const;

    /// Q^1..Q^k along a fixed list.
    std::vector<double> cascade_values(const Catalog& catalog, const BrowsingHistory& history,
                                       const Context& context, std::span<const int> rec_list) const;

    /// Adds weight * d/dtheta sum_j (y - Q^j)^2 to the gradients; returns sum_j (y - Q^j)^2.
    double accumulate_loss(const Catalog& catalog, const BrowsingHistory& history, const Context& context,
                           std::span<const int> rec_list, double y, double weight);

private:
    NetDims dims_;
    nn::ParamStore store_;
    StateEncoder encoder_;
    nn::GruCell prefix_gru_;
    nn::Dense l1_;
    nn::Dense l2_;
    nn::Dense out_;
};

/// y = r when terminal, else r + gamma * Q^k_target(s', a'*(1:k)).
double rs_target(double reward, double next_value, bool terminal, double gamma);

struct RsSample {
    const BrowsingHistory* history = nullptr;
    Context context;
    std::span<const int> rec_list;
    double y = 0.0;
};

/// Evaluation and target cascade networks with their optimizer.
class RsAgent {
public:
    RsAgent(const NetDims& dims, const FeatureSchema& schema, std::uint64_t seed,
            nn::OptimizerKind optimizer = nn::OptimizerKind::adam, double lr = 1e-3);

    CascadeQNet& eval() noexcept { return eval_; }
    const CascadeQNet& eval() const noexcept { return eval_; }
    const CascadeQNet& target() const noexcept { return target_; }
    CascadeQNet& target_mut() noexcept { return target_; }
    double learning_rate() const noexcept { return lr_; }
    void set_learning_rate(double lr) noexcept { lr_ = lr; }

    /// One optimizer step on mean over batch and positions of (y - Q^j)^2. Returns that mean.
    double update(const Catalog& catalog, std::span<const RsSample> batch);

    void sync_target();

    void write(std::ostream& out) const;
    void read(std::istream& in);

private:
    CascadeQNet eval_;
    CascadeQNet target_;
    nn::Optimizer optimizer_;
    double lr_;
};

}  // namespace ram
