#pragma once

#include "ram/auction.hpp"
#include "ram/nn/optimizer.hpp"
#include "ram/state_encoder.hpp"

#include <iosfwd>
#include <span>

namespace ram {

/// Dueling ad-insertion network: Q(s, ad)[h] = V(s, rec) + A(s, rec, ad)[h], h in [0, k+1].
/// Both towers are two hidden layers; there is no mean subtraction.
class AdQNet {
public:
    AdQNet(const NetDims& dims, const FeatureSchema& schema, std::uint64_t seed);

    const NetDims& dims() const noexcept { return dims_; }
    int heads() const noexcept { return dims_.k + 2; }
    nn::ParamStore& params() noexcept { return store_; }
    const nn::ParamStore& params() const noexcept { return store_; }
    const StateEncoder& encoder() const noexcept { return encoder_; }
    const nn::Dense& value_layer(int i) const { return value_[i]; }
    const nn::Dense& advantage_layer(int i) const { return advantage_[i]; }

    EncodedState encode(const Catalog& catalog, const BrowsingHistory& history, const Context& context) const;

    /// Concatenated embeddings of the k listed items under this network's embedder.
    Vec rec_list_encoding(const Catalog& catalog, std::span<const int> rec_list) const;

    /// Ad embedding, or the zero vector for kNoAd.
    Vec ad_input(const Catalog& catalog, int ad_id) const;

    Vec value_tower(const EncodedState& s, const Vec& rec_enc) const;
    Vec advantage_tower(const EncodedState& s, const Vec& rec_enc, const Vec& ad) const;

    /// k+2 Q-values for one ad input (zero vector = NO_AD).
    Vec q_row(const EncodedState& s, const Vec& rec_enc, const Vec& ad) const;

    /// One row per pool ad (pool order) plus a trailing NO_AD row.
    QTable q_table(const EncodedState& s, const Vec& rec_enc, const Catalog& catalog, std::span<const int> ad_pool,
                   std::size_t* row_evaluations = nullptr) const;

    /// Adds weight * d/dtheta (y - Q(s, a))^2; returns (y - Q(s, a))^2.
    double accumulate_loss(const Catalog& catalog, const BrowsingHistory& history, const Context& context,
                           std::span<const int> rec_list, const AdAction& action, double y, double weight);

private:
    NetDims dims_;
    nn::ParamStore store_;
    StateEncoder encoder_;
    nn::Dense value_[3];
    nn::Dense advantage_[3];
};

/// y = r when terminal, else r + gamma * Q_target(s', BS(Q_target(s', A'))).
double as_target(double reward, double next_value, bool terminal, double gamma);

struct AsBootstrap {
    AdAction action;
    double value = 0.0;
    QTable table;
};

/// The bidding rule applied to the target network's table for (s', next list, next ads).
AsBootstrap as_bootstrap(const AdQNet& target, const Catalog& catalog, const BrowsingHistory& next_history,
                         const Context& next_context, std::span<const int> next_rec_list,
                         std::span<const int> next_ads, const BiddingRule& rule, const RevenueSettings& revenue);

struct AsSample {
    const BrowsingHistory* history = nullptr;
    Context context;
    std::span<const int> rec_list;
    AdAction action;
    double y = 0.0;
};

class AsAgent {
public:
    AsAgent(const NetDims& dims, const FeatureSchema& schema, std::uint64_t seed,
            nn::OptimizerKind optimizer = nn::OptimizerKind::adam, double lr = 1e-3);

    AdQNet& eval() noexcept { return eval_; }
    const AdQNet& eval() const noexcept { return eval_; }
    const AdQNet& target() const noexcept { return target_; }
    AdQNet& target_mut() noexcept { return target_; }
    double learning_rate() const noexcept { return lr_; }
    void set_learning_rate(double lr) noexcept { lr_ = lr; }

    /// One optimizer step on mean (y - Q(s, a))^2. Returns that mean.
    double update(const Catalog& catalog, std::span<const AsSample> batch);

    void sync_target();

    void write(std::ostream& out) const;
    void read(std::istream& in);

private:
    AdQNet eval_;
    AdQNet target_;
    nn::Optimizer optimizer_;
    double lr_;
};

}  // namespace ram
