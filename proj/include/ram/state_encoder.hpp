#pragma once

#include "ram/domain.hpp"
#include "ram/nn/layers.hpp"

#include <span>
#include <vector>

namespace ram {

/// Network widths. Defaults are the full-size architecture; tests shrink them.
struct NetDims {
    Eigen::Index embed_dim = 60;
    Eigen::Index state_hidden = 64;  // p_rec, p_ad and the rec-list prefix summary
    int k = 6;
    Eigen::Index hidden1 = 128;
    Eigen::Index hidden2 = 64;

    Eigen::Index state_dim() const { return 2 * state_hidden + kContextDim; }
    Eigen::Index rec_action_dim() const { return embed_dim * k; }
};

/// Browsed item ids, oldest first, each list capped at `cap` with FIFO eviction.
struct BrowsingHistory {
    std::vector<int> recs;
    std::vector<int> ads;
    std::size_t cap = 20;

    bool operator==(const BrowsingHistory&) const = default;
};

/// Appends browsed items at the bottom; kNoAd leaves the ad history untouched.
BrowsingHistory transition_state(const BrowsingHistory& history, std::span<const int> browsed_recs,
                                 int browsed_ad);

/// s = concat(p_rec, p_ad, c).
struct EncodedState {
    Vec values;
    Eigen::Index hidden = 0;

    auto p_rec() const { return values.head(hidden); }
    auto p_ad() const { return values.segment(hidden, hidden); }
    auto context() const { return values.tail(kContextDim); }
};

/// Embedding tables plus the two history GRUs of one network.
struct StateEncoder {
    ItemEmbedder embedder;
    nn::GruCell rec_gru;
    nn::GruCell ad_gru;
    Eigen::Index hidden = 0;

    Eigen::Index state_dim() const { return 2 * hidden + kContextDim; }
};

StateEncoder make_state_encoder(nn::ParamStore& store, const std::string& name, const NetDims& dims,
                                const FeatureSchema& schema, std::mt19937_64& rng);

struct EncoderCache {
    nn::GruSequenceCache rec;
    nn::GruSequenceCache ad;
    std::vector<int> rec_ids;
    std::vector<int> ad_ids;
    bool valid = false;
};

/// Final hidden states of the history GRUs (zero start, empty history gives zeros) plus context.
EncodedState encode_state(const nn::ParamStore& store, const StateEncoder& enc, const Catalog& catalog,
                          const BrowsingHistory& history, const Context& context, EncoderCache* cache = nullptr);

/// Accumulates gradients for dL/ds into the GRUs and embedding tables.
void encode_state_backward(nn::ParamStore& store, const StateEncoder& enc, const Catalog& catalog,
                           const EncoderCache& cache, const Vec& ds);

}  // namespace ram
