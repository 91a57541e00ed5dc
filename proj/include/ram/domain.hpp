#pragma once

#include "ram/nn/param_store.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ram {

using nn::Mat;
using nn::Vec;

inline constexpr int kNoAd = -1;
inline constexpr int kContextDim = 13;
inline constexpr int kScoreCount = 5;

/// Regular video. Scores are platform predictions in [0,1], order:
/// like, finish, comment, follow, group.
struct RegularItem {
    int id = 0;
    double like_score = 0.0;
    double finish_score = 0.0;
    double comment_score = 0.0;
    double follow_score = 0.0;
    double group_score = 0.0;

    std::array<double, kScoreCount> scores() const {
        return {like_score, finish_score, comment_score, follow_score, group_score};
    }
    double quality() const;
};

struct AdItem {
    int id = 0;
    int image_size = 0;  // categorical level; out-of-range maps to the unknown bucket
    double bid_price = 0.0;
    double hidden_cost = 0.0;
    double predicted_ctr = 0.0;
    double predicted_recall = 0.0;
};

void validate(const RegularItem& item);
void validate(const AdItem& ad);

/// Bin counts and ranges used to one-hot the item features.
struct FeatureSchema {
    int score_bins = 10;
    int image_levels = 4;  // plus one reserved unknown bucket
    int price_bins = 10;
    double price_lo = 0.1;  // bid_price, log-scaled
    double price_hi = 10.0;
    int cost_bins = 10;
    double cost_lo = 0.01;  // hidden_cost, log-scaled
    double cost_hi = 1.0;
    int prob_bins = 10;  // predicted_ctr, predicted_recall

    int regular_width() const { return kScoreCount * score_bins; }
    int ad_width() const { return image_levels + 1 + price_bins + cost_bins + 2 * prob_bins; }
};

/// Bin index clamp(floor((value-lo)/(hi-lo)*bins), 0, bins-1). Non-finite value is an InputError.
int discretize_index(double value, double lo, double hi, int bins);
Vec discretize(double value, double lo, double hi, int bins);

/// Active one-hot columns of an item's concatenated feature vector.
using FeatureIndex = std::vector<int>;

FeatureIndex regular_features(const RegularItem& item, const FeatureSchema& schema);
FeatureIndex ad_features(const AdItem& ad, const FeatureSchema& schema);

Vec one_hot_vector(const FeatureIndex& index, int width);

/// Regular items and ads with precomputed one-hot columns and id lookup.
class Catalog {
public:
    Catalog() = default;
    Catalog(std::vector<RegularItem> items, std::vector<AdItem> ads, FeatureSchema schema = {});

    const std::vector<RegularItem>& items() const noexcept { return items_; }
    const std::vector<AdItem>& ads() const noexcept { return ads_; }
    const FeatureSchema& schema() const noexcept { return schema_; }

    const RegularItem& item(int id) const;
    const AdItem& ad(int id) const;
    const FeatureIndex& item_features(int id) const;
    const FeatureIndex& ad_features_of(int id) const;
    bool has_item(int id) const { return item_pos_.count(id) != 0; }
    bool has_ad(int id) const { return ad_pos_.count(id) != 0; }

private:
    std::vector<RegularItem> items_;
    std::vector<AdItem> ads_;
    FeatureSchema schema_;
    std::vector<FeatureIndex> item_index_;
    std::vector<FeatureIndex> ad_index_;
    std::unordered_map<int, std::size_t> item_pos_;
    std::unordered_map<int, std::size_t> ad_pos_;
};

/// Learned linear maps from one-hot features to embedding vectors (no bias,
/// so zero parameters give a zero embedding).
struct ItemEmbedder {
    nn::ParamId regular_table;  // embed_dim x regular_width
    nn::ParamId ad_table;       // embed_dim x ad_width
    Eigen::Index dim = 0;
};

ItemEmbedder make_embedder(nn::ParamStore& store, const std::string& name, Eigen::Index dim,
                           const FeatureSchema& schema, std::mt19937_64& rng);

Vec embed_features(const nn::ParamStore& store, nn::ParamId table, const FeatureIndex& index);
void embed_features_backward(nn::ParamStore& store, nn::ParamId table, const FeatureIndex& index, const Vec& d);

Vec embed_item(const nn::ParamStore& store, const ItemEmbedder& e, const Catalog& catalog, int item_id);
Vec embed_ad(const nn::ParamStore& store, const ItemEmbedder& e, const Catalog& catalog, int ad_id);

/// Order-preserving concatenation of exactly k embeddings.
Vec encode_rec_action(std::span<const Vec> items, int k);

/// Request context: app version (5 levels), OS (2), feed type (2), plus a
/// 4-wide constant block. The encoded vector has 13 entries and 4 ones.
struct Context {
    int app_version = 0;
    int os = 0;
    int feed_type = 0;

    bool operator==(const Context&) const = default;
};

Vec context_features(const Context& c);

/// Head index convention for the ad network output: 0 = no insertion,
/// h in [1, k+1] = insert before rec slot h (h = k+1 appends).
struct AdAction {
    int ad_id = kNoAd;
    int head = 0;

    bool is_no_ad() const noexcept { return ad_id == kNoAd; }
    bool operator==(const AdAction&) const = default;
};

/// One-hot over k+1 insertion slots; slot in [1, k+1].
Vec slot_one_hot(int slot, int k);

struct SessionLogRecord {
    std::int64_t session = 0;
    int user = 0;
    int t = 0;
    Context context;
    std::vector<int> rec_history;  // browsed regular ids before this request, oldest first
    std::vector<int> ad_history;
    std::vector<int> rec_pool;
    std::vector<int> ad_pool;
    std::vector<int> rec_list;
    int ad_id = kNoAd;
    int slot = 0;  // head index; 0 when no ad
    double r_rs = 0.0;
    int r_as = 0;
    double revenue = 0.0;
    bool terminal = false;

    AdAction ad_action() const { return AdAction{ad_id, slot}; }
    bool operator==(const SessionLogRecord&) const = default;
};

}  // namespace ram
