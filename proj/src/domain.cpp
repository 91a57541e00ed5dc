#include "ram/domain.hpp"

#include "ram/errors.hpp"
#include "ram/nn/layers.hpp"

#include <algorithm>
#include <cmath>

namespace ram {

namespace {

void check_unit(double v, const char* what, int id) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw InputError(std::string(what) + " out of [0,1] for id " + std::to_string(id));
    }
}

int log_bin(double value, double lo, double hi, int bins) {
    return discretize_index(std::log(std::max(value, lo)), std::log(lo), std::log(hi), bins);
}

}  // namespace

double RegularItem::quality() const {
    return (like_score + finish_score + comment_score + follow_score + group_score) / kScoreCount;
}

void validate(const RegularItem& item) {
    for (double s : item.scores()) check_unit(s, "regular item score", item.id);
}

void validate(const AdItem& ad) {
    if (!std::isfinite(ad.bid_price) || ad.bid_price < 0.0)
        throw InputError("negative bid_price for ad " + std::to_string(ad.id));
    if (!std::isfinite(ad.hidden_cost) || ad.hidden_cost < 0.0)
        throw InputError("negative hidden_cost for ad " + std::to_string(ad.id));
    check_unit(ad.predicted_ctr, "predicted_ctr", ad.id);
    check_unit(ad.predicted_recall, "predicted_recall", ad.id);
}

int discretize_index(double value, double lo, double hi, int bins) {
    if (bins < 2 || !(lo < hi)) throw ConfigError("discretize: need bins >= 2 and lo < hi");
    if (!std::isfinite(value)) throw InputError("discretize: non-finite value");
    const double pos = std::floor((value - lo) / (hi - lo) * bins);
    if (pos < 0.0) return 0;
    if (pos > bins - 1) return bins - 1;
    return static_cast<int>(pos);
}

Vec discretize(double value, double lo, double hi, int bins) {
    Vec v = Vec::Zero(bins);
    v(discretize_index(value, lo, hi, bins)) = 1.0;
    return v;
}

FeatureIndex regular_features(const RegularItem& item, const FeatureSchema& schema) {
    FeatureIndex idx;
    idx.reserve(kScoreCount);
    const auto scores = item.scores();
    for (int i = 0; i < kScoreCount; ++i) {
        idx.push_back(i * schema.score_bins + discretize_index(scores[i], 0.0, 1.0, schema.score_bins));
    }
    return idx;
}

FeatureIndex ad_features(const AdItem& ad, const FeatureSchema& schema) {
    FeatureIndex idx;
    int offset = 0;
    const int image = (ad.image_size >= 0 && ad.image_size < schema.image_levels) ? ad.image_size
                                                                                  : schema.image_levels;
    idx.push_back(offset + image);
    offset += schema.image_levels + 1;
    idx.push_back(offset + log_bin(ad.bid_price, schema.price_lo, schema.price_hi, schema.price_bins));
    offset += schema.price_bins;
    idx.push_back(offset + log_bin(ad.hidden_cost, schema.cost_lo, schema.cost_hi, schema.cost_bins));
    offset += schema.cost_bins;
    idx.push_back(offset + discretize_index(ad.predicted_ctr, 0.0, 1.0, schema.prob_bins));
    offset += schema.prob_bins;
    idx.push_back(offset + discretize_index(ad.predicted_recall, 0.0, 1.0, schema.prob_bins));
    return idx;
}

Vec one_hot_vector(const FeatureIndex& index, int width) {
    Vec v = Vec::Zero(width);
    for (int i : index) v(i) = 1.0;
    return v;
}

Catalog::Catalog(std::vector<RegularItem> items, std::vector<AdItem> ads, FeatureSchema schema)
    : items_(std::move(items)), ads_(std::move(ads)), schema_(schema) {
    item_index_.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) {
        validate(items_[i]);
        if (!item_pos_.emplace(items_[i].id, i).second)
            throw InputError("duplicate regular item id " + std::to_string(items_[i].id));
        item_index_.push_back(regular_features(items_[i], schema_));
    }
    ad_index_.reserve(ads_.size());
    for (std::size_t i = 0; i < ads_.size(); ++i) {
        validate(ads_[i]);
        if (!ad_pos_.emplace(ads_[i].id, i).second)
            throw InputError("duplicate ad id " + std::to_string(ads_[i].id));
        ad_index_.push_back(ad_features(ads_[i], schema_));
    }
}

const RegularItem& Catalog::item(int id) const {
    auto it = item_pos_.find(id);
    if (it == item_pos_.end()) throw InputError("unknown regular item id " + std::to_string(id));
    return items_[it->second];
}

const AdItem& Catalog::ad(int id) const {
    auto it = ad_pos_.find(id);
    if (it == ad_pos_.end()) throw InputError("unknown ad id " + std::to_string(id));
    return ads_[it->second];
}

const FeatureIndex& Catalog::item_features(int id) const {
    auto it = item_pos_.find(id);
    if (it == item_pos_.end()) throw InputError("unknown regular item id " + std::to_string(id));
    return item_index_[it->second];
}

const FeatureIndex& Catalog::ad_features_of(int id) const {
    auto it = ad_pos_.find(id);
    if (it == ad_pos_.end()) throw InputError("unknown ad id " + std::to_string(id));
    return ad_index_[it->second];
}

ItemEmbedder make_embedder(nn::ParamStore& store, const std::string& name, Eigen::Index dim,
                           const FeatureSchema& schema, std::mt19937_64& rng) {
    ItemEmbedder e;
    e.dim = dim;
    e.regular_table = store.add_glorot(name + ".regular", dim, schema.regular_width(), rng);
    e.ad_table = store.add_glorot(name + ".ad", dim, schema.ad_width(), rng);
    return e;
}

Vec embed_features(const nn::ParamStore& store, nn::ParamId table, const FeatureIndex& index) {
    const Mat& t = store.value(table);
    Vec v = Vec::Zero(t.rows());
    for (int col : index) v += t.col(col);
    return v;
}

void embed_features_backward(nn::ParamStore& store, nn::ParamId table, const FeatureIndex& index,
                             const Vec& d) {
    Mat& g = store.grad(table);
    for (int col : index) g.col(col) += d;
}

Vec embed_item(const nn::ParamStore& store, const ItemEmbedder& e, const Catalog& catalog, int item_id) {
    return embed_features(store, e.regular_table, catalog.item_features(item_id));
}

Vec embed_ad(const nn::ParamStore& store, const ItemEmbedder& e, const Catalog& catalog, int ad_id) {
    return embed_features(store, e.ad_table, catalog.ad_features_of(ad_id));
}

Vec encode_rec_action(std::span<const Vec> items, int k) {
    if (static_cast<int>(items.size()) != k)
        throw ConfigError("encode_rec_action: expected " + std::to_string(k) + " items, got " +
                          std::to_string(items.size()));
    if (items.empty()) return Vec();
    const Eigen::Index d = items[0].size();
    Vec out(d * k);
    for (int i = 0; i < k; ++i) {
        nn::check_dim(items[i].size(), d, "encode_rec_action");
        out.segment(i * d, d) = items[i];
    }
    return out;
}

Vec context_features(const Context& c) {
    if (c.app_version < 0 || c.app_version > 4 || c.os < 0 || c.os > 1 || c.feed_type < 0 || c.feed_type > 1)
        throw InputError("context level out of range");
    Vec v = Vec::Zero(kContextDim);
    v(c.app_version) = 1.0;
    v(5 + c.os) = 1.0;
    v(7 + c.feed_type) = 1.0;
    v(9) = 1.0;  // constant block
    return v;
}

Vec slot_one_hot(int slot, int k) {
    if (slot < 1 || slot > k + 1) throw UsageError("slot out of range");
    Vec v = Vec::Zero(k + 1);
    v(slot - 1) = 1.0;
    return v;
}

}  // namespace ram
