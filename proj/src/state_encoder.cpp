#include "ram/state_encoder.hpp"

#include "ram/errors.hpp"

namespace ram {

namespace {

void push_capped(std::vector<int>& v, int id, std::size_t cap) {
    v.push_back(id);
    if (v.size() > cap) v.erase(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() - cap));
}

}  // namespace

BrowsingHistory transition_state(const BrowsingHistory& history, std::span<const int> browsed_recs,
                                 int browsed_ad) {
    BrowsingHistory next = history;
    for (int id : browsed_recs) push_capped(next.recs, id, next.cap);
    if (browsed_ad != kNoAd) push_capped(next.ads, browsed_ad, next.cap);
    return next;
}

StateEncoder make_state_encoder(nn::ParamStore& store, const std::string& name, const NetDims& dims,
                                const FeatureSchema& schema, std::mt19937_64& rng) {
    StateEncoder enc;
    enc.hidden = dims.state_hidden;
    enc.embedder = make_embedder(store, name + ".embed", dims.embed_dim, schema, rng);
    enc.rec_gru = nn::make_gru(store, name + ".rec_gru", dims.embed_dim, dims.state_hidden, rng);
    enc.ad_gru = nn::make_gru(store, name + ".ad_gru", dims.embed_dim, dims.state_hidden, rng);
    return enc;
}

EncodedState encode_state(const nn::ParamStore& store, const StateEncoder& enc, const Catalog& catalog,
                          const BrowsingHistory& history, const Context& context, EncoderCache* cache) {
    std::vector<Vec> rec_inputs;
    rec_inputs.reserve(history.recs.size());
    for (int id : history.recs) rec_inputs.push_back(embed_item(store, enc.embedder, catalog, id));
    std::vector<Vec> ad_inputs;
    ad_inputs.reserve(history.ads.size());
    for (int id : history.ads) ad_inputs.push_back(embed_ad(store, enc.embedder, catalog, id));

    EncodedState out;
    out.hidden = enc.hidden;
    out.values.resize(enc.state_dim());
    out.values.head(enc.hidden) = nn::gru_run(store, enc.rec_gru, rec_inputs, cache ? &cache->rec : nullptr);
    out.values.segment(enc.hidden, enc.hidden) =
        nn::gru_run(store, enc.ad_gru, ad_inputs, cache ? &cache->ad : nullptr);
    out.values.tail(kContextDim) = context_features(context);
    if (cache) {
        cache->rec_ids = history.recs;
        cache->ad_ids = history.ads;
        cache->valid = true;
    }
    return out;
}

void encode_state_backward(nn::ParamStore& store, const StateEncoder& enc, const Catalog& catalog,
                           const EncoderCache& cache, const Vec& ds) {
    if (!cache.valid) throw UsageError("encode_state_backward called before forward");
    nn::check_dim(ds.size(), enc.state_dim(), "encode_state_backward");
    if (!cache.rec_ids.empty()) {
        const auto dx = nn::gru_run_backward(store, enc.rec_gru, cache.rec, ds.head(enc.hidden));
        for (std::size_t i = 0; i < dx.size(); ++i)
            embed_features_backward(store, enc.embedder.regular_table, catalog.item_features(cache.rec_ids[i]),
                                    dx[i]);
    }
    if (!cache.ad_ids.empty()) {
        const auto dx = nn::gru_run_backward(store, enc.ad_gru, cache.ad, ds.segment(enc.hidden, enc.hidden));
        for (std::size_t i = 0; i < dx.size(); ++i)
            embed_features_backward(store, enc.embedder.ad_table, catalog.ad_features_of(cache.ad_ids[i]), dx[i]);
    }
}

}  // namespace ram
