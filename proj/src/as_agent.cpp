#include "ram/as_agent.hpp"

#include "ram/errors.hpp"

#include <istream>
#include <ostream>

namespace ram {

AdQNet::AdQNet(const NetDims& dims, const FeatureSchema& schema, std::uint64_t seed) : dims_(dims) {
    std::mt19937_64 rng(seed);
    encoder_ = make_state_encoder(store_, "as.encoder", dims, schema, rng);
    const Eigen::Index base = dims.state_dim() + dims.rec_action_dim();
    value_[0] = nn::make_dense(store_, "as.value1", base, dims.hidden1, nn::Activation::relu, rng);
    value_[1] = nn::make_dense(store_, "as.value2", dims.hidden1, dims.hidden2, nn::Activation::relu, rng);
    value_[2] = nn::make_dense(store_, "as.value_out", dims.hidden2, 1, nn::Activation::identity, rng);
    advantage_[0] = nn::make_dense(store_, "as.adv1", base + dims.embed_dim, dims.hidden1, nn::Activation::relu, rng);
    advantage_[1] = nn::make_dense(store_, "as.adv2", dims.hidden1, dims.hidden2, nn::Activation::relu, rng);
    advantage_[2] = nn::make_dense(store_, "as.adv_out", dims.hidden2, dims.k + 2, nn::Activation::identity, rng);
}

EncodedState AdQNet::encode(const Catalog& catalog, const BrowsingHistory& history, const Context& context) const {
    return encode_state(store_, encoder_, catalog, history, context);
}

Vec AdQNet::rec_list_encoding(const Catalog& catalog, std::span<const int> rec_list) const {
    std::vector<Vec> emb;
    emb.reserve(rec_list.size());
    for (int id : rec_list) emb.push_back(embed_item(store_, encoder_.embedder, catalog, id));
    return encode_rec_action(emb, dims_.k);
}

Vec AdQNet::ad_input(const Catalog& catalog, int ad_id) const {
    if (ad_id == kNoAd) return Vec::Zero(dims_.embed_dim);
    return embed_ad(store_, encoder_.embedder, catalog, ad_id);
}

Vec AdQNet::value_tower(const EncodedState& s, const Vec& rec_enc) const {
    Vec x(value_[0].in);
    x << s.values, rec_enc;
    Vec a = nn::dense_forward(store_, value_[0], x);
    a = nn::dense_forward(store_, value_[1], a);
    return nn::dense_forward(store_, value_[2], a);
}

Vec AdQNet::advantage_tower(const EncodedState& s, const Vec& rec_enc, const Vec& ad) const {
    Vec x(advantage_[0].in);
    x << s.values, rec_enc, ad;
    Vec a = nn::dense_forward(store_, advantage_[0], x);
    a = nn::dense_forward(store_, advantage_[1], a);
    return nn::dense_forward(store_, advantage_[2], a);
}

Vec AdQNet::q_row(const EncodedState& s, const Vec& rec_enc, const Vec& ad) const {
    const double v = value_tower(s, rec_enc)(0);
    return advantage_tower(s, rec_enc, ad).array() + v;
}

QTable AdQNet::q_table(const EncodedState& s, const Vec& rec_enc, const Catalog& catalog,
                       std::span<const int> ad_pool, std::size_t* row_evaluations) const {
    const Eigen::Index E = dims_.embed_dim;
    nn::check_dim(s.values.size(), dims_.state_dim(), "q_table state");
    nn::check_dim(rec_enc.size(), dims_.rec_action_dim(), "q_table rec-list encoding");

    const double v = value_tower(s, rec_enc)(0);

    // Shared part of the advantage tower's first layer, then one column per row.
    const Mat& w1 = store_.value(advantage_[0].weight);
    Vec shared = w1.leftCols(dims_.state_dim()) * s.values;
    shared.noalias() += w1.middleCols(dims_.state_dim(), dims_.rec_action_dim()) * rec_enc;
    shared += store_.value(advantage_[0].bias).col(0);

    const Eigen::Index rows = static_cast<Eigen::Index>(ad_pool.size()) + 1;
    Mat pre(w1.rows(), rows);
    QTable table;
    table.ad_ids.assign(ad_pool.begin(), ad_pool.end());
    table.ad_ids.push_back(kNoAd);
    for (Eigen::Index r = 0; r < rows; ++r) {
        pre.col(r) = shared;
        if (r + 1 < rows) pre.col(r).noalias() += w1.rightCols(E) * ad_input(catalog, ad_pool[r]);
    }
    Mat a2 = store_.value(advantage_[1].weight) * pre.cwiseMax(0.0);
    a2.colwise() += store_.value(advantage_[1].bias).col(0);
    Mat out = store_.value(advantage_[2].weight) * a2.cwiseMax(0.0);
    out.colwise() += store_.value(advantage_[2].bias).col(0);
    table.q = (out.array() + v).matrix().transpose();
    if (row_evaluations) *row_evaluations += static_cast<std::size_t>(rows);
    return table;
}

double AdQNet::accumulate_loss(const Catalog& catalog, const BrowsingHistory& history, const Context& context,
                               std::span<const int> rec_list, const AdAction& action, double y, double weight) {
    const int head = action.is_no_ad() ? 0 : action.head;
    if (head < 0 || head > dims_.k + 1) throw UsageError("as accumulate_loss: head out of range");
    if (action.is_no_ad() != (head == 0)) throw UsageError("as accumulate_loss: NO_AD must use head 0");
    const Eigen::Index S = dims_.state_dim();
    const Eigen::Index R = dims_.rec_action_dim();
    const Eigen::Index E = dims_.embed_dim;

    EncoderCache enc_cache;
    const EncodedState s = encode_state(store_, encoder_, catalog, history, context, &enc_cache);
    const Vec rec_enc = rec_list_encoding(catalog, rec_list);
    const Vec ad = ad_input(catalog, action.ad_id);

    nn::DenseCache vc[3], ac[3];
    Vec xv(value_[0].in);
    xv << s.values, rec_enc;
    Vec hv = nn::dense_forward(store_, value_[0], xv, &vc[0]);
    hv = nn::dense_forward(store_, value_[1], hv, &vc[1]);
    const double v = nn::dense_forward(store_, value_[2], hv, &vc[2])(0);

    Vec xa(advantage_[0].in);
    xa << s.values, rec_enc, ad;
    Vec ha = nn::dense_forward(store_, advantage_[0], xa, &ac[0]);
    ha = nn::dense_forward(store_, advantage_[1], ha, &ac[1]);
    const Vec adv = nn::dense_forward(store_, advantage_[2], ha, &ac[2]);

    const double q = v + adv(head);
    const double dq = weight * 2.0 * (q - y);

    Vec dv(1);
    dv(0) = dq;
    Vec dadv = Vec::Zero(dims_.k + 2);
    dadv(head) = dq;

    Vec g = nn::dense_backward(store_, value_[2], vc[2], dv);
    g = nn::dense_backward(store_, value_[1], vc[1], g);
    const Vec dxv = nn::dense_backward(store_, value_[0], vc[0], g);
    g = nn::dense_backward(store_, advantage_[2], ac[2], dadv);
    g = nn::dense_backward(store_, advantage_[1], ac[1], g);
    const Vec dxa = nn::dense_backward(store_, advantage_[0], ac[0], g);

    const Vec ds = dxv.head(S) + dxa.head(S);
    const Vec drec = dxv.segment(S, R) + dxa.segment(S, R);
    for (int j = 0; j < dims_.k; ++j) {
        embed_features_backward(store_, encoder_.embedder.regular_table, catalog.item_features(rec_list[j]),
                                drec.segment(j * E, E));
    }
    if (!action.is_no_ad()) {
        embed_features_backward(store_, encoder_.embedder.ad_table, catalog.ad_features_of(action.ad_id),
                                dxa.tail(E));
    }
    encode_state_backward(store_, encoder_, catalog, enc_cache, ds);
    return nn::squared_error(q, y);
}

double as_target(double reward, double next_value, bool terminal, double gamma) {
    return terminal ? reward : reward + gamma * next_value;
}

AsBootstrap as_bootstrap(const AdQNet& target, const Catalog& catalog, const BrowsingHistory& next_history,
                         const Context& next_context, std::span<const int> next_rec_list,
                         std::span<const int> next_ads, const BiddingRule& rule, const RevenueSettings& revenue) {
    const EncodedState s = target.encode(catalog, next_history, next_context);
    const Vec rec_enc = target.rec_list_encoding(catalog, next_rec_list);
    AsBootstrap out;
    out.table = target.q_table(s, rec_enc, catalog, next_ads);
    out.action = bid_select(out.table, revenue_model(catalog, next_ads, revenue), rule);
    out.value = out.table.value(out.action);
    return out;
}

AsAgent::AsAgent(const NetDims& dims, const FeatureSchema& schema, std::uint64_t seed, nn::OptimizerKind optimizer,
                 double lr)
    : eval_(dims, schema, seed), target_(eval_), optimizer_(optimizer), lr_(lr) {}

double AsAgent::update(const Catalog& catalog, std::span<const AsSample> batch) {
    if (batch.empty()) throw UsageError("as_update: empty batch");
    auto& store = eval_.params();
    store.zero_grads();
    const double weight = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (const auto& sample : batch) {
        if (!sample.history) throw UsageError("as_update: sample without history");
        total += eval_.accumulate_loss(catalog, *sample.history, sample.context, sample.rec_list, sample.action,
                                       sample.y, weight);
    }
    optimizer_.step(store, lr_);
    return total * weight;
}

void AsAgent::sync_target() {
    nn::sync_target(eval_.params(), target_.params());
}

void AsAgent::write(std::ostream& out) const {
    eval_.params().write(out);
    target_.params().write(out);
    optimizer_.write(out);
}

void AsAgent::read(std::istream& in) {
    eval_.params().read(in);
    target_.params().read(in);
    optimizer_.read(in, eval_.params());
}

}  // namespace ram
