#include "ram/rs_agent.hpp"

#include <istream>
#include <ostream>

namespace ram {

CascadeQNet::CascadeQNet(const NetDims& dims, const FeatureSchema& schema, std::uint64_t seed) : dims_(dims) {
    std::mt19937_64 rng(seed);
    encoder_ = make_state_encoder(store_, "rs.encoder", dims, schema, rng);
    prefix_gru_ = nn::make_gru(store_, "rs.prefix_gru", dims.embed_dim, dims.state_hidden, rng);
    const Eigen::Index in = dims.state_dim() + dims.state_hidden + dims.embed_dim;
    l1_ = nn::make_dense(store_, "rs.head1", in, dims.hidden1, nn::Activation::relu, rng);
    l2_ = nn::make_dense(store_, "rs.head2", dims.hidden1, dims.hidden2, nn::Activation::relu, rng);
    out_ = nn::make_dense(store_, "rs.out", dims.hidden2, 1, nn::Activation::identity, rng);
}

EncodedState CascadeQNet::encode(const Catalog& catalog, const BrowsingHistory& history,
                                 const Context& context) const {
    return encode_state(store_, encoder_, catalog, history, context);
}

double CascadeQNet::q_value(const EncodedState& s, const Catalog& catalog, std::span<const int> prefix,
                            int candidate) const {
    if (static_cast<int>(prefix.size()) >= dims_.k)
        throw UsageError("q_value: prefix of length " + std::to_string(prefix.size()) + " with k = " +
                         std::to_string(dims_.k));
    Vec h = Vec::Zero(dims_.state_hidden);
    for (int id : prefix) h = nn::gru_step(store_, prefix_gru_, h, embed_item(store_, encoder_.embedder, catalog, id));
    Vec x(l1_.in);
    x << s.values, h, embed_item(store_, encoder_.embedder, catalog, candidate);
    const Vec a1 = nn::dense_forward(store_, l1_, x);
    const Vec a2 = nn::dense_forward(store_, l2_, a1);
    return nn::dense_forward(store_, out_, a2)(0);
}

CascadeResult CascadeQNet::select_rec_list(const EncodedState& s, const Catalog& catalog,
                                           std::span<const int> candidates, int k,
                                           const std::unordered_set<int>& exclude) const {
    if (k > dims_.k) throw UsageError("select_rec_list: k exceeds the network's list length");
    const Eigen::Index S = dims_.state_dim();
    const Eigen::Index H = dims_.state_hidden;
    const Eigen::Index E = dims_.embed_dim;
    nn::check_dim(s.values.size(), S, "select_rec_list state");

    const Mat& w1 = store_.value(l1_.weight);
    const Mat& w2 = store_.value(l2_.weight);
    const Mat& w3 = store_.value(out_.weight);
    const auto b1 = store_.value(l1_.bias).col(0);
    const auto b2 = store_.value(l2_.bias).col(0);
    const double b3 = store_.value(out_.bias)(0, 0);

    // Position-independent parts of the first layer.
    const Vec state_part = w1.leftCols(S) * s.values + b1;
    std::vector<int> ids(candidates.begin(), candidates.end());
    Mat cand_part(w1.rows(), static_cast<Eigen::Index>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
        cand_part.col(static_cast<Eigen::Index>(i)) =
            w1.rightCols(E) * embed_item(store_, encoder_.embedder, catalog, ids[i]);
    }
    auto column_of = [&ids](int id) {
        return static_cast<Eigen::Index>(std::find(ids.begin(), ids.end(), id) - ids.begin());
    };

    Vec h = Vec::Zero(H);
    std::size_t consumed = 0;
    auto scorer = [&](std::span<const int> prefix, std::span<const int> remaining) {
        while (consumed < prefix.size()) {
            h = nn::gru_step(store_, prefix_gru_, h, embed_item(store_, encoder_.embedder, catalog, prefix[consumed]));
            ++consumed;
        }
        const Vec base = state_part + w1.middleCols(S, H) * h;
        Mat pre(w1.rows(), static_cast<Eigen::Index>(remaining.size()));
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            pre.col(static_cast<Eigen::Index>(i)) = base + cand_part.col(column_of(remaining[i]));
        }
        Mat a2 = w2 * pre.cwiseMax(0.0);
        a2.colwise() += b2;
        const Eigen::RowVectorXd q = w3 * a2.cwiseMax(0.0);
        std::vector<double> out(remaining.size());
        for (std::size_t i = 0; i < remaining.size(); ++i) out[i] = q(static_cast<Eigen::Index>(i)) + b3;
        return out;
    };
    return cascade_select(candidates, k, exclude, scorer);
}

std::vector<double> CascadeQNet::cascade_values(const Catalog& catalog, const BrowsingHistory& history,
                                                const Context& context, std::span<const int> rec_list) const {
    const EncodedState s = encode(catalog, history, context);
    std::vector<double> q;
    for (std::size_t j = 0; j < rec_list.size(); ++j) {
        q.push_back(q_value(s, catalog, rec_list.first(j), rec_list[j]));
    }
    return q;
}

double CascadeQNet::accumulate_loss(const Catalog& catalog, const BrowsingHistory& history, const Context& context,
                                    std::span<const int> rec_list, double y, double weight) {
    const int k = static_cast<int>(rec_list.size());
    if (k < 1 || k > dims_.k) throw UsageError("accumulate_loss: rec list length must be in [1, k]");
    const Eigen::Index S = dims_.state_dim();
    const Eigen::Index H = dims_.state_hidden;
    const Eigen::Index E = dims_.embed_dim;

    EncoderCache enc_cache;
    const EncodedState s = encode_state(store_, encoder_, catalog, history, context, &enc_cache);

    std::vector<Vec> emb(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) emb[j] = embed_item(store_, encoder_.embedder, catalog, rec_list[j]);

    // prefix hidden states h_0 = 0, h_j = gru(h_{j-1}, e_{j-1})
    std::vector<Vec> h(static_cast<std::size_t>(k));
    std::vector<nn::GruStepCache> gru_cache(static_cast<std::size_t>(k));
    h[0] = Vec::Zero(H);
    for (int j = 1; j < k; ++j) h[j] = nn::gru_step(store_, prefix_gru_, h[j - 1], emb[j - 1], &gru_cache[j]);

    struct HeadCache {
        nn::DenseCache c1, c2, c3;
        double q = 0.0;
    };
    std::vector<HeadCache> heads(static_cast<std::size_t>(k));
    double loss = 0.0;
    for (int j = 0; j < k; ++j) {
        Vec x(l1_.in);
        x << s.values, h[j], emb[j];
        const Vec a1 = nn::dense_forward(store_, l1_, x, &heads[j].c1);
        const Vec a2 = nn::dense_forward(store_, l2_, a1, &heads[j].c2);
        heads[j].q = nn::dense_forward(store_, out_, a2, &heads[j].c3)(0);
        loss += nn::squared_error(heads[j].q, y);
    }

    Vec ds = Vec::Zero(S);
    std::vector<Vec> dh(static_cast<std::size_t>(k), Vec::Zero(H));
    std::vector<Vec> de(static_cast<std::size_t>(k), Vec::Zero(E));
    for (int j = 0; j < k; ++j) {
        Vec dq(1);
        dq(0) = weight * 2.0 * (heads[j].q - y);
        const Vec da2 = nn::dense_backward(store_, out_, heads[j].c3, dq);
        const Vec da1 = nn::dense_backward(store_, l2_, heads[j].c2, da2);
        const Vec dx = nn::dense_backward(store_, l1_, heads[j].c1, da1);
        ds += dx.head(S);
        dh[j] = dx.segment(S, H);
        de[j] += dx.tail(E);
    }
    Vec carry = Vec::Zero(H);
    for (int j = k - 1; j >= 1; --j) {
        const nn::GruStepGrad g = nn::gru_step_backward(store_, prefix_gru_, gru_cache[j], dh[j] + carry);
        carry = g.dh_prev;
        de[j - 1] += g.dx;
    }
    for (int j = 0; j < k; ++j) {
        embed_features_backward(store_, encoder_.embedder.regular_table, catalog.item_features(rec_list[j]), de[j]);
    }
    encode_state_backward(store_, encoder_, catalog, enc_cache, ds);
    return loss;
}

double rs_target(double reward, double next_value, bool terminal, double gamma) {
    return terminal ? reward : reward + gamma * next_value;
}

RsAgent::RsAgent(const NetDims& dims, const FeatureSchema& schema, std::uint64_t seed, nn::OptimizerKind optimizer,
                 double lr)
    : eval_(dims, schema, seed), target_(eval_), optimizer_(optimizer), lr_(lr) {}

double RsAgent::update(const Catalog& catalog, std::span<const RsSample> batch) {
    if (batch.empty()) throw UsageError("rs_update: empty batch");
    auto& store = eval_.params();
    store.zero_grads();
    std::size_t terms = 0;
    for (const auto& sample : batch) terms += sample.rec_list.size();
    const double weight = 1.0 / static_cast<double>(terms);
    double total = 0.0;
    for (const auto& sample : batch) {
        if (!sample.history) throw UsageError("rs_update: sample without history");
        total += eval_.accumulate_loss(catalog, *sample.history, sample.context, sample.rec_list, sample.y, weight);
    }
    optimizer_.step(store, lr_);
    return total * weight;
}

void RsAgent::sync_target() {
    nn::sync_target(eval_.params(), target_.params());
}

void RsAgent::write(std::ostream& out) const {
    eval_.params().write(out);
    target_.params().write(out);
    optimizer_.write(out);
}

void RsAgent::read(std::istream& in) {
    eval_.params().read(in);
    target_.params().read(in);
    optimizer_.read(in, eval_.params());
}

}  // namespace ram
