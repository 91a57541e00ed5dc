#include "ram/nn/layers.hpp"

#include "ram/errors.hpp"

namespace ram::nn {

namespace {

Vec sigmoid(const Vec& a) {
    return (1.0 / (1.0 + (-a.array()).exp())).matrix();
}

}  // namespace

void check_dim(Eigen::Index got, Eigen::Index want, const char* what) {
    if (got != want) {
        throw ConfigError(std::string("dimension mismatch in ") + what + ": got " + std::to_string(got) +
                          ", expected " + std::to_string(want));
    }
}

Dense make_dense(ParamStore& store, const std::string& name, Eigen::Index in, Eigen::Index out,
                 Activation act, std::mt19937_64& rng) {
    Dense d;
    d.weight = store.add_glorot(name + ".w", out, in, rng);
    d.bias = store.add(name + ".b", out, 1);
    d.in = in;
    d.out = out;
    d.act = act;
    return d;
}

Vec apply_activation(Activation act, const Vec& pre) {
    switch (act) {
        case Activation::identity: return pre;
        case Activation::relu: return pre.cwiseMax(0.0);
        case Activation::tanh: return pre.array().tanh().matrix();
    }
    return pre;
}

Vec activation_backward(Activation act, const Vec& y, const Vec& dy) {
    switch (act) {
        case Activation::identity: return dy;
        case Activation::relu: return (y.array() > 0.0).select(dy.array(), 0.0).matrix();
        case Activation::tanh: return (dy.array() * (1.0 - y.array().square())).matrix();
    }
    return dy;
}

Vec dense_forward(const ParamStore& store, const Dense& layer, const Vec& x, DenseCache* cache) {
    check_dim(x.size(), layer.in, "dense_forward");
    Vec pre = store.value(layer.weight) * x;
    pre += store.value(layer.bias).col(0);
    Vec y = apply_activation(layer.act, pre);
    if (cache) {
        cache->input = x;
        cache->output = y;
        cache->valid = true;
    }
    return y;
}

Vec dense_backward(ParamStore& store, const Dense& layer, const DenseCache& cache, const Vec& dy) {
    if (!cache.valid) throw UsageError("dense_backward called before forward");
    check_dim(dy.size(), layer.out, "dense_backward");
    const Vec dpre = activation_backward(layer.act, cache.output, dy);
    store.grad(layer.weight).noalias() += dpre * cache.input.transpose();
    store.grad(layer.bias).col(0) += dpre;
    return store.value(layer.weight).transpose() * dpre;
}

GruCell make_gru(ParamStore& store, const std::string& name, Eigen::Index input_dim, Eigen::Index hidden,
                 std::mt19937_64& rng) {
    GruCell c;
    c.input_dim = input_dim;
    c.hidden = hidden;
    // Glorot per gate block: fan_out is H for each gate, not 3H.
    c.input_weights = store.add(name + ".w_x", 3 * hidden, input_dim);
    c.recurrent_gates = store.add(name + ".u_zr", 2 * hidden, hidden);
    c.recurrent_cand = store.add(name + ".u_h", hidden, hidden);
    c.bias = store.add(name + ".b", 3 * hidden, 1);
    auto fill = [&rng](auto&& block, Eigen::Index fan_in, Eigen::Index fan_out) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Eigen::Index col = 0; col < block.cols(); ++col)
            for (Eigen::Index row = 0; row < block.rows(); ++row) block(row, col) = dist(rng);
    };
    fill(store.value(c.input_weights), input_dim, hidden);
    fill(store.value(c.recurrent_gates), hidden, hidden);
    fill(store.value(c.recurrent_cand), hidden, hidden);
    return c;
}

Vec gru_step(const ParamStore& store, const GruCell& cell, const Vec& h_prev, const Vec& x,
             GruStepCache* cache) {
    check_dim(x.size(), cell.input_dim, "gru_step input");
    check_dim(h_prev.size(), cell.hidden, "gru_step hidden");
    const Eigen::Index H = cell.hidden;
    const Mat& wx = store.value(cell.input_weights);
    const Mat& uzr = store.value(cell.recurrent_gates);
    const Mat& uh = store.value(cell.recurrent_cand);
    const auto b = store.value(cell.bias).col(0);

    Vec xin = wx * x;
    xin += b;
    Vec gates = xin.head(2 * H);
    gates.noalias() += uzr * h_prev;
    Vec z = sigmoid(gates.head(H));
    Vec r = sigmoid(gates.tail(H));
    Vec cand_pre = xin.tail(H);
    cand_pre.noalias() += uh * r.cwiseProduct(h_prev);
    Vec cand = cand_pre.array().tanh().matrix();
    Vec h = h_prev + z.cwiseProduct(cand - h_prev);
    if (cache) {
        cache->h_prev = h_prev;
        cache->x = x;
        cache->z = std::move(z);
        cache->r = std::move(r);
        cache->cand = std::move(cand);
        cache->valid = true;
    }
    return h;
}

GruStepGrad gru_step_backward(ParamStore& store, const GruCell& cell, const GruStepCache& cache,
                              const Vec& dh) {
    if (!cache.valid) throw UsageError("gru_step_backward called before forward");
    check_dim(dh.size(), cell.hidden, "gru_step_backward");
    const Eigen::Index H = cell.hidden;
    const Mat& wx = store.value(cell.input_weights);
    const Mat& uzr = store.value(cell.recurrent_gates);
    const Mat& uh = store.value(cell.recurrent_cand);

    const Vec& h = cache.h_prev;
    const Vec& z = cache.z;
    const Vec& r = cache.r;
    const Vec& cand = cache.cand;

    // pre-activation gradients stacked as [z; r; cand]
    Vec dpre(3 * H);
    const Vec dcand_pre = (dh.array() * z.array() * (1.0 - cand.array().square())).matrix();
    const Vec dz_pre = (dh.array() * (cand - h).array() * z.array() * (1.0 - z.array())).matrix();
    const Vec rh = r.cwiseProduct(h);
    const Vec drh = uh.transpose() * dcand_pre;
    const Vec dr_pre = (drh.array() * h.array() * r.array() * (1.0 - r.array())).matrix();
    dpre << dz_pre, dr_pre, dcand_pre;

    store.grad(cell.input_weights).noalias() += dpre * cache.x.transpose();
    store.grad(cell.recurrent_gates).topRows(H).noalias() += dz_pre * h.transpose();
    store.grad(cell.recurrent_gates).bottomRows(H).noalias() += dr_pre * h.transpose();
    store.grad(cell.recurrent_cand).noalias() += dcand_pre * rh.transpose();
    store.grad(cell.bias).col(0) += dpre;

    GruStepGrad g;
    g.dx = wx.transpose() * dpre;
    g.dh_prev = dh.cwiseProduct(Vec::Ones(H) - z) + drh.cwiseProduct(r);
    g.dh_prev.noalias() += uzr.transpose() * dpre.head(2 * H);
    return g;
}

Vec gru_run(const ParamStore& store, const GruCell& cell, std::span<const Vec> inputs,
            GruSequenceCache* cache) {
    Vec h = Vec::Zero(cell.hidden);
    if (cache) {
        cache->steps.assign(inputs.size(), GruStepCache{});
        cache->valid = true;
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        h = gru_step(store, cell, h, inputs[i], cache ? &cache->steps[i] : nullptr);
    }
    return h;
}

std::vector<Vec> gru_run_backward(ParamStore& store, const GruCell& cell, const GruSequenceCache& cache,
                                  const Vec& dh_final) {
    if (!cache.valid) throw UsageError("gru_run_backward called before forward");
    std::vector<Vec> dxs(cache.steps.size());
    Vec dh = dh_final;
    for (std::size_t i = cache.steps.size(); i-- > 0;) {
        GruStepGrad g = gru_step_backward(store, cell, cache.steps[i], dh);
        dxs[i] = std::move(g.dx);
        dh = std::move(g.dh_prev);
    }
    return dxs;
}

}  // namespace ram::nn
