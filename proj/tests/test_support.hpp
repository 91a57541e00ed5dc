#pragma once

#include "ram/domain.hpp"
#include "ram/env_sim.hpp"
#include "ram/nn/param_store.hpp"
#include "ram/state_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace ram::test {

/// Small catalog: regular ids 0..n_items-1, ad ids 100.. with varied features.
inline Catalog small_catalog(int n_items = 12, int n_ads = 6, std::uint64_t seed = 3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<RegularItem> items;
    for (int i = 0; i < n_items; ++i) items.push_back({i, u(rng), u(rng), u(rng), u(rng), u(rng)});
    std::vector<AdItem> ads;
    for (int i = 0; i < n_ads; ++i)
        ads.push_back({100 + i, i % 5, 0.2 + 3.0 * u(rng), 0.01 + 0.9 * u(rng), 0.4 * u(rng), u(rng)});
    return Catalog(std::move(items), std::move(ads));
}

/// Small synthetic world. Hazard and dwell scale are fixed so no calibration runs.
inline EnvConfig small_world(std::uint64_t seed = 7) {
    EnvConfig c;
    c.seed = seed;
    c.num_items = 400;
    c.num_ads = 40;
    c.num_users = 60;
    c.quality_hazard = 0.22;
    c.dwell_scale = 3.5;
    c.calibration_sessions = 300;
    return c;
}

inline NetDims tiny_dims(int k = 2) {
    NetDims d;
    d.embed_dim = 3;
    d.state_hidden = 3;
    d.k = k;
    d.hidden1 = 5;
    d.hidden2 = 4;
    return d;
}

struct GradCheck {
    double max_rel = 0.0;
    std::string worst;
    std::size_t checked = 0;
};

/// Central differences on every scalar of `store` against the gradients already in it.
/// rel = |a - n| / max(|a| + |n|, floor).
inline GradCheck finite_difference(nn::ParamStore& store, const std::function<double()>& loss, double h = 1e-6,
                                   double floor = 1e-4) {
    GradCheck out;
    for (std::size_t p = 0; p < store.size(); ++p) {
        auto& param = store.at(p);
        for (Eigen::Index i = 0; i < param.value.size(); ++i) {
            const double saved = param.value.data()[i];
            param.value.data()[i] = saved + h;
            const double up = loss();
            param.value.data()[i] = saved - h;
            const double down = loss();
            param.value.data()[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = param.grad.data()[i];
            const double rel = std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), floor);
            ++out.checked;
            if (rel > out.max_rel) {
                out.max_rel = rel;
                out.worst = param.name + "[" + std::to_string(i) + "] analytic " + std::to_string(analytic) +
                            " numeric " + std::to_string(numeric);
            }
        }
    }
    return out;
}

/// Perturbs every parameter uniformly in [-scale, scale] around its current value.
inline void jitter(nn::ParamStore& store, std::mt19937_64& rng, double scale = 0.5) {
    std::uniform_real_distribution<double> u(-scale, scale);
    for (std::size_t p = 0; p < store.size(); ++p) {
        auto& v = store.at(p).value;
        for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] += u(rng);
    }
}

inline BrowsingHistory history_of(std::vector<int> recs, std::vector<int> ads) {
    BrowsingHistory h;
    h.recs = std::move(recs);
    h.ads = std::move(ads);
    return h;
}

}  // namespace ram::test
