#pragma once

#include "ram/nn/param_store.hpp"

#include <span>
#include <string>
#include <vector>

namespace ram::nn {

enum class Activation { identity, relu, tanh };

struct Dense {
    ParamId weight;
    ParamId bias;
    Eigen::Index in = 0;
    Eigen::Index out = 0;
    Activation act = Activation::identity;
};

Dense make_dense(ParamStore& store, const std::string& name, Eigen::Index in, Eigen::Index out,
                 Activation act, std::mt19937_64& rng);

/// Forward values needed by dense_backward. Backward on an empty cache is a usage error.
struct DenseCache {
    Vec input;
    Vec output;
    bool valid = false;
};

/// y = act(W x + b)
Vec dense_forward(const ParamStore& store, const Dense& layer, const Vec& x, DenseCache* cache = nullptr);

/// Accumulates dW, db into the store and returns dL/dx.
Vec dense_backward(ParamStore& store, const Dense& layer, const DenseCache& cache, const Vec& dy);

Vec apply_activation(Activation act, const Vec& pre);

/// dL/dpre from dL/dy given the activation output y.
Vec activation_backward(Activation act, const Vec& y, const Vec& dy);

/// GRU cell with stacked gate weights.
///   z  = sigm(Wz x + Uz h + bz)
///   r  = sigm(Wr x + Ur h + br)
///   h~ = tanh(Wh x + Uh (r*h) + bh)
///   h' = (1-z)*h + z*h~
/// input_weights rows are [z; r; h~], recurrent_gates rows are [z; r].
struct GruCell {
    ParamId input_weights;    // 3H x D
    ParamId recurrent_gates;  // 2H x H
    ParamId recurrent_cand;   // H x H
    ParamId bias;             // 3H x 1
    Eigen::Index input_dim = 0;
    Eigen::Index hidden = 0;
};

GruCell make_gru(ParamStore& store, const std::string& name, Eigen::Index input_dim, Eigen::Index hidden,
                 std::mt19937_64& rng);

struct GruStepCache {
    Vec h_prev;
    Vec x;
    Vec z;
    Vec r;
    Vec cand;
    bool valid = false;
};

Vec gru_step(const ParamStore& store, const GruCell& cell, const Vec& h_prev, const Vec& x,
             GruStepCache* cache = nullptr);

struct GruStepGrad {
    Vec dh_prev;
    Vec dx;
};

GruStepGrad gru_step_backward(ParamStore& store, const GruCell& cell, const GruStepCache& cache,
                              const Vec& dh);

struct GruSequenceCache {
    std::vector<GruStepCache> steps;
    bool valid = false;
};

/// Runs the cell over inputs from a zero hidden state; empty input gives the zero vector.
Vec gru_run(const ParamStore& store, const GruCell& cell, std::span<const Vec> inputs,
            GruSequenceCache* cache = nullptr);

/// Backprop through time from dL/dh_final; returns dL/dx for every input step.
std::vector<Vec> gru_run_backward(ParamStore& store, const GruCell& cell, const GruSequenceCache& cache,
                                  const Vec& dh_final);

inline double squared_error(double prediction, double target) {
    const double d = prediction - target;
    return d * d;
}

void check_dim(Eigen::Index got, Eigen::Index want, const char* what);

}  // namespace ram::nn
