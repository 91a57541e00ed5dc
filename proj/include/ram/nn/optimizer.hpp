#pragma once

#include "ram/nn/param_store.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ram::nn {

enum class OptimizerKind { sgd, adam };

OptimizerKind parse_optimizer_kind(const std::string& name);
std::string to_string(OptimizerKind kind);

struct AdamSettings {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Plain SGD or Adam over a ParamStore. Gradients are read, never cleared.
class Optimizer {
public:
    explicit Optimizer(OptimizerKind kind = OptimizerKind::adam, AdamSettings adam = {});

    /// Moves every parameter against its gradient and increments the store's step counter.
    void step(ParamStore& store, double lr);

    OptimizerKind kind() const noexcept { return kind_; }

    void write(std::ostream& out) const;
    void read(std::istream& in, const ParamStore& layout);

private:
    OptimizerKind kind_;
    AdamSettings adam_;
    std::uint64_t t_ = 0;
    std::vector<Mat> m_;
    std::vector<Mat> v_;
};

}  // namespace ram::nn
