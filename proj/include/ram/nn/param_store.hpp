#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace ram::nn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Index of a tensor inside a ParamStore.
struct ParamId {
    std::size_t index = static_cast<std::size_t>(-1);
};

struct Param {
    std::string name;
    Mat value;
    Mat grad;
};

/// Named parameter tensors with one gradient slot per tensor.
///
/// Networks hold ParamIds into a store; copying a network copies its store,
/// which is how evaluation/target pairs are produced.
class ParamStore {
public:
    ParamId add(std::string name, Eigen::Index rows, Eigen::Index cols);

    /// Glorot-uniform fill in +-sqrt(6/(fan_in+fan_out)); fan_in = cols, fan_out = rows.
    ParamId add_glorot(std::string name, Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

    Mat& value(ParamId id) { return params_.at(id.index).value; }
    const Mat& value(ParamId id) const { return params_.at(id.index).value; }
    Mat& grad(ParamId id) { return params_.at(id.index).grad; }
    const Mat& grad(ParamId id) const { return params_.at(id.index).grad; }

    std::size_t size() const noexcept { return params_.size(); }
    std::size_t scalar_count() const noexcept;
    Param& at(std::size_t i) { return params_.at(i); }
    const Param& at(std::size_t i) const { return params_.at(i); }
    ParamId find(const std::string& name) const;

    void zero_grads();

    std::uint64_t step() const noexcept { return step_; }
    void set_step(std::uint64_t s) noexcept { step_ = s; }
    void increment_step() noexcept { ++step_; }

    bool same_layout(const ParamStore& other) const;

    /// Copy parameter values (not gradients, not step) from a layout-compatible store.
    void copy_values_from(const ParamStore& other);

    bool values_equal(const ParamStore& other) const;

    /// Text checkpoint: names, shapes and hex-float values, so reload is bit-exact.
    void save(const std::filesystem::path& path) const;
    void load(const std::filesystem::path& path);

    void write(std::ostream& out) const;
    void read(std::istream& in);

private:
    std::vector<Param> params_;
    std::uint64_t step_ = 0;
};

/// Evaluation/target synchronisation: target := eval, values bit-equal afterwards.
void sync_target(const ParamStore& eval, ParamStore& target);

}  // namespace ram::nn
