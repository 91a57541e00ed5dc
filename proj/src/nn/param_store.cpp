#include "ram/nn/param_store.hpp"

#include "ram/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace ram::nn {

namespace {

constexpr const char* kCheckpointMagic = "ram-params";
constexpr int kCheckpointVersion = 1;

std::string hex_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_hex_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw InputError("checkpoint: malformed value '" + s + "'");
    }
    return v;
}

}  // namespace

ParamId ParamStore::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    for (const auto& p : params_) {
        if (p.name == name) throw ConfigError("duplicate parameter name: " + name);
    }
    params_.push_back(Param{std::move(name), Mat::Zero(rows, cols), Mat::Zero(rows, cols)});
    return ParamId{params_.size() - 1};
}

ParamId ParamStore::add_glorot(std::string name, Eigen::Index rows, Eigen::Index cols,
                               std::mt19937_64& rng) {
    const ParamId id = add(std::move(name), rows, cols);
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Mat& m = value(id);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
    return id;
}

std::size_t ParamStore::scalar_count() const noexcept {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
}

ParamId ParamStore::find(const std::string& name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (params_[i].name == name) return ParamId{i};
    }
    throw UsageError("no parameter named " + name);
}

void ParamStore::zero_grads() {
    for (auto& p : params_) p.grad.setZero();
}

bool ParamStore::same_layout(const ParamStore& other) const {
    if (params_.size() != other.params_.size()) return false;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const auto& a = params_[i];
        const auto& b = other.params_[i];
        if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols())
            return false;
    }
    return true;
}

void ParamStore::copy_values_from(const ParamStore& other) {
    if (!same_layout(other)) throw ConfigError("parameter store layout mismatch");
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i].value = other.params_[i].value;
}

bool ParamStore::values_equal(const ParamStore& other) const {
    if (!same_layout(other)) return false;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (params_[i].value != other.params_[i].value) return false;
    }
    return true;
}

void ParamStore::write(std::ostream& out) const {
    out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
    out << "step " << step_ << '\n';
    out << "tensors " << params_.size() << '\n';
    for (const auto& p : params_) {
        out << p.name << ' ' << p.value.rows() << ' ' << p.value.cols() << '\n';
        // column-major, matching Eigen storage
        for (Eigen::Index i = 0; i < p.value.size(); ++i) {
            out << hex_double(p.value.data()[i]) << (i + 1 == p.value.size() ? '\n' : ' ');
        }
        if (p.value.size() == 0) out << '\n';
    }
}

void ParamStore::read(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != kCheckpointMagic || version != kCheckpointVersion)
        throw InputError("checkpoint: bad header");
    std::string key;
    std::uint64_t step = 0;
    std::size_t count = 0;
    if (!(in >> key >> step) || key != "step") throw InputError("checkpoint: missing step");
    if (!(in >> key >> count) || key != "tensors") throw InputError("checkpoint: missing tensor count");
    if (count != params_.size()) throw ConfigError("checkpoint: tensor count differs from network layout");
    for (std::size_t i = 0; i < count; ++i) {
        std::string name;
        Eigen::Index rows = 0, cols = 0;
        if (!(in >> name >> rows >> cols)) throw InputError("checkpoint: truncated tensor header");
        auto& p = params_[i];
        if (name != p.name || rows != p.value.rows() || cols != p.value.cols())
            throw ConfigError("checkpoint: tensor '" + name + "' does not match '" + p.name + "'");
        for (Eigen::Index j = 0; j < p.value.size(); ++j) {
            std::string tok;
            if (!(in >> tok)) throw InputError("checkpoint: truncated values for " + name);
            p.value.data()[j] = parse_hex_double(tok);
        }
    }
    step_ = step;
}

void ParamStore::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open checkpoint for writing: " + path.string());
    write(out);
    if (!out) throw InputError("failed writing checkpoint: " + path.string());
}

void ParamStore::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open checkpoint: " + path.string());
    read(in);
}

void sync_target(const ParamStore& eval, ParamStore& target) {
    target.copy_values_from(eval);
}

}  // namespace ram::nn
