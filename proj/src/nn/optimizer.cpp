#include "ram/nn/optimizer.hpp"

#include "ram/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>

namespace ram::nn {

OptimizerKind parse_optimizer_kind(const std::string& name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adam") return OptimizerKind::adam;
    throw ConfigError("unknown optimizer: " + name);
}

std::string to_string(OptimizerKind kind) {
    return kind == OptimizerKind::sgd ? "sgd" : "adam";
}

Optimizer::Optimizer(OptimizerKind kind, AdamSettings adam) : kind_(kind), adam_(adam) {}

void Optimizer::step(ParamStore& store, double lr) {
    if (kind_ == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < store.size(); ++i) {
            auto& p = store.at(i);
            p.value.noalias() -= lr * p.grad;
        }
        store.increment_step();
        return;
    }

    if (m_.size() != store.size()) {
        m_.clear();
        v_.clear();
        for (std::size_t i = 0; i < store.size(); ++i) {
            const auto& p = store.at(i);
            m_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
            v_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
        }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < store.size(); ++i) {
        auto& p = store.at(i);
        m_[i] = adam_.beta1 * m_[i] + (1.0 - adam_.beta1) * p.grad;
        v_[i] = adam_.beta2 * v_[i] + (1.0 - adam_.beta2) * p.grad.cwiseAbs2();
        p.value.array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + adam_.epsilon);
    }
    store.increment_step();
}

namespace {

void write_matrix(std::ostream& out, const Mat& m) {
    char buf[64];
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%a", m.data()[i]);
        out << buf << (i + 1 == m.size() ? '\n' : ' ');
    }
}

void read_matrix(std::istream& in, Mat& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        std::string tok;
        if (!(in >> tok)) throw InputError("optimizer state: truncated");
        m.data()[i] = std::strtod(tok.c_str(), nullptr);
    }
}

}  // namespace

void Optimizer::write(std::ostream& out) const {
    out << "optimizer " << to_string(kind_) << ' ' << t_ << ' ' << m_.size() << '\n';
    for (std::size_t i = 0; i < m_.size(); ++i) {
        write_matrix(out, m_[i]);
        write_matrix(out, v_[i]);
    }
}

void Optimizer::read(std::istream& in, const ParamStore& layout) {
    std::string key, kind;
    std::size_t count = 0;
    if (!(in >> key >> kind >> t_ >> count) || key != "optimizer")
        throw InputError("optimizer state: bad header");
    kind_ = parse_optimizer_kind(kind);
    m_.clear();
    v_.clear();
    if (count == 0) return;
    if (count != layout.size()) throw ConfigError("optimizer state does not match network layout");
    for (std::size_t i = 0; i < count; ++i) {
        const auto& p = layout.at(i);
        m_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
        v_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
        read_matrix(in, m_.back());
        read_matrix(in, v_.back());
    }
}

}  // namespace ram::nn
