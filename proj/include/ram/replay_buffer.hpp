#pragma once

#include "ram/domain.hpp"
#include "ram/policy.hpp"
#include "ram/state_encoder.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace ram {

struct StateSnapshot {
    BrowsingHistory history;
    Context context;

    bool operator==(const StateSnapshot&) const = default;
};

struct Transition {
    StateSnapshot state;
    std::vector<int> rec_list;
    AdAction ad;
    double r_rs = 0.0;
    int r_as = 0;
    double revenue = 0.0;
    StateSnapshot next;
    Request next_request;  // empty when terminal
    bool terminal = false;
};

/// Bounded FIFO; once full, each push evicts the oldest entry.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 10000);

    void push(Transition t);
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    bool empty() const noexcept { return data_.empty(); }
    std::uint64_t pushed() const noexcept { return pushed_; }

    /// i = 0 is the oldest stored transition.
    const Transition& at(std::size_t i) const;

    /// Uniform with replacement over current contents.
    std::vector<const Transition*> sample(std::size_t n, std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::vector<Transition> data_;
    std::size_t head_ = 0;  // slot of the oldest entry once full
    std::uint64_t pushed_ = 0;
};

}  // namespace ram
