#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "hiernav/errors.hpp"
#include "hiernav/rng.hpp"

namespace hiernav {

struct Transition {
    Eigen::VectorXd obs_t;
    Eigen::VectorXd action;
    Eigen::VectorXd obs_t1;
    int step_index = 0;  // position within its episode; 0 starts a new episode
};

// Fixed-capacity ring buffer with uniform sampling. at(i) is time ordered,
// oldest first, so episode boundaries stay recoverable from step_index.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw Error("replay buffer capacity must be positive");
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }

    void add(Transition t) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(t));
        } else {
            items_[head_] = std::move(t);
            head_ = (head_ + 1) % capacity_;
        }
    }

    // i-th oldest stored transition.
    const Transition& at(std::size_t i) const {
        if (i >= items_.size()) throw Error("replay buffer index out of range");
        return items_[(head_ + i) % items_.size()];
    }

    const Transition& sample(Rng& rng) const {
        if (items_.empty()) throw EmptyDatasetError("cannot sample from empty replay buffer");
        return items_[rng.uniform_index(items_.size())];
    }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // oldest element when full
    std::vector<Transition> items_;
};

}  // namespace hiernav
