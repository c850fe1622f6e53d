#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include "hiernav/errors.hpp"
#include "hiernav/mlp.hpp"
#include "hiernav/optim.hpp"
#include "hiernav/replay.hpp"
#include "hiernav/rng.hpp"
#include "hiernav/space.hpp"

namespace hiernav {

// Per-behavior predictor of the change in s^m over L consecutive steps of
// that behavior. Always a delta on top of the input state; the network sees
// the mid-level features (orientation, never absolute position).
struct BehaviorDynamicsModel {
    Mlp net;
    int behavior_id = 0;
    int L = 3;
    MidLevelSpace space;
};

inline Eigen::VectorXd predict(const BehaviorDynamicsModel& model, const Eigen::VectorXd& s_m) {
    if (s_m.size() != model.space.dim)
        throw ShapeError("dynamics predict: state dim " + std::to_string(s_m.size()) +
                         ", model expects " + std::to_string(model.space.dim));
    return s_m + forward(model.net, model.space.features(s_m));
}

// A model that ignores its input and adds a fixed delta; test scaffolding and
// the degenerate case of the real thing.
inline BehaviorDynamicsModel make_constant_delta_model(const Eigen::VectorXd& delta,
                                                       const MidLevelSpace& space, int behavior_id,
                                                       int L = 3) {
    if (delta.size() != space.dim) throw ShapeError("constant delta model: dimension mismatch");
    BehaviorDynamicsModel m;
    m.behavior_id = behavior_id;
    m.L = L;
    m.space = space;
    m.net = make_zero_mlp({std::max(space.feature_dim(), 0), static_cast<int>(delta.size())},
                          Activation::Identity);
    m.net.biases.back() = delta;
    return m;
}

// (s^m_t, s^m_{t+L}) pairs collected from uninterrupted runs of one behavior.
struct DynamicsDataset {
    Eigen::MatrixXd inputs;   // N x dim, s^m at t
    Eigen::MatrixXd targets;  // N x dim, s^m at t+L
    int L = 0;
    MidLevelSpace space;

    int size() const { return static_cast<int>(inputs.rows()); }
};

// Extracts prediction pairs from the last tail_fraction of the buffer,
// never letting a pair span an episode reset. Episodes are recovered from the
// per-transition step_index.
inline DynamicsDataset extract_pairs(const ReplayBuffer& buffer,
                                     const ObservationPartition& partition,
                                     const MidLevelSpace& space, int L, double tail_fraction) {
    if (L < 1) throw ContractViolation("extract_pairs: L must be positive");
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
        throw ContractViolation("extract_pairs: tail_fraction must be in (0, 1]");
    const std::size_t n = buffer.size();
    const std::size_t start =
        n - std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(tail_fraction * n)));

    std::vector<Eigen::VectorXd> inputs, targets;
    // States of the episode run currently being walked.
    std::vector<Eigen::VectorXd> states;
    int prev_index = -1;
    const auto flush = [&]() {
        if (static_cast<int>(states.size()) >= L + 1) {
            for (std::size_t t = 0; t + L < states.size(); ++t) {
                inputs.push_back(states[t]);
                targets.push_back(states[t + L]);
            }
        }
        states.clear();
    };
    for (std::size_t i = start; i < n; ++i) {
        const Transition& tr = buffer.at(i);
        if (states.empty() || tr.step_index != prev_index + 1) {
            flush();
            states.push_back(project(tr.obs_t, partition.external_idx));
        }
        states.push_back(project(tr.obs_t1, partition.external_idx));
        prev_index = tr.step_index;
    }
    flush();

    if (inputs.empty())
        throw EmptyDatasetError("extract_pairs: no episode in the tail spans L+1 states");
    DynamicsDataset ds;
    ds.L = L;
    ds.space = space;
    ds.inputs.resize(static_cast<Eigen::Index>(inputs.size()), space.dim);
    ds.targets.resize(static_cast<Eigen::Index>(targets.size()), space.dim);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        ds.inputs.row(static_cast<Eigen::Index>(i)) = inputs[i].transpose();
        ds.targets.row(static_cast<Eigen::Index>(i)) = targets[i].transpose();
    }
    return ds;
}

struct DynamicsFitConfig {
    std::vector<int> hidden_sizes = {256, 256};
    double learning_rate = 1e-3;
    int gradient_steps = 2000;
    int batch_size = 100;
    double holdout_fraction = 0.1;
};

struct DynamicsFitResult {
    BehaviorDynamicsModel model;
    double train_mse = 0.0;    // mean squared L2 delta error, final epoch
    double holdout_mse = 0.0;  // mean squared L2 error on the holdout split
    double holdout_l2 = 0.0;   // mean L2 error on the holdout split
    int train_count = 0;
    int holdout_count = 0;
};

// Mean L2 prediction error over a dataset.
inline double holdout_error(const BehaviorDynamicsModel& model, const DynamicsDataset& ds) {
    if (ds.size() == 0) throw EmptyDatasetError("holdout_error: empty dataset");
    double total = 0.0;
    for (int i = 0; i < ds.size(); ++i) {
        const Eigen::VectorXd pred = predict(model, ds.inputs.row(i).transpose());
        total += model.space.delta(pred, ds.targets.row(i).transpose()).norm();
    }
    return total / ds.size();
}

inline double holdout_mse(const BehaviorDynamicsModel& model, const DynamicsDataset& ds) {
    if (ds.size() == 0) throw EmptyDatasetError("holdout_mse: empty dataset");
    double total = 0.0;
    for (int i = 0; i < ds.size(); ++i) {
        const Eigen::VectorXd pred = predict(model, ds.inputs.row(i).transpose());
        total += model.space.delta(pred, ds.targets.row(i).transpose()).squaredNorm();
    }
    return total / ds.size();
}

// Minimizes the mean squared L-step delta error with minibatch Adam.
inline DynamicsFitResult fit(const DynamicsDataset& ds, const DynamicsFitConfig& cfg,
                             int behavior_id, std::uint64_t seed) {
    if (ds.size() == 0) throw EmptyDatasetError("fit: empty dynamics dataset");
    Rng rng(derive_seed(seed, 11));

    // Deterministic shuffled split.
    std::vector<int> order(static_cast<std::size_t>(ds.size()));
    std::iota(order.begin(), order.end(), 0);
    for (int i = ds.size() - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_index(static_cast<std::uint64_t>(i) + 1)]);
    int holdout = static_cast<int>(cfg.holdout_fraction * ds.size());
    if (ds.size() - holdout < 1) holdout = ds.size() - 1;
    const int train_n = ds.size() - holdout;

    const int fdim = ds.space.feature_dim();
    Eigen::MatrixXd feat(train_n, fdim), delta(train_n, ds.space.dim);
    for (int i = 0; i < train_n; ++i) {
        const Eigen::VectorXd in = ds.inputs.row(order[i]).transpose();
        feat.row(i) = ds.space.features(in).transpose();
        delta.row(i) = ds.space.delta(in, ds.targets.row(order[i]).transpose()).transpose();
    }

    std::vector<int> sizes{fdim};
    sizes.insert(sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
    sizes.push_back(ds.space.dim);
    BehaviorDynamicsModel model;
    model.behavior_id = behavior_id;
    model.L = ds.L;
    model.space = ds.space;
    model.net = make_mlp(sizes, Activation::Identity, rng);
    Optimizer opt(model.net, OptimizerConfig{cfg.learning_rate, OptimizerVariant::Adam});

    const int b = std::min(cfg.batch_size, train_n);
    Eigen::MatrixXd bx(b, fdim), by(b, ds.space.dim);
    double last_mse = 0.0;
    for (int step = 0; step < cfg.gradient_steps; ++step) {
        for (int i = 0; i < b; ++i) {
            const int k = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(train_n)));
            bx.row(i) = feat.row(k);
            by.row(i) = delta.row(k);
        }
        ForwardTrace trace = forward_trace(model.net, bx);
        const Eigen::MatrixXd err = trace.post.back() - by;
        last_mse = err.squaredNorm() / b;
        if (!std::isfinite(last_mse)) throw TrainingError("dynamics fit: non-finite loss");
        Gradients g = backward(model.net, trace, (2.0 / b) * err);
        opt.apply(model.net, g);
    }

    DynamicsFitResult result;
    result.train_mse = last_mse;
    result.train_count = train_n;
    result.holdout_count = holdout;
    if (holdout > 0) {
        DynamicsDataset hd;
        hd.L = ds.L;
        hd.space = ds.space;
        hd.inputs.resize(holdout, ds.space.dim);
        hd.targets.resize(holdout, ds.space.dim);
        for (int i = 0; i < holdout; ++i) {
            hd.inputs.row(i) = ds.inputs.row(order[train_n + i]);
            hd.targets.row(i) = ds.targets.row(order[train_n + i]);
        }
        result.holdout_mse = holdout_mse(model, hd);
        result.holdout_l2 = holdout_error(model, hd);
    }
    result.model = std::move(model);
    return result;
}

}  // namespace hiernav
