#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "hiernav/dynmodel.hpp"
#include "hiernav/errors.hpp"
#include "hiernav/rng.hpp"

namespace hiernav {

struct MpcConfig {
    int horizon = 2;                 // H, behaviors per sequence
    int samples = 16;                // K, sequences drawn in sampling mode
    int exhaustive_threshold = 4096; // enumerate whenever N^H fits under max(K, this)
};

// Behavior indices b_1..b_H, 0-based into the library.
using BehaviorSequence = std::vector<int>;

struct MpcDecision {
    int behavior = -1;  // first element of the winning sequence
    BehaviorSequence sequence;
    double cost = 0.0;
};

// Chains the per-behavior predictions over the sequence and returns the
// squared distance between the interest projection of the terminal state and
// the target.
inline double rollout_cost(const BehaviorSequence& seq, const Eigen::VectorXd& s_m,
                           const Eigen::VectorXd& g_h,
                           std::span<const BehaviorDynamicsModel> models) {
    if (models.empty()) throw ContractViolation("rollout_cost: empty model set");
    const MidLevelSpace& space = models[0].space;
    if (g_h.size() != static_cast<Eigen::Index>(space.interest_dims.size()))
        throw ShapeError("rollout_cost: goal must live in the dimensions of interest");
    Eigen::VectorXd s = s_m;
    for (int idx : seq) {
        if (idx < 0 || idx >= static_cast<int>(models.size()))
            throw ContractViolation("rollout_cost: unknown behavior index " + std::to_string(idx));
        s = space.wrap(predict(models[static_cast<std::size_t>(idx)], s));
    }
    return (space.interest(s) - g_h).squaredNorm();
}

namespace detail {

inline bool lex_less(const BehaviorSequence& a, const BehaviorSequence& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Keeps the lower cost; on exact ties the lexicographically smaller sequence.
inline void consider(MpcDecision& best, const BehaviorSequence& seq, double cost) {
    if (best.behavior < 0 || cost < best.cost ||
        (cost == best.cost && lex_less(seq, best.sequence))) {
        best.cost = cost;
        best.sequence = seq;
        best.behavior = seq.front();
    }
}

}  // namespace detail

// Full enumeration of {0..N-1}^H in lexicographic order.
inline MpcDecision select_behavior_exhaustive(const Eigen::VectorXd& s_m,
                                              const Eigen::VectorXd& g_h,
                                              std::span<const BehaviorDynamicsModel> models,
                                              int horizon) {
    if (models.empty()) throw ContractViolation("select_behavior: empty model set");
    const int n = static_cast<int>(models.size());
    MpcDecision best;
    BehaviorSequence seq(static_cast<std::size_t>(horizon), 0);
    while (true) {
        detail::consider(best, seq, rollout_cost(seq, s_m, g_h, models));
        int d = horizon - 1;
        while (d >= 0 && seq[static_cast<std::size_t>(d)] == n - 1) {
            seq[static_cast<std::size_t>(d)] = 0;
            --d;
        }
        if (d < 0) break;
        ++seq[static_cast<std::size_t>(d)];
    }
    return best;
}

// Uniform sampling of K sequences with replacement.
inline MpcDecision select_behavior_sampled(const Eigen::VectorXd& s_m, const Eigen::VectorXd& g_h,
                                           std::span<const BehaviorDynamicsModel> models,
                                           int horizon, int samples, Rng& rng) {
    if (models.empty()) throw ContractViolation("select_behavior: empty model set");
    const int n = static_cast<int>(models.size());
    MpcDecision best;
    BehaviorSequence seq(static_cast<std::size_t>(horizon), 0);
    for (int k = 0; k < samples; ++k) {
        for (int d = 0; d < horizon; ++d)
            seq[static_cast<std::size_t>(d)] =
                static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        detail::consider(best, seq, rollout_cost(seq, s_m, g_h, models));
    }
    return best;
}

// One planning query: minimizes Eq.-style terminal cost over behavior
// sequences, exhaustively when the space is small enough, otherwise by
// uniform sampling. Ties resolve to the lexicographically smallest sequence.
inline MpcDecision select_behavior(const Eigen::VectorXd& s_m, const Eigen::VectorXd& g_h,
                                   std::span<const BehaviorDynamicsModel> models,
                                   const MpcConfig& cfg, Rng& rng) {
    if (models.empty()) throw ContractViolation("select_behavior: empty model set");
    if (cfg.horizon < 1 || cfg.samples < 1)
        throw ContractViolation("select_behavior: horizon and samples must be >= 1");
    const int n = static_cast<int>(models.size());
    double total = 1.0;
    for (int d = 0; d < cfg.horizon; ++d) total *= n;
    const double cap = static_cast<double>(std::max(cfg.samples, cfg.exhaustive_threshold));
    if (total <= cap) return select_behavior_exhaustive(s_m, g_h, models, cfg.horizon);
    return select_behavior_sampled(s_m, g_h, models, cfg.horizon, cfg.samples, rng);
}

// H = 1 diagnostic baseline: the behavior whose single prediction lands
// closest to the target.
inline int greedy_distance_baseline(const Eigen::VectorXd& s_m, const Eigen::VectorXd& g_h,
                                    std::span<const BehaviorDynamicsModel> models) {
    return select_behavior_exhaustive(s_m, g_h, models, 1).behavior;
}

}  // namespace hiernav
