#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hiernav/behavior.hpp"
#include "hiernav/dynmodel.hpp"
#include "hiernav/env.hpp"
#include "hiernav/errors.hpp"
#include "hiernav/graph.hpp"
#include "hiernav/mpc.hpp"
#include "hiernav/rng.hpp"

namespace hiernav {

struct RunConfig {
    int max_subgoal_steps = 100;     // M: counter limit per subgoal
    double success_threshold = 0.5;  // T: subgoal reached when dist < T
    long episode_cap = 50000;
    int snapshot_every_edges = 10;   // explore snapshot cadence, 0 disables

    void validate(double min_grid_interval) const {
        if (max_subgoal_steps < 1) throw ContractViolation("run config: M must be >= 1");
        if (!(success_threshold > 0.0)) throw ContractViolation("run config: T must be positive");
        if (!(success_threshold < min_grid_interval))
            throw ContractViolation("run config: T must be below the grid interval");
    }
};

struct TraceStep {
    long step = 0;
    std::array<double, 5> state{};  // x, y, phi, w_L, w_R
    int behavior_idx = -1;          // -1 = oracle mover
    Eigen::Vector2d subgoal{0.0, 0.0};
    double mpc_cost = 0.0;
};

enum class Outcome { GoalReached, SubgoalTimeout, EpisodeCap };

struct EpisodeTrace {
    std::vector<TraceStep> steps;
    Outcome outcome = Outcome::EpisodeCap;
    std::optional<std::pair<NodeId, NodeId>> failed_edge;
};

// Action source for the subgoal loop: MPC over the behavior library, or the
// straight-line oracle used to test the levels above it.
class Locomotion {
public:
    virtual ~Locomotion() = default;
    struct Choice {
        Eigen::VectorXd action;
        int behavior_idx = -1;
        double cost = 0.0;
    };
    virtual Choice choose(const Env& env, const Eigen::VectorXd& obs,
                          const Eigen::Vector2d& subgoal, Rng& rng) = 0;
};

class MpcLocomotion : public Locomotion {
public:
    MpcLocomotion(const BehaviorLibrary& library, std::vector<BehaviorDynamicsModel> models,
                  MpcConfig cfg)
        : library_(&library), models_(std::move(models)), cfg_(cfg) {
        if (library.size() != static_cast<int>(models_.size()))
            throw ContractViolation("mpc locomotion: one dynamics model per behavior required");
    }

    Choice choose(const Env& env, const Eigen::VectorXd& obs, const Eigen::Vector2d& subgoal,
                  Rng& rng) override {
        const Eigen::VectorXd s_m = project(obs, env.partition().external_idx);
        const MpcDecision d = select_behavior(s_m, subgoal, models_, cfg_, rng);
        return {(*library_)[d.behavior].act(env.policy_features(obs)), d.behavior, d.cost};
    }

    std::span<const BehaviorDynamicsModel> models() const { return models_; }

private:
    const BehaviorLibrary* library_;
    std::vector<BehaviorDynamicsModel> models_;
    MpcConfig cfg_;
};

// Moves straight at the subgoal, capped at step_size per step. Only
// meaningful on point-mass environments; used as the locomotion success
// oracle in exploration tests.
class OracleLocomotion : public Locomotion {
public:
    explicit OracleLocomotion(double step_size = 0.2) : step_size_(step_size) {}

    Choice choose(const Env& env, const Eigen::VectorXd& obs, const Eigen::Vector2d& subgoal,
                  Rng&) override {
        const Eigen::VectorXd s_h = project(obs, env.partition().interest_idx);
        Eigen::Vector2d delta = subgoal - Eigen::Vector2d(s_h(0), s_h(1));
        const double dist = delta.norm();
        if (dist > step_size_) delta *= step_size_ / dist;
        Eigen::VectorXd action(env.action_dim());
        action.setZero();
        action(0) = delta(0);
        action(1) = delta(1);
        return {action, -1, dist * dist};
    }

private:
    double step_size_;
};

enum class SubgoalStatus { Completed, Timeout, Deviated, CapExceeded };

struct SubgoalRunResult {
    SubgoalStatus status = SubgoalStatus::Completed;
    int nodes_reached = 0;  // confirmed prefix of the path
    std::pair<NodeId, NodeId> failed_edge{};  // valid when status == Timeout
    long steps = 0;
};

// The inner loop of Algorithm-style execution: walk the path node by node,
// one MPC-selected behavior step at a time. A subgoal counts as reached when
// dist(s^h, p_i) < T, which resets the step counter; the attempt fails once
// the counter exceeds M (that is, after M+1 steps on a stuck subgoal).
//
// Whenever the agent's association moves between two adjacent nodes, that
// edge is recorded feasible and the node visited; moving outside the current
// path edge reports a deviation so the caller can replan.
inline SubgoalRunResult run_subgoal_loop(Env& env, NavGraph& graph,
                                         const std::vector<NodeId>& path, Locomotion& loco,
                                         const RunConfig& cfg, Rng& rng, EpisodeTrace& trace,
                                         long& global_step, long step_budget) {
    if (path.empty()) throw ContractViolation("run_subgoal_loop: empty path");
    SubgoalRunResult result;
    std::size_t i = 0;
    int counter = 0;
    Eigen::VectorXd obs = env.observation();
    NodeId assoc = graph.associate(project(obs, env.partition().interest_idx));

    while (i < path.size()) {
        const Eigen::VectorXd s_h = project(obs, env.partition().interest_idx);
        const Eigen::Vector2d pos(s_h(0), s_h(1));
        const Eigen::Vector2d target = graph.node_position(path[i]);
        if ((pos - target).norm() < cfg.success_threshold) {
            if (i > 0 && graph.adjacent(path[i - 1], path[i]))
                graph.record_transition(path[i - 1], path[i], true);
            else
                graph.mark_visited(path[i]);
            ++i;
            counter = 0;
            result.nodes_reached = static_cast<int>(i);
            continue;
        }
        if (counter > cfg.max_subgoal_steps) {
            result.status = SubgoalStatus::Timeout;
            result.failed_edge = {path[i > 0 ? i - 1 : 0], path[i]};
            return result;
        }
        if (global_step >= step_budget) {
            result.status = SubgoalStatus::CapExceeded;
            return result;
        }

        const Locomotion::Choice choice = loco.choose(env, obs, target, rng);
        obs = env.step(choice.action);
        trace.steps.push_back(
            TraceStep{global_step, env.trace_state(), choice.behavior_idx, target, choice.cost});
        ++global_step;
        ++counter;
        ++result.steps;

        const NodeId now = graph.associate(project(obs, env.partition().interest_idx));
        if (now != assoc) {
            if (graph.adjacent(assoc, now))
                graph.record_transition(assoc, now, true);
            else
                graph.mark_visited(now);
            assoc = now;
            const bool on_edge = now == path[i] || (i > 0 && now == path[i - 1]) ||
                                 (i == 0 && now == path[0]);
            if (!on_edge) {
                result.status = SubgoalStatus::Deviated;
                return result;
            }
        }
    }
    result.status = SubgoalStatus::Completed;
    result.nodes_reached = static_cast<int>(path.size());
    return result;
}

struct ExploreMetrics {
    long total_steps = 0;
    int nodes_visited = 0;
    int feasible_edges = 0;
    int blocked_edges = 0;
    int subgoal_timeouts = 0;
    int replans = 0;
    int sweeps = 1;
    bool completed = false;  // frontier exhausted before the step cap
};

using SnapshotSink = std::function<void(const NavGraph&, long step)>;

// Frontier-driven exploration: repeatedly target the closest unexplored node,
// walk there, and record the attempted edge as feasible or blocked, until no
// reachable frontier remains. retry_sweeps > 0 allows that many rounds of
// clearing blocked edges for re-testing once the frontier empties.
inline ExploreMetrics run_explore(Env& env, NavGraph& graph, Locomotion& loco,
                                  const RunConfig& cfg, Rng& rng, EpisodeTrace* trace_out = nullptr,
                                  const SnapshotSink& snapshot = {}, int retry_sweeps = 0) {
    cfg.validate(std::min(graph.delta_x(), graph.delta_y()));
    ExploreMetrics metrics;
    EpisodeTrace local_trace;
    EpisodeTrace& trace = trace_out ? *trace_out : local_trace;
    long step = 0;
    int resets_done = 0;
    int last_snapshot_edges = -1;

    const auto maybe_snapshot = [&](bool force) {
        if (!snapshot) return;
        const int decided =
            graph.edge_count(EdgeStatus::Feasible) + graph.edge_count(EdgeStatus::Blocked);
        if (force || (cfg.snapshot_every_edges > 0 &&
                      decided >= last_snapshot_edges + cfg.snapshot_every_edges)) {
            snapshot(graph, step);
            last_snapshot_edges = decided;
        }
    };

    NodeId current = graph.associate(env.interest_state());
    graph.mark_visited(current);
    maybe_snapshot(true);

    while (step < cfg.episode_cap) {
        const auto target = graph.select_exploration_target(current);
        if (!target) {
            if (retry_sweeps > 0 && resets_done < retry_sweeps &&
                graph.edge_count(EdgeStatus::Blocked) > 0) {
                graph.reset_blocked_edges();
                ++resets_done;
                ++metrics.sweeps;
                continue;
            }
            metrics.completed = true;
            break;
        }
        auto base = graph.plan_path(current, target->attach);
        if (!base) {
            // attach unreachable through feasible edges; should not happen
            // since the target ranking uses feasible distances
            break;
        }
        std::vector<NodeId> path = std::move(*base);
        path.push_back(target->node);

        const SubgoalRunResult res =
            run_subgoal_loop(env, graph, path, loco, cfg, rng, trace, step, cfg.episode_cap);
        if (res.status == SubgoalStatus::Timeout) {
            ++metrics.subgoal_timeouts;
            if (res.failed_edge.first != res.failed_edge.second)
                graph.record_transition(res.failed_edge.first, res.failed_edge.second, false);
        } else if (res.status == SubgoalStatus::Deviated) {
            ++metrics.replans;
        } else if (res.status == SubgoalStatus::CapExceeded) {
            break;
        }
        current = graph.associate(env.interest_state());
        graph.mark_visited(current);
        maybe_snapshot(false);
    }

    metrics.total_steps = step;
    metrics.nodes_visited = graph.visited_count();
    metrics.feasible_edges = graph.edge_count(EdgeStatus::Feasible);
    metrics.blocked_edges = graph.edge_count(EdgeStatus::Blocked);
    maybe_snapshot(true);
    return metrics;
}

struct ReachResult {
    bool success = false;
    long steps = 0;
    int replans = 0;
    int subgoal_timeouts = 0;
    EpisodeTrace trace;
};

// Plans to the goal node over feasible edges and executes the path; a subgoal
// timeout blocks the offending edge and triggers a replan from the current
// node. Fails definitively once the goal is unreachable or the cap is hit.
inline ReachResult run_reach_goal(Env& env, NavGraph& graph, Locomotion& loco,
                                  const Eigen::Vector2d& goal_h, const RunConfig& cfg, Rng& rng) {
    cfg.validate(std::min(graph.delta_x(), graph.delta_y()));
    const Eigen::Vector2d lo = graph.node_position({0, 0}) -
                               0.5 * Eigen::Vector2d(graph.delta_x(), graph.delta_y());
    const Eigen::Vector2d hi =
        graph.node_position({graph.rows() - 1, graph.cols() - 1}) +
        0.5 * Eigen::Vector2d(graph.delta_x(), graph.delta_y());
    if (goal_h(0) < lo(0) || goal_h(0) > hi(0) || goal_h(1) < lo(1) || goal_h(1) > hi(1))
        throw ContractViolation("run_reach_goal: goal outside the graph lattice");

    ReachResult result;
    const NodeId goal_node = graph.associate(goal_h);
    NodeId current = graph.associate(env.interest_state());
    graph.mark_visited(current);
    if (current == goal_node) {
        result.success = true;
        result.trace.outcome = Outcome::GoalReached;
        return result;
    }

    long step = 0;
    while (step < cfg.episode_cap) {
        auto path = graph.plan_path(current, goal_node);
        if (!path) {
            result.trace.outcome = Outcome::SubgoalTimeout;
            break;
        }
        const SubgoalRunResult res = run_subgoal_loop(env, graph, *path, loco, cfg, rng,
                                                      result.trace, step, cfg.episode_cap);
        if (res.status == SubgoalStatus::Completed) {
            result.success = true;
            result.trace.outcome = Outcome::GoalReached;
            break;
        }
        if (res.status == SubgoalStatus::Timeout) {
            ++result.subgoal_timeouts;
            ++result.replans;
            result.trace.outcome = Outcome::SubgoalTimeout;
            result.trace.failed_edge = res.failed_edge;
            if (res.failed_edge.first != res.failed_edge.second)
                graph.record_transition(res.failed_edge.first, res.failed_edge.second, false);
        } else if (res.status == SubgoalStatus::Deviated) {
            ++result.replans;
        } else if (res.status == SubgoalStatus::CapExceeded) {
            result.trace.outcome = Outcome::EpisodeCap;
            break;
        }
        current = graph.associate(env.interest_state());
        graph.mark_visited(current);
    }
    result.steps = step;
    return result;
}

// Episode-averaged distance to the goal, normalized by the goal's norm:
// (1/T) * sum_t ||s^h_t - g|| / ||g||.
inline double normalized_distance(const EpisodeTrace& trace, const Eigen::Vector2d& goal) {
    const double g_norm = goal.norm();
    if (!(g_norm > 0.0)) throw ContractViolation("normalized_distance: goal norm must be positive");
    if (trace.steps.empty()) throw ContractViolation("normalized_distance: empty trace");
    double total = 0.0;
    for (const TraceStep& s : trace.steps)
        total += (Eigen::Vector2d(s.state[0], s.state[1]) - goal).norm();
    return total / (static_cast<double>(trace.steps.size()) * g_norm);
}

struct RunMetrics {
    int run_id = 0;
    std::uint64_t seed = 0;
    std::string maze;
    std::string mode;
    long total_steps = 0;
    bool success = false;
    int replans = 0;
    int subgoal_timeouts = 0;
};

}  // namespace hiernav
