#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hiernav/dynmodel.hpp"
#include "hiernav/errors.hpp"
#include "hiernav/mpc.hpp"
#include "hiernav/orchestrator.hpp"
#include "hiernav/td3.hpp"

namespace hiernav {

// Every hyperparameter has a named key; defaults are the full-scale values,
// the desk profile swaps in the second-scale budget.

struct EnvSection {
    std::string type = "crawler";  // crawler | linear_point
    double dt = 0.1;
    double wheel_radius = 0.5;
    double axle_length = 1.0;
    double drag = 0.5;
    double wheel_accel = 2.0;
    int arena_free_cells = 300;       // open training range, cells per side
    double arena_spawn_margin = 102.0;  // keep training resets clear of walls

    bool operator==(const EnvSection&) const = default;
};

struct BehaviorSection {
    long steps_per_behavior = 400000;
    int num_behaviors = 4;
    double step_magnitude = 0.15;  // |v| in meters per step
    long initial_random_steps = 100000;
    long initial_steps_before_learning = 1000;
    int steps_between_updates = 50;
    int max_episode_length = 1000;
    long replay_buffer_size = 1000000;
    int batch_size = 100;
    int policy_update_delay = 2;
    double gamma = 0.99;
    double polyak = 0.995;
    double policy_learning_rate = 1e-3;
    double q_learning_rate = 1e-3;
    double target_policy_noise_std = 0.2;
    double target_policy_clip = 0.5;
    double action_noise_std = 0.1;
    std::vector<int> hidden_sizes = {256, 256};
    long scripted_data_steps = 8000;
    int scripted_episode_length = 250;
    int eval_rollouts = 10;
    int eval_steps = 200;

    bool operator==(const BehaviorSection&) const = default;
};

struct DynamicsSection {
    std::vector<int> hidden_sizes = {256, 256};
    int prediction_time_scale = 3;  // L
    double tail_fraction = 0.25;    // final-epoch share of the replay reused
    double holdout_fraction = 0.1;
    double learning_rate = 1e-3;
    int gradient_steps = 2000;
    int batch_size = 100;

    bool operator==(const DynamicsSection&) const = default;
};

struct MpcSection {
    int horizon = 2;       // H (equals the table's behavior prediction steps)
    int sequence_samples = 16;  // K
    int exhaustive_threshold = 4096;

    bool operator==(const MpcSection&) const = default;
};

struct GraphSection {
    double grid_interval_x = 1.0;
    double grid_interval_y = 1.0;
    int blocked_retry_sweeps = 0;  // 0 = blocked edges are permanent

    bool operator==(const GraphSection&) const = default;
};

struct RunSection {
    int max_subgoal_steps = 100;     // M
    double success_threshold = 0.5;  // T
    long episode_cap = 50000;
    int snapshot_every_edges = 10;

    bool operator==(const RunSection&) const = default;
};

struct PipelineConfig {
    EnvSection env;
    BehaviorSection behavior;
    DynamicsSection dynamics;
    MpcSection mpc;
    GraphSection graph;
    RunSection run;

    bool operator==(const PipelineConfig&) const = default;

    CrawlerParams crawler_params() const {
        return CrawlerParams{env.dt, env.wheel_radius, env.axle_length, env.drag, env.wheel_accel};
    }

    Td3Config td3() const {
        Td3Config c;
        c.steps = behavior.steps_per_behavior;
        c.initial_random_steps = behavior.initial_random_steps;
        c.update_after = behavior.initial_steps_before_learning;
        c.update_every = behavior.steps_between_updates;
        c.max_episode_len = behavior.max_episode_length;
        c.replay_capacity = static_cast<std::size_t>(behavior.replay_buffer_size);
        c.batch_size = behavior.batch_size;
        c.policy_delay = behavior.policy_update_delay;
        c.gamma = behavior.gamma;
        c.polyak = behavior.polyak;
        c.policy_lr = behavior.policy_learning_rate;
        c.q_lr = behavior.q_learning_rate;
        c.target_noise_std = behavior.target_policy_noise_std;
        c.target_noise_clip = behavior.target_policy_clip;
        c.action_noise_std = behavior.action_noise_std;
        c.hidden_sizes = behavior.hidden_sizes;
        return c;
    }

    LibraryConfig library_config(bool scripted, int threads) const {
        LibraryConfig c;
        c.td3 = td3();
        c.scripted = scripted;
        c.scripted_data_steps = behavior.scripted_data_steps;
        c.scripted_episode_len = behavior.scripted_episode_length;
        c.eval_rollouts = behavior.eval_rollouts;
        c.eval_steps = behavior.eval_steps;
        c.threads = threads;
        return c;
    }

    DynamicsFitConfig fit_config() const {
        DynamicsFitConfig c;
        c.hidden_sizes = dynamics.hidden_sizes;
        c.learning_rate = dynamics.learning_rate;
        c.gradient_steps = dynamics.gradient_steps;
        c.batch_size = dynamics.batch_size;
        c.holdout_fraction = dynamics.holdout_fraction;
        return c;
    }

    MpcConfig mpc_config() const { return MpcConfig{mpc.horizon, mpc.sequence_samples, mpc.exhaustive_threshold}; }

    RunConfig run_config() const {
        return RunConfig{run.max_subgoal_steps, run.success_threshold, run.episode_cap,
                         run.snapshot_every_edges};
    }
};

inline PipelineConfig paper_profile() { return PipelineConfig{}; }

// Desk-scale overrides: runtimes in seconds to minutes on a laptop, paper
// values restorable by switching the profile.
inline PipelineConfig desk_profile() {
    PipelineConfig c;
    c.behavior.steps_per_behavior = 40000;
    c.behavior.initial_random_steps = 1000;
    c.behavior.max_episode_length = 500;
    c.behavior.replay_buffer_size = 50000;
    c.behavior.hidden_sizes = {64, 64};
    c.dynamics.hidden_sizes = {64, 64};
    return c;
}

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                       const std::string& section) {
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw ConfigError("unknown config key: " + section + "." + item.key());
    }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("invalid value for config key: ") + key);
    }
}

}  // namespace detail

inline nlohmann::json to_json(const PipelineConfig& c) {
    nlohmann::json j;
    j["env"] = {{"type", c.env.type},
                {"dt", c.env.dt},
                {"wheel_radius", c.env.wheel_radius},
                {"axle_length", c.env.axle_length},
                {"drag", c.env.drag},
                {"wheel_accel", c.env.wheel_accel},
                {"arena_free_cells", c.env.arena_free_cells},
                {"arena_spawn_margin", c.env.arena_spawn_margin}};
    j["behavior"] = {{"steps_per_behavior", c.behavior.steps_per_behavior},
                     {"num_behaviors", c.behavior.num_behaviors},
                     {"step_magnitude", c.behavior.step_magnitude},
                     {"initial_random_steps", c.behavior.initial_random_steps},
                     {"initial_steps_before_learning", c.behavior.initial_steps_before_learning},
                     {"steps_between_updates", c.behavior.steps_between_updates},
                     {"max_episode_length", c.behavior.max_episode_length},
                     {"replay_buffer_size", c.behavior.replay_buffer_size},
                     {"batch_size", c.behavior.batch_size},
                     {"policy_update_delay", c.behavior.policy_update_delay},
                     {"gamma", c.behavior.gamma},
                     {"polyak", c.behavior.polyak},
                     {"policy_learning_rate", c.behavior.policy_learning_rate},
                     {"q_learning_rate", c.behavior.q_learning_rate},
                     {"target_policy_noise_std", c.behavior.target_policy_noise_std},
                     {"target_policy_clip", c.behavior.target_policy_clip},
                     {"action_noise_std", c.behavior.action_noise_std},
                     {"hidden_sizes", c.behavior.hidden_sizes},
                     {"scripted_data_steps", c.behavior.scripted_data_steps},
                     {"scripted_episode_length", c.behavior.scripted_episode_length},
                     {"eval_rollouts", c.behavior.eval_rollouts},
                     {"eval_steps", c.behavior.eval_steps}};
    j["dynamics"] = {{"hidden_sizes", c.dynamics.hidden_sizes},
                     {"prediction_time_scale", c.dynamics.prediction_time_scale},
                     {"tail_fraction", c.dynamics.tail_fraction},
                     {"holdout_fraction", c.dynamics.holdout_fraction},
                     {"learning_rate", c.dynamics.learning_rate},
                     {"gradient_steps", c.dynamics.gradient_steps},
                     {"batch_size", c.dynamics.batch_size}};
    j["mpc"] = {{"horizon", c.mpc.horizon},
                {"sequence_samples", c.mpc.sequence_samples},
                {"exhaustive_threshold", c.mpc.exhaustive_threshold}};
    j["graph"] = {{"grid_interval_x", c.graph.grid_interval_x},
                  {"grid_interval_y", c.graph.grid_interval_y},
                  {"blocked_retry_sweeps", c.graph.blocked_retry_sweeps}};
    j["run"] = {{"max_subgoal_steps", c.run.max_subgoal_steps},
                {"success_threshold", c.run.success_threshold},
                {"episode_cap", c.run.episode_cap},
                {"snapshot_every_edges", c.run.snapshot_every_edges}};
    return j;
}

// Strict parse on top of a base config: unknown keys are rejected by name,
// known keys override the base values.
inline PipelineConfig config_from_json(const nlohmann::json& j,
                                       PipelineConfig base = PipelineConfig{}) {
    using detail::check_keys;
    using detail::read_field;
    check_keys(j, {"env", "behavior", "dynamics", "mpc", "graph", "run"}, "config");
    PipelineConfig c = base;
    if (j.contains("env")) {
        const auto& s = j.at("env");
        check_keys(s,
                   {"type", "dt", "wheel_radius", "axle_length", "drag", "wheel_accel",
                    "arena_free_cells", "arena_spawn_margin"},
                   "env");
        read_field(s, "type", c.env.type);
        if (c.env.type != "crawler" && c.env.type != "linear_point")
            throw ConfigError("env.type must be crawler or linear_point");
        read_field(s, "dt", c.env.dt);
        read_field(s, "wheel_radius", c.env.wheel_radius);
        read_field(s, "axle_length", c.env.axle_length);
        read_field(s, "drag", c.env.drag);
        read_field(s, "wheel_accel", c.env.wheel_accel);
        read_field(s, "arena_free_cells", c.env.arena_free_cells);
        read_field(s, "arena_spawn_margin", c.env.arena_spawn_margin);
    }
    if (j.contains("behavior")) {
        const auto& s = j.at("behavior");
        check_keys(s, {"steps_per_behavior", "num_behaviors", "step_magnitude",
                       "initial_random_steps", "initial_steps_before_learning",
                       "steps_between_updates", "max_episode_length", "replay_buffer_size",
                       "batch_size", "policy_update_delay", "gamma", "polyak",
                       "policy_learning_rate", "q_learning_rate", "target_policy_noise_std",
                       "target_policy_clip", "action_noise_std", "hidden_sizes",
                       "scripted_data_steps", "scripted_episode_length", "eval_rollouts",
                       "eval_steps"},
                   "behavior");
        read_field(s, "steps_per_behavior", c.behavior.steps_per_behavior);
        read_field(s, "num_behaviors", c.behavior.num_behaviors);
        read_field(s, "step_magnitude", c.behavior.step_magnitude);
        read_field(s, "initial_random_steps", c.behavior.initial_random_steps);
        read_field(s, "initial_steps_before_learning", c.behavior.initial_steps_before_learning);
        read_field(s, "steps_between_updates", c.behavior.steps_between_updates);
        read_field(s, "max_episode_length", c.behavior.max_episode_length);
        read_field(s, "replay_buffer_size", c.behavior.replay_buffer_size);
        read_field(s, "batch_size", c.behavior.batch_size);
        read_field(s, "policy_update_delay", c.behavior.policy_update_delay);
        read_field(s, "gamma", c.behavior.gamma);
        read_field(s, "polyak", c.behavior.polyak);
        read_field(s, "policy_learning_rate", c.behavior.policy_learning_rate);
        read_field(s, "q_learning_rate", c.behavior.q_learning_rate);
        read_field(s, "target_policy_noise_std", c.behavior.target_policy_noise_std);
        read_field(s, "target_policy_clip", c.behavior.target_policy_clip);
        read_field(s, "action_noise_std", c.behavior.action_noise_std);
        read_field(s, "hidden_sizes", c.behavior.hidden_sizes);
        read_field(s, "scripted_data_steps", c.behavior.scripted_data_steps);
        read_field(s, "scripted_episode_length", c.behavior.scripted_episode_length);
        read_field(s, "eval_rollouts", c.behavior.eval_rollouts);
        read_field(s, "eval_steps", c.behavior.eval_steps);
    }
    if (j.contains("dynamics")) {
        const auto& s = j.at("dynamics");
        check_keys(s, {"hidden_sizes", "prediction_time_scale", "tail_fraction",
                       "holdout_fraction", "learning_rate", "gradient_steps", "batch_size"},
                   "dynamics");
        read_field(s, "hidden_sizes", c.dynamics.hidden_sizes);
        read_field(s, "prediction_time_scale", c.dynamics.prediction_time_scale);
        read_field(s, "tail_fraction", c.dynamics.tail_fraction);
        read_field(s, "holdout_fraction", c.dynamics.holdout_fraction);
        read_field(s, "learning_rate", c.dynamics.learning_rate);
        read_field(s, "gradient_steps", c.dynamics.gradient_steps);
        read_field(s, "batch_size", c.dynamics.batch_size);
    }
    if (j.contains("mpc")) {
        const auto& s = j.at("mpc");
        check_keys(s, {"horizon", "sequence_samples", "exhaustive_threshold"}, "mpc");
        read_field(s, "horizon", c.mpc.horizon);
        read_field(s, "sequence_samples", c.mpc.sequence_samples);
        read_field(s, "exhaustive_threshold", c.mpc.exhaustive_threshold);
    }
    if (j.contains("graph")) {
        const auto& s = j.at("graph");
        check_keys(s, {"grid_interval_x", "grid_interval_y", "blocked_retry_sweeps"}, "graph");
        read_field(s, "grid_interval_x", c.graph.grid_interval_x);
        read_field(s, "grid_interval_y", c.graph.grid_interval_y);
        read_field(s, "blocked_retry_sweeps", c.graph.blocked_retry_sweeps);
    }
    if (j.contains("run")) {
        const auto& s = j.at("run");
        check_keys(s, {"max_subgoal_steps", "success_threshold", "episode_cap",
                       "snapshot_every_edges"},
                   "run");
        read_field(s, "max_subgoal_steps", c.run.max_subgoal_steps);
        read_field(s, "success_threshold", c.run.success_threshold);
        read_field(s, "episode_cap", c.run.episode_cap);
        read_field(s, "snapshot_every_edges", c.run.snapshot_every_edges);
    }
    return c;
}

}  // namespace hiernav
