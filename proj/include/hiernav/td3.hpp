#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "hiernav/behavior.hpp"
#include "hiernav/env.hpp"
#include "hiernav/errors.hpp"
#include "hiernav/mlp.hpp"
#include "hiernav/optim.hpp"
#include "hiernav/replay.hpp"
#include "hiernav/rng.hpp"

namespace hiernav {

// Twin-critic delayed deterministic policy gradient. Defaults are the
// full-scale values; the desk profile overrides the budget-sized ones.
struct Td3Config {
    long steps = 400000;
    long initial_random_steps = 100000;
    long update_after = 1000;
    int update_every = 50;
    int max_episode_len = 1000;
    std::size_t replay_capacity = 1000000;
    int batch_size = 100;
    int policy_delay = 2;
    double gamma = 0.99;
    double polyak = 0.995;
    double policy_lr = 1e-3;
    double q_lr = 1e-3;
    double target_noise_std = 0.2;
    double target_noise_clip = 0.5;
    double action_noise_std = 0.1;
    std::vector<int> hidden_sizes = {256, 256};
    // Output layers start near zero so the tanh policy cannot saturate before
    // the critics carry signal.
    double output_init_scale = 0.01;
    // Train critics on rewards centered at the do-nothing value 1 - |v|_1.
    // A constant shift leaves the action ordering untouched but removes the
    // long value-magnitude ramp that otherwise swamps the advantage signal.
    bool center_reward = true;
};

struct Td3Batch {
    Eigen::MatrixXd feat;    // B x F
    Eigen::MatrixXd act;     // B x A
    Eigen::VectorXd reward;  // B
    Eigen::MatrixXd feat2;   // B x F
};

class Td3Trainer {
public:
    Td3Trainer(int feature_dim, int action_dim, const Td3Config& cfg, std::uint64_t seed)
        : cfg_(cfg), action_dim_(action_dim) {
        Rng init(derive_seed(seed, 0));
        std::vector<int> actor_sizes{feature_dim};
        actor_sizes.insert(actor_sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
        actor_sizes.push_back(action_dim);
        std::vector<int> critic_sizes{feature_dim + action_dim};
        critic_sizes.insert(critic_sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
        critic_sizes.push_back(1);

        actor_ = make_mlp(actor_sizes, Activation::Tanh, init);
        critic1_ = make_mlp(critic_sizes, Activation::Identity, init);
        critic2_ = make_mlp(critic_sizes, Activation::Identity, init);
        for (Mlp* net : {&actor_, &critic1_, &critic2_}) {
            net->weights.back() *= cfg.output_init_scale;
            net->biases.back() *= cfg.output_init_scale;
        }
        actor_target_ = actor_;
        critic1_target_ = critic1_;
        critic2_target_ = critic2_;

        OptimizerConfig pi_opt{cfg.policy_lr, OptimizerVariant::Adam};
        OptimizerConfig q_opt{cfg.q_lr, OptimizerVariant::Adam};
        actor_opt_ = std::make_unique<Optimizer>(actor_, pi_opt);
        critic1_opt_ = std::make_unique<Optimizer>(critic1_, q_opt);
        critic2_opt_ = std::make_unique<Optimizer>(critic2_, q_opt);
    }

    const Mlp& actor() const { return actor_; }
    const Mlp& critic1() const { return critic1_; }
    const Mlp& critic2() const { return critic2_; }
    const Mlp& actor_target() const { return actor_target_; }
    const Mlp& critic1_target() const { return critic1_target_; }
    const Mlp& critic2_target() const { return critic2_target_; }
    long update_count() const { return updates_; }

    // Bootstrapped targets: r + gamma * min of the twin target critics at the
    // smoothed target action.
    Eigen::VectorXd compute_targets(const Td3Batch& batch, Rng& rng) const {
        const Eigen::Index b = batch.feat2.rows();
        Eigen::MatrixXd a2 = forward_batch(actor_target_, batch.feat2);
        for (Eigen::Index r = 0; r < a2.rows(); ++r) {
            for (Eigen::Index c = 0; c < a2.cols(); ++c) {
                const double noise =
                    std::clamp(rng.gaussian(0.0, cfg_.target_noise_std), -cfg_.target_noise_clip,
                               cfg_.target_noise_clip);
                a2(r, c) = std::clamp(a2(r, c) + noise, -1.0, 1.0);
            }
        }
        Eigen::MatrixXd x2(b, batch.feat2.cols() + a2.cols());
        x2 << batch.feat2, a2;
        const Eigen::VectorXd q1 = forward_batch(critic1_target_, x2).col(0);
        const Eigen::VectorXd q2 = forward_batch(critic2_target_, x2).col(0);
        Eigen::VectorXd y = batch.reward + cfg_.gamma * q1.cwiseMin(q2);
        if (!y.allFinite()) throw TrainingError("td3: non-finite bootstrap target");
        return y;
    }

    // One gradient update: both critics every call, actor and target nets
    // every policy_delay-th call.
    void update(const Td3Batch& batch, Rng& rng) {
        const Eigen::Index b = batch.feat.rows();
        const Eigen::VectorXd y = compute_targets(batch, rng);
        Eigen::MatrixXd x(b, batch.feat.cols() + batch.act.cols());
        x << batch.feat, batch.act;

        for (auto [critic, opt] : {std::pair{&critic1_, critic1_opt_.get()},
                                   std::pair{&critic2_, critic2_opt_.get()}}) {
            ForwardTrace trace = forward_trace(*critic, x);
            const Eigen::VectorXd err = trace.post.back().col(0) - y;
            if (!err.allFinite()) throw TrainingError("td3: non-finite critic loss");
            Eigen::MatrixXd upstream = (2.0 / static_cast<double>(b)) * err;
            Gradients g = backward(*critic, trace, upstream);
            opt->apply(*critic, g);
        }

        ++updates_;
        if (updates_ % cfg_.policy_delay != 0) return;

        // Ascend Q1(s, pi(s)): the critic's input gradient w.r.t. the action
        // block is pushed back through the actor.
        ForwardTrace pi_trace = forward_trace(actor_, batch.feat);
        Eigen::MatrixXd xa(b, batch.feat.cols() + action_dim_);
        xa << batch.feat, pi_trace.post.back();
        ForwardTrace q_trace = forward_trace(critic1_, xa);
        Eigen::MatrixXd q_upstream =
            Eigen::MatrixXd::Constant(b, 1, -1.0 / static_cast<double>(b));
        Gradients q_grads = backward(critic1_, q_trace, q_upstream);
        Eigen::MatrixXd d_action = q_grads.input.rightCols(action_dim_);
        Gradients pi_grads = backward(actor_, pi_trace, d_action);
        actor_opt_->apply(actor_, pi_grads);

        polyak_update(actor_target_, actor_, cfg_.polyak);
        polyak_update(critic1_target_, critic1_, cfg_.polyak);
        polyak_update(critic2_target_, critic2_, cfg_.polyak);
    }

private:
    Td3Config cfg_;
    int action_dim_;
    Mlp actor_, critic1_, critic2_;
    Mlp actor_target_, critic1_target_, critic2_target_;
    std::unique_ptr<Optimizer> actor_opt_, critic1_opt_, critic2_opt_;
    long updates_ = 0;
};

struct BehaviorTrainResult {
    Behavior behavior;
    ReplayBuffer replay;
    long env_steps = 0;
    double recent_mean_reward = 0.0;
};

// Trains one behavior with the directional reward over the dimensions of
// interest. The returned buffer holds the training transitions for dynamics
// fitting.
inline BehaviorTrainResult train_behavior(Env& env, const BehaviorSpec& spec,
                                          const Td3Config& cfg, std::uint64_t seed) {
    if (static_cast<int>(spec.v.size()) != static_cast<int>(env.partition().interest_idx.size()))
        throw ShapeError("train_behavior: v must match the dimensions of interest");
    Rng rng(derive_seed(seed, 1));
    Td3Trainer trainer(env.policy_feature_dim(), env.action_dim(), cfg, derive_seed(seed, 2));
    ReplayBuffer buffer(cfg.replay_capacity);
    const auto& interest_idx = env.partition().interest_idx;
    const double reward_shift = cfg.center_reward ? 1.0 - spec.v.lpNorm<1>() : 0.0;

    const auto make_batch = [&](Rng& r) {
        Td3Batch batch;
        const int b = cfg.batch_size;
        batch.feat.resize(b, env.policy_feature_dim());
        batch.act.resize(b, env.action_dim());
        batch.feat2.resize(b, env.policy_feature_dim());
        batch.reward.resize(b);
        for (int i = 0; i < b; ++i) {
            const Transition& t = buffer.sample(r);
            batch.feat.row(i) = env.policy_features(t.obs_t).transpose();
            batch.act.row(i) = t.action.transpose();
            batch.feat2.row(i) = env.policy_features(t.obs_t1).transpose();
            batch.reward(i) = behavior_reward(project(t.obs_t, interest_idx),
                                              project(t.obs_t1, interest_idx), spec.v) -
                              reward_shift;
        }
        return batch;
    };

    Eigen::VectorXd obs = env.reset(rng);
    int episode_step = 0;
    double reward_sum = 0.0;
    long reward_count = 0;

    for (long t = 0; t < cfg.steps; ++t) {
        Eigen::VectorXd action(env.action_dim());
        if (t < cfg.initial_random_steps) {
            for (int i = 0; i < action.size(); ++i) action(i) = rng.uniform(-1.0, 1.0);
        } else {
            action = forward(trainer.actor(), env.policy_features(obs));
            for (int i = 0; i < action.size(); ++i)
                action(i) = std::clamp(action(i) + rng.gaussian(0.0, cfg.action_noise_std), -1.0, 1.0);
        }
        Eigen::VectorXd obs2 = env.step(action);
        buffer.add(Transition{obs, action, obs2, episode_step});
        if (t >= cfg.steps - 2000) {
            reward_sum += behavior_reward(project(obs, interest_idx), project(obs2, interest_idx),
                                          spec.v);
            ++reward_count;
        }
        obs = std::move(obs2);
        ++episode_step;
        if (episode_step >= cfg.max_episode_len) {
            obs = env.reset(rng);
            episode_step = 0;
        }
        if (t + 1 >= cfg.update_after && (t + 1) % cfg.update_every == 0) {
            for (int j = 0; j < cfg.update_every; ++j) trainer.update(make_batch(rng), rng);
        }
    }

    BehaviorTrainResult result{Behavior(spec, trainer.actor()), std::move(buffer), cfg.steps,
                               reward_count > 0 ? reward_sum / reward_count : 0.0};
    return result;
}

struct BehaviorEval {
    Eigen::VectorXd mean_step_delta;               // per-step change of s^h
    std::vector<Eigen::VectorXd> rollout_deltas;   // net displacement per rollout
    double cosine_with_v = 0.0;
};

// Seeded evaluation rollouts from random free poses, no exploration noise.
inline BehaviorEval evaluate_behavior(Env& env, const Behavior& behavior, int rollouts, int steps,
                                      Rng& rng) {
    BehaviorEval eval;
    Eigen::VectorXd total = Eigen::VectorXd::Zero(env.partition().interest_idx.size());
    for (int k = 0; k < rollouts; ++k) {
        Eigen::VectorXd obs = env.reset(rng);
        const Eigen::VectorXd start = project(obs, env.partition().interest_idx);
        for (int t = 0; t < steps; ++t) obs = env.step(behavior.act(env.policy_features(obs)));
        const Eigen::VectorXd disp = project(obs, env.partition().interest_idx) - start;
        eval.rollout_deltas.push_back(disp);
        total += disp;
    }
    eval.mean_step_delta = total / static_cast<double>(rollouts * steps);
    const Eigen::VectorXd& v = behavior.spec().v;
    const double denom = total.norm() * v.norm();
    eval.cosine_with_v = denom > 0.0 ? total.dot(v) / denom : 0.0;
    return eval;
}

struct LibraryConfig {
    Td3Config td3;
    bool scripted = false;
    long scripted_data_steps = 8000;  // rollout budget per scripted behavior
    int scripted_episode_len = 250;
    int eval_rollouts = 10;
    int eval_steps = 200;
    int threads = 0;  // 0 = hardware concurrency
};

struct LibraryBuildResult {
    BehaviorLibrary library;
    std::vector<ReplayBuffer> replays;  // one per behavior, training order
    std::vector<BehaviorEval> evals;
};

namespace detail {

inline ReplayBuffer collect_scripted_rollouts(Env& env, const Behavior& behavior, long steps,
                                              int episode_len, std::uint64_t seed) {
    ReplayBuffer buffer(static_cast<std::size_t>(std::max<long>(steps, 1)));
    Rng rng(seed);
    Eigen::VectorXd obs = env.reset(rng);
    int episode_step = 0;
    for (long t = 0; t < steps; ++t) {
        const Eigen::VectorXd action = behavior.act(env.policy_features(obs));
        Eigen::VectorXd obs2 = env.step(action);
        buffer.add(Transition{obs, action, obs2, episode_step});
        obs = std::move(obs2);
        if (++episode_step >= episode_len) {
            obs = env.reset(rng);
            episode_step = 0;
        }
    }
    return buffer;
}

}  // namespace detail

// Builds the N-behavior library. Trainings are independent, so they run on a
// small thread pool; results are keyed by behavior index and do not depend on
// completion order.
inline LibraryBuildResult build_library(const Env& proto_env, std::vector<BehaviorSpec> specs,
                                        const LibraryConfig& cfg, std::uint64_t seed) {
    validate_specs(specs);
    const int n = static_cast<int>(specs.size());
    std::vector<std::optional<Behavior>> behaviors(n);
    std::vector<std::optional<ReplayBuffer>> replays(n);
    std::vector<BehaviorEval> evals(n);

    if (cfg.scripted) {
        auto env = proto_env.clone();
        BehaviorLibrary lib = make_scripted_library(*env, specs);
        LibraryBuildResult out;
        for (int i = 0; i < n; ++i) {
            out.replays.push_back(detail::collect_scripted_rollouts(
                *env, lib[i], cfg.scripted_data_steps, cfg.scripted_episode_len,
                derive_seed(seed, 300 + i)));
            Rng eval_rng(derive_seed(seed, 400 + i));
            out.evals.push_back(
                evaluate_behavior(*env, lib[i], cfg.eval_rollouts, cfg.eval_steps, eval_rng));
        }
        out.library = std::move(lib);
        return out;
    }

    int threads = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                auto env = proto_env.clone();
                BehaviorTrainResult r =
                    train_behavior(*env, specs[i], cfg.td3, derive_seed(seed, 100 + i));
                Rng eval_rng(derive_seed(seed, 400 + i));
                evals[i] = evaluate_behavior(*env, r.behavior, cfg.eval_rollouts, cfg.eval_steps,
                                             eval_rng);
                behaviors[i].emplace(std::move(r.behavior));
                replays[i].emplace(std::move(r.replay));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (int i = 0; i < n; ++i)
        if (errors[i]) std::rethrow_exception(errors[i]);

    LibraryBuildResult out;
    out.library.scripted = false;
    for (int i = 0; i < n; ++i) {
        out.library.behaviors.push_back(std::move(*behaviors[i]));
        out.replays.push_back(std::move(*replays[i]));
        out.evals.push_back(std::move(evals[i]));
    }
    return out;
}

}  // namespace hiernav
