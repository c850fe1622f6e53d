#include <catch2/catch_amalgamated.hpp>

#include "hiernav/behavior.hpp"
#include "hiernav/td3.hpp"

using namespace hiernav;

namespace {

Eigen::Vector2d v2(double x, double y) { return {x, y}; }

}  // namespace

TEST_CASE("behavior_reward: worked examples") {
    REQUIRE(behavior_reward(v2(0, 0), v2(1, 0), v2(1, 0)) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(behavior_reward(v2(0, 0), v2(0, 0), v2(1, 0)) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(behavior_reward(v2(0, 0), v2(-1, 1), v2(1, 0)) == Catch::Approx(-2.0).margin(1e-12));
}

TEST_CASE("behavior_reward: dimension mismatch throws") {
    REQUIRE_THROWS_AS(behavior_reward(v2(0, 0), v2(0, 0), Eigen::Vector3d(1, 0, 0)), ShapeError);
}

TEST_CASE("behavior_reward: exact-match identity and upper bound") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd s(2), v(2), s2(2);
        for (int i = 0; i < 2; ++i) {
            s(i) = rng.uniform(-10.0, 10.0);
            v(i) = rng.uniform(-1.0, 1.0);
            s2(i) = rng.uniform(-10.0, 10.0);
        }
        REQUIRE(behavior_reward(s, s + v, v) == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(behavior_reward(s, s2, v) <= 1.0 + 1e-15);
    }
}

TEST_CASE("act: zero-weight policy emits the zero action") {
    BehaviorSpec spec{0, v2(0.15, 0.0)};
    Behavior b(spec, make_zero_mlp({4, 8, 2}, Activation::Tanh));
    Eigen::VectorXd f(4);
    f << 1.0, -2.0, 0.5, 0.5;
    REQUIRE(b.act(f).isZero(0.0));
}

TEST_CASE("act: deterministic for identical features") {
    Rng rng(9);
    Behavior b(BehaviorSpec{0, v2(0.15, 0.0)}, make_mlp({4, 16, 2}, Activation::Tanh, rng));
    Eigen::VectorXd f(4);
    f << 0.3, -0.7, 0.8, 0.6;
    const Eigen::VectorXd a1 = b.act(f);
    const Eigen::VectorXd a2 = b.act(f);
    REQUIRE(a1 == a2);
    REQUIRE(a1.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("scripted crawler controller: facing away from +x it turns") {
    ScriptedCrawlerController ctrl;
    ctrl.v = v2(0.15, 0.0);
    Eigen::VectorXd f(4);
    f << 0.0, 0.0, std::cos(M_PI), std::sin(M_PI);  // heading pi, at rest
    const Eigen::VectorXd a = ctrl.act(f);
    REQUIRE(std::abs(a(1) - a(0)) > std::abs(a(1) + a(0)));  // differential channel dominates
    REQUIRE(a.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("scripted crawler controller: aligned and at cruise speed it holds") {
    ScriptedCrawlerController ctrl;
    ctrl.v = v2(0.15, 0.0);
    const double w_cruise = 0.15 / ctrl.params.dt / ctrl.params.wheel_radius;  // 3 rad/s
    Eigen::VectorXd f(4);
    f << w_cruise, w_cruise, 1.0, 0.0;
    const Eigen::VectorXd a = ctrl.act(f);
    // Feedforward exactly balances drag: a = drag * w / accel on both wheels.
    const double hold = ctrl.params.drag * w_cruise / ctrl.params.wheel_accel;
    REQUIRE(a(0) == Catch::Approx(hold).margin(1e-12));
    REQUIRE(a(1) == Catch::Approx(hold).margin(1e-12));
}

TEST_CASE("cardinal_specs: four distinct directions scaled by the step magnitude") {
    const auto specs = cardinal_specs(0.15);
    REQUIRE(specs.size() == 4);
    validate_specs(specs);
    REQUIRE(specs[0].v == v2(0.15, 0.0));
    REQUIRE(specs[1].v == v2(-0.15, 0.0));
    REQUIRE(specs[2].v == v2(0.0, 0.15));
    REQUIRE(specs[3].v == v2(0.0, -0.15));
}

TEST_CASE("validate_specs: duplicate v vectors are rejected") {
    std::vector<BehaviorSpec> specs{{0, v2(0.1, 0.0)}, {1, v2(0.1, 0.0)}};
    REQUIRE_THROWS_AS(validate_specs(specs), ContractViolation);
    REQUIRE_THROWS_AS(validate_specs({}), ContractViolation);
}

TEST_CASE("build_library: scripted mode returns controllers without training") {
    CrawlerEnv env(make_open_arena(30, 30), CrawlerParams{}, 5.0);
    LibraryConfig cfg;
    cfg.scripted = true;
    cfg.scripted_data_steps = 500;
    cfg.scripted_episode_len = 100;
    cfg.eval_rollouts = 2;
    cfg.eval_steps = 50;
    const LibraryBuildResult out = build_library(env, cardinal_specs(0.15), cfg, 77);
    REQUIRE(out.library.size() == 4);
    REQUIRE(out.library.scripted);
    for (int i = 0; i < 4; ++i) {
        REQUIRE(out.library[i].scripted());
        REQUIRE(out.replays[static_cast<std::size_t>(i)].size() == 500);
        REQUIRE(out.evals[static_cast<std::size_t>(i)].cosine_with_v > 0.8);
    }
}

TEST_CASE("td3 targets use the minimum of the twin critics") {
    Td3Config cfg;
    cfg.hidden_sizes = {8};
    cfg.target_noise_std = 0.0;  // deterministic target action for the check
    Td3Trainer trainer(3, 2, cfg, 42);

    Rng rng(1);
    Td3Batch batch;
    const int b = 5;
    batch.feat.setRandom(b, 3);
    batch.act.setRandom(b, 2);
    batch.feat2.setRandom(b, 3);
    batch.reward.setRandom(b);

    Rng noise_rng(2);
    const Eigen::VectorXd y = trainer.compute_targets(batch, noise_rng);

    for (int i = 0; i < b; ++i) {
        const Eigen::VectorXd f2 = batch.feat2.row(i).transpose();
        Eigen::VectorXd a2 = forward(trainer.actor_target(), f2);
        for (int k = 0; k < a2.size(); ++k) a2(k) = std::clamp(a2(k), -1.0, 1.0);
        Eigen::VectorXd x2(5);
        x2 << f2, a2;
        const double q1 = forward(trainer.critic1_target(), x2)(0);
        const double q2 = forward(trainer.critic2_target(), x2)(0);
        const double expected = batch.reward(i) + cfg.gamma * std::min(q1, q2);
        REQUIRE(y(i) == Catch::Approx(expected).margin(1e-12));
    }
}

TEST_CASE("train_behavior: zero step budget returns an untrained behavior") {
    LinearPointEnv env(50.0, 50.0);
    Td3Config cfg;
    cfg.steps = 0;
    cfg.hidden_sizes = {8};
    const BehaviorTrainResult r = train_behavior(env, BehaviorSpec{0, v2(0.2, 0.0)}, cfg, 3);
    REQUIRE(r.replay.empty());
    REQUIRE(r.behavior.act(Eigen::VectorXd(0)).size() == 2);
}

TEST_CASE("train_behavior: learns the LinearPoint drift target", "[slow]") {
    LinearPointEnv env(200.0, 200.0);  // wide enough that 200-step rollouts never hit the bounds
    Td3Config cfg;
    cfg.steps = 5000;
    cfg.initial_random_steps = 300;
    cfg.update_after = 300;
    cfg.max_episode_len = 200;
    cfg.replay_capacity = 5000;
    cfg.hidden_sizes = {32, 32};
    const BehaviorSpec spec{0, v2(0.2, 0.0)};
    const BehaviorTrainResult r = train_behavior(env, spec, cfg, 1);

    Rng eval_rng(99);
    const BehaviorEval eval = evaluate_behavior(env, r.behavior, 5, 200, eval_rng);
    REQUIRE(eval.mean_step_delta(0) > 0.15);
    REQUIRE(eval.mean_step_delta(0) < 0.25);
    REQUIRE(std::abs(eval.mean_step_delta(1)) < 0.05);
    REQUIRE(r.replay.size() == 5000);
}
