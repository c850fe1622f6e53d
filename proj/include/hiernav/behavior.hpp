#pragma once

#include <Eigen/Core>
#include <cmath>
#include <utility>
#include <variant>
#include <vector>

#include "hiernav/env.hpp"
#include "hiernav/errors.hpp"
#include "hiernav/mlp.hpp"
#include "hiernav/space.hpp"

namespace hiernav {

// Training target of one behavior: the desired per-step change of the
// dimensions of interest.
struct BehaviorSpec {
    int id = 0;
    Eigen::VectorXd v;
};

// Directional reward: 1 - |(s'_m - s_m) - v|_1. Callers pass the components
// the reward should constrain (the dimensions of interest); heading is left
// free so that steering is not penalized.
inline double behavior_reward(const Eigen::VectorXd& s_m_t, const Eigen::VectorXd& s_m_t1,
                              const Eigen::VectorXd& v) {
    if (s_m_t.size() != s_m_t1.size() || s_m_t.size() != v.size())
        throw ShapeError("behavior_reward: dimension mismatch");
    return 1.0 - ((s_m_t1 - s_m_t) - v).lpNorm<1>();
}

// Hand-coded steer-then-drive controller for the crawler. Reads the same
// inputs a learned policy gets: (w_L, w_R, cos phi, sin phi).
struct ScriptedCrawlerController {
    Eigen::Vector2d v;  // desired per-step displacement
    CrawlerParams params;
    double heading_gain = 2.0;
    double wheel_gain = 1.0;

    Eigen::VectorXd act(const Eigen::VectorXd& features) const {
        if (features.size() != 4) throw ShapeError("scripted crawler controller: expected 4 features");
        const double w_l = features(0);
        const double w_r = features(1);
        const double phi = std::atan2(features(3), features(2));
        const double err = wrap_angle(std::atan2(v(1), v(0)) - phi);

        const double u_target = v.norm() / params.dt;
        const double u_des = u_target * std::max(0.0, std::cos(err));
        const double omega_max =
            2.0 * params.wheel_radius * params.max_wheel_speed() / params.axle_length;
        const double omega_des = std::clamp(heading_gain * err, -omega_max, omega_max);

        const double half_axle = 0.5 * params.axle_length;
        double wl_des = (u_des - half_axle * omega_des) / params.wheel_radius;
        double wr_des = (u_des + half_axle * omega_des) / params.wheel_radius;
        wl_des = std::clamp(wl_des, -params.max_wheel_speed(), params.max_wheel_speed());
        wr_des = std::clamp(wr_des, -params.max_wheel_speed(), params.max_wheel_speed());

        // Feedforward holds the wheel at its target against drag; the P term
        // closes the gap.
        const double ff = params.drag / params.wheel_accel;
        Eigen::VectorXd a(2);
        a(0) = std::clamp(ff * wl_des + wheel_gain * (wl_des - w_l), -1.0, 1.0);
        a(1) = std::clamp(ff * wr_des + wheel_gain * (wr_des - w_r), -1.0, 1.0);
        return a;
    }
};

// LinearPoint counterpart: the action is the displacement itself.
struct ScriptedLinearController {
    Eigen::Vector2d v;

    Eigen::VectorXd act(const Eigen::VectorXd&) const {
        Eigen::VectorXd a(2);
        a << std::clamp(v(0), -1.0, 1.0), std::clamp(v(1), -1.0, 1.0);
        return a;
    }
};

// One member of the behavior library: either a trained policy network or a
// scripted controller, tagged with the vector it stands for.
class Behavior {
public:
    Behavior(BehaviorSpec spec, Mlp policy) : spec_(std::move(spec)), impl_(std::move(policy)) {}
    Behavior(BehaviorSpec spec, ScriptedCrawlerController c)
        : spec_(std::move(spec)), impl_(std::move(c)) {}
    Behavior(BehaviorSpec spec, ScriptedLinearController c)
        : spec_(std::move(spec)), impl_(std::move(c)) {}

    const BehaviorSpec& spec() const { return spec_; }
    bool scripted() const { return !std::holds_alternative<Mlp>(impl_); }

    const Mlp& policy_net() const {
        if (const Mlp* net = std::get_if<Mlp>(&impl_)) return *net;
        throw ContractViolation("behavior is scripted; it has no policy network");
    }

    // Deterministic action for the given policy features; no exploration
    // noise, no state.
    Eigen::VectorXd act(const Eigen::VectorXd& features) const {
        return std::visit(
            [&](const auto& impl) -> Eigen::VectorXd {
                using T = std::decay_t<decltype(impl)>;
                if constexpr (std::is_same_v<T, Mlp>) {
                    return forward(impl, features);
                } else {
                    return impl.act(features);
                }
            },
            impl_);
    }

private:
    BehaviorSpec spec_;
    std::variant<Mlp, ScriptedCrawlerController, ScriptedLinearController> impl_;
};

struct BehaviorLibrary {
    std::vector<Behavior> behaviors;
    bool scripted = false;

    int size() const { return static_cast<int>(behaviors.size()); }
    const Behavior& operator[](int i) const { return behaviors[static_cast<std::size_t>(i)]; }
};

// Default library layout: the four cardinal directions scaled to one per-step
// magnitude.
inline std::vector<BehaviorSpec> cardinal_specs(double magnitude) {
    std::vector<BehaviorSpec> specs;
    const double m = magnitude;
    const double dirs[4][2] = {{m, 0.0}, {-m, 0.0}, {0.0, m}, {0.0, -m}};
    for (int i = 0; i < 4; ++i) {
        BehaviorSpec s;
        s.id = i;
        s.v = Eigen::Vector2d(dirs[i][0], dirs[i][1]);
        specs.push_back(std::move(s));
    }
    return specs;
}

inline void validate_specs(const std::vector<BehaviorSpec>& specs) {
    if (specs.empty()) throw ContractViolation("behavior specs must be nonempty");
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (!specs[i].v.allFinite()) throw NumericError("behavior spec v must be finite");
        for (std::size_t j = i + 1; j < specs.size(); ++j) {
            if (specs[i].v.size() == specs[j].v.size() && specs[i].v == specs[j].v)
                throw ContractViolation("behavior specs must have pairwise distinct v vectors");
        }
    }
}

// Builds the injection-path library of hand-coded controllers.
inline BehaviorLibrary make_scripted_library(const Env& env, std::vector<BehaviorSpec> specs) {
    validate_specs(specs);
    BehaviorLibrary lib;
    lib.scripted = true;
    const bool crawler = dynamic_cast<const CrawlerEnv*>(&env) != nullptr;
    for (auto& spec : specs) {
        if (spec.v.size() != 2) throw ShapeError("scripted behaviors expect 2-dim v");
        Eigen::Vector2d v(spec.v(0), spec.v(1));
        if (crawler) {
            ScriptedCrawlerController ctrl;
            ctrl.v = v;
            ctrl.params = static_cast<const CrawlerEnv&>(env).params();
            lib.behaviors.emplace_back(std::move(spec), std::move(ctrl));
        } else {
            lib.behaviors.emplace_back(std::move(spec), ScriptedLinearController{v});
        }
    }
    return lib;
}

}  // namespace hiernav
