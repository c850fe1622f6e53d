#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <deque>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "hiernav/errors.hpp"
#include "hiernav/maze.hpp"
#include "hiernav/rng.hpp"
#include "hiernav/space.hpp"

namespace hiernav {

// ---------------------------------------------------------------------------
// Crawler: nonholonomic two-wheel body with wheel inertia. Stands in for a
// legged robot: reaching a world direction requires steering, and speed builds
// up over tens of steps.
// ---------------------------------------------------------------------------

struct CrawlerParams {
    double dt = 0.1;            // s
    double wheel_radius = 0.5;  // m
    double axle_length = 1.0;   // m
    double drag = 0.5;          // 1/s, wheel speed decay
    double wheel_accel = 2.0;   // rad/s^2 at full action

    // Wheel speed converges to action * wheel_accel / drag.
    double max_wheel_speed() const { return wheel_accel / drag; }
    double max_forward_speed() const { return wheel_radius * max_wheel_speed(); }
    double max_step_displacement() const { return max_forward_speed() * dt; }
};

struct CrawlerState {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;  // rad, in (-pi, pi]
    double w_left = 0.0;   // rad/s
    double w_right = 0.0;  // rad/s
};

// One simulation step. Wheel speeds integrate first; the positional
// displacement is cancelled when it would land in a wall cell (heading and
// wheel updates are kept).
inline CrawlerState crawler_step(const CrawlerState& state, const Eigen::Vector2d& action,
                                 const MazeSpec& maze, const CrawlerParams& p = {}) {
    if (!action.allFinite()) throw NumericError("crawler_step: non-finite action");
    const double a_l = std::clamp(action(0), -1.0, 1.0);
    const double a_r = std::clamp(action(1), -1.0, 1.0);
    CrawlerState next = state;
    next.w_left += p.dt * (a_l * p.wheel_accel - p.drag * state.w_left);
    next.w_right += p.dt * (a_r * p.wheel_accel - p.drag * state.w_right);
    const double u = p.wheel_radius * (next.w_left + next.w_right) / 2.0;
    const double omega = p.wheel_radius * (next.w_right - next.w_left) / p.axle_length;
    const double nx = state.x + p.dt * u * std::cos(state.heading);
    const double ny = state.y + p.dt * u * std::sin(state.heading);
    if (!maze.is_wall_at(nx, ny)) {
        next.x = nx;
        next.y = ny;
    }
    next.heading = wrap_angle(state.heading + p.dt * omega);
    return next;
}

// Observation layout is fixed: (w_L, w_R, x, y, phi).
inline Eigen::VectorXd crawler_observe(const CrawlerState& s) {
    Eigen::VectorXd obs(5);
    obs << s.w_left, s.w_right, s.x, s.y, s.heading;
    return obs;
}

inline ObservationPartition crawler_partition() {
    return ObservationPartition{{0, 1}, {2, 3, 4}, {2, 3}};
}

// In-place recovery: wheel speeds zeroed, pose untouched.
inline CrawlerState reset_orientation(const CrawlerState& s) {
    CrawlerState out = s;
    out.w_left = 0.0;
    out.w_right = 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Environment interface shared by the trainer and the orchestrator. Stateful;
// one instance per thread.
// ---------------------------------------------------------------------------

class Env {
public:
    virtual ~Env() = default;

    virtual int observation_dim() const = 0;
    virtual int action_dim() const = 0;
    virtual const ObservationPartition& partition() const = 0;
    virtual const MidLevelSpace& mid_space() const = 0;

    // Inputs the low-level policy is allowed to see: proprioception plus body
    // orientation, never position.
    virtual int policy_feature_dim() const = 0;
    virtual Eigen::VectorXd policy_features(const Eigen::VectorXd& obs) const = 0;

    virtual Eigen::VectorXd reset(Rng& rng) = 0;   // random free pose
    virtual Eigen::VectorXd reset_to_start() = 0;  // maze start cell
    virtual Eigen::VectorXd step(const Eigen::VectorXd& action) = 0;
    virtual Eigen::VectorXd observation() const = 0;

    virtual double max_step_displacement() const = 0;
    virtual const MazeSpec* maze() const { return nullptr; }
    virtual std::unique_ptr<Env> clone() const = 0;

    // (x, y, phi, w_L, w_R), zero-filled where a field does not apply.
    virtual std::array<double, 5> trace_state() const = 0;

    Eigen::VectorXd external_state() const { return project(observation(), partition().external_idx); }
    Eigen::VectorXd interest_state() const { return project(observation(), partition().interest_idx); }
};

class CrawlerEnv : public Env {
public:
    CrawlerEnv(MazeSpec maze, CrawlerParams params = {}, double spawn_margin = 0.0)
        : maze_(std::move(maze)),
          params_(params),
          spawn_margin_(spawn_margin),
          partition_(crawler_partition()) {
        partition_.validate(5);
        mid_space_.dim = 3;
        mid_space_.interest_dims = {0, 1};
        mid_space_.angular_dims = {2};
        mid_space_.raw_feature_dims = {};
        mid_space_.sincos_feature_dims = {2};
        build_spawn_cells();
        reset_to_start();
    }

    int observation_dim() const override { return 5; }
    int action_dim() const override { return 2; }
    const ObservationPartition& partition() const override { return partition_; }
    const MidLevelSpace& mid_space() const override { return mid_space_; }

    int policy_feature_dim() const override { return 4; }

    // (w_L, w_R, cos phi, sin phi): wheel proprioception plus orientation.
    Eigen::VectorXd policy_features(const Eigen::VectorXd& obs) const override {
        if (obs.size() != 5) throw ShapeError("crawler policy_features: bad observation size");
        Eigen::VectorXd f(4);
        f << obs(0), obs(1), std::cos(obs(4)), std::sin(obs(4));
        return f;
    }

    Eigen::VectorXd reset(Rng& rng) override {
        const auto [r, c] = spawn_cells_[rng.uniform_index(spawn_cells_.size())];
        state_ = CrawlerState{};
        state_.x = (c + rng.uniform(0.2, 0.8)) * maze_.cell_size;
        state_.y = (r + rng.uniform(0.2, 0.8)) * maze_.cell_size;
        state_.heading = wrap_angle(rng.uniform(-M_PI, M_PI));
        return observation();
    }

    Eigen::VectorXd reset_to_start() override {
        const auto [x, y] = maze_.start_position();
        state_ = CrawlerState{};
        state_.x = x;
        state_.y = y;
        return observation();
    }

    Eigen::VectorXd step(const Eigen::VectorXd& action) override {
        if (action.size() != 2) throw ShapeError("crawler step: action must have dim 2");
        state_ = crawler_step(state_, Eigen::Vector2d(action(0), action(1)), maze_, params_);
        return observation();
    }

    Eigen::VectorXd observation() const override { return crawler_observe(state_); }

    double max_step_displacement() const override { return params_.max_step_displacement(); }
    const MazeSpec* maze() const override { return &maze_; }
    const CrawlerParams& params() const { return params_; }
    const CrawlerState& state() const { return state_; }
    void set_state(const CrawlerState& s) { state_ = s; }

    std::unique_ptr<Env> clone() const override { return std::make_unique<CrawlerEnv>(*this); }

    std::array<double, 5> trace_state() const override {
        return {state_.x, state_.y, state_.heading, state_.w_left, state_.w_right};
    }

private:
    void build_spawn_cells() {
        const int margin_cells = static_cast<int>(std::ceil(spawn_margin_ / maze_.cell_size));
        std::vector<int> wall_dist;
        if (margin_cells > 0) wall_dist = wall_distance_cells(maze_);
        for (int r = 0; r < maze_.rows; ++r) {
            for (int c = 0; c < maze_.cols; ++c) {
                if (maze_.at(r, c) == Cell::Wall) continue;
                if (margin_cells > 0 && wall_dist[r * maze_.cols + c] < margin_cells) continue;
                spawn_cells_.emplace_back(r, c);
            }
        }
        if (spawn_cells_.empty()) {
            for (int r = 0; r < maze_.rows; ++r)
                for (int c = 0; c < maze_.cols; ++c)
                    if (maze_.at(r, c) != Cell::Wall) spawn_cells_.emplace_back(r, c);
        }
    }

    static std::vector<int> wall_distance_cells(const MazeSpec& maze) {
        std::vector<int> dist(static_cast<std::size_t>(maze.rows) * maze.cols, -1);
        std::deque<std::pair<int, int>> queue;
        for (int r = 0; r < maze.rows; ++r)
            for (int c = 0; c < maze.cols; ++c)
                if (maze.at(r, c) == Cell::Wall) {
                    dist[r * maze.cols + c] = 0;
                    queue.emplace_back(r, c);
                }
        while (!queue.empty()) {
            auto [r, c] = queue.front();
            queue.pop_front();
            const int d = dist[r * maze.cols + c];
            const int dr[] = {1, -1, 0, 0};
            const int dc[] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                const int nr = r + dr[k], nc = c + dc[k];
                if (!maze.in_grid(nr, nc) || dist[nr * maze.cols + nc] >= 0) continue;
                dist[nr * maze.cols + nc] = d + 1;
                queue.emplace_back(nr, nc);
            }
        }
        return dist;
    }

    MazeSpec maze_;
    CrawlerParams params_;
    double spawn_margin_;
    ObservationPartition partition_;
    MidLevelSpace mid_space_;
    CrawlerState state_;
    std::vector<std::pair<int, int>> spawn_cells_;
};

// ---------------------------------------------------------------------------
// LinearPoint: the action is a clipped per-step displacement on (x, y). No
// proprioception. Analytically transparent, so it serves as the oracle
// environment in tests; with a maze attached it uses the same
// cancel-on-collision rule as the crawler.
// ---------------------------------------------------------------------------

class LinearPointEnv : public Env {
public:
    explicit LinearPointEnv(MazeSpec maze) : maze_(std::move(maze)), partition_{{}, {0, 1}, {0, 1}} {
        init_space();
        reset_to_start();
    }

    // Free-space variant: positions clamp to [0, width] x [0, height].
    LinearPointEnv(double width, double height)
        : bounds_{width, height}, partition_{{}, {0, 1}, {0, 1}} {
        init_space();
        pos_ = Eigen::Vector2d(width / 2.0, height / 2.0);
        start_ = pos_;
    }

    int observation_dim() const override { return 2; }
    int action_dim() const override { return 2; }
    const ObservationPartition& partition() const override { return partition_; }
    const MidLevelSpace& mid_space() const override { return mid_space_; }

    int policy_feature_dim() const override { return 0; }
    Eigen::VectorXd policy_features(const Eigen::VectorXd&) const override {
        return Eigen::VectorXd(0);
    }

    Eigen::VectorXd reset(Rng& rng) override {
        if (maze_) {
            std::vector<std::pair<int, int>> free_cells;
            for (int r = 0; r < maze_->rows; ++r)
                for (int c = 0; c < maze_->cols; ++c)
                    if (maze_->at(r, c) != Cell::Wall) free_cells.emplace_back(r, c);
            const auto [r, c] = free_cells[rng.uniform_index(free_cells.size())];
            pos_ = Eigen::Vector2d((c + rng.uniform(0.2, 0.8)) * maze_->cell_size,
                                   (r + rng.uniform(0.2, 0.8)) * maze_->cell_size);
        } else {
            pos_ = Eigen::Vector2d(rng.uniform(0.25 * bounds_[0], 0.75 * bounds_[0]),
                                   rng.uniform(0.25 * bounds_[1], 0.75 * bounds_[1]));
        }
        return observation();
    }

    Eigen::VectorXd reset_to_start() override {
        if (maze_) {
            const auto [x, y] = maze_->start_position();
            pos_ = Eigen::Vector2d(x, y);
        } else {
            pos_ = start_;
        }
        return observation();
    }

    Eigen::VectorXd step(const Eigen::VectorXd& action) override {
        if (action.size() != 2) throw ShapeError("linear point step: action must have dim 2");
        if (!action.allFinite()) throw NumericError("linear point step: non-finite action");
        Eigen::Vector2d delta(std::clamp(action(0), -1.0, 1.0), std::clamp(action(1), -1.0, 1.0));
        Eigen::Vector2d next = pos_ + delta;
        if (maze_) {
            if (!maze_->is_wall_at(next(0), next(1))) pos_ = next;
        } else {
            pos_ = Eigen::Vector2d(std::clamp(next(0), 0.0, bounds_[0]),
                                   std::clamp(next(1), 0.0, bounds_[1]));
        }
        return observation();
    }

    Eigen::VectorXd observation() const override { return pos_; }

    double max_step_displacement() const override { return std::sqrt(2.0); }
    const MazeSpec* maze() const override { return maze_ ? &*maze_ : nullptr; }
    void set_position(const Eigen::Vector2d& p) { pos_ = p; }

    std::unique_ptr<Env> clone() const override { return std::make_unique<LinearPointEnv>(*this); }

    std::array<double, 5> trace_state() const override { return {pos_(0), pos_(1), 0.0, 0.0, 0.0}; }

private:
    void init_space() {
        partition_.validate(2);
        mid_space_.dim = 2;
        mid_space_.interest_dims = {0, 1};
        mid_space_.angular_dims = {};
        mid_space_.raw_feature_dims = {};
        mid_space_.sincos_feature_dims = {};
    }

    std::optional<MazeSpec> maze_;
    std::array<double, 2> bounds_{0.0, 0.0};
    ObservationPartition partition_;
    MidLevelSpace mid_space_;
    Eigen::Vector2d pos_{0.0, 0.0};
    Eigen::Vector2d start_{0.0, 0.0};
};

}  // namespace hiernav
