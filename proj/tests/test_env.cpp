#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hiernav/env.hpp"
#include "hiernav/maze.hpp"

using namespace hiernav;

namespace {

const char* kTinyMaze =
    "cellsize=1.0\n"
    "###\n"
    "#S#\n"
    "###\n";

MazeSpec big_open() { return make_open_arena(40, 40); }

std::string maze_path(const char* name) { return std::string(HIERNAV_MAZE_DIR "/") + name; }

}  // namespace

TEST_CASE("crawler_step: rest with zero action is a fixed point") {
    const MazeSpec maze = big_open();
    CrawlerState s;
    s.x = 5.0;
    s.y = 5.0;
    const CrawlerState next = crawler_step(s, Eigen::Vector2d(0.0, 0.0), maze);
    REQUIRE(next.x == s.x);
    REQUIRE(next.y == s.y);
    REQUIRE(next.heading == s.heading);
    REQUIRE(next.w_left == 0.0);
    REQUIRE(next.w_right == 0.0);
}

TEST_CASE("crawler_step: full-ahead from rest matches an independent integration") {
    const MazeSpec maze = big_open();
    const CrawlerParams p;
    CrawlerState s;
    s.x = 20.0;
    s.y = 20.0;
    for (int i = 0; i < 100; ++i) s = crawler_step(s, Eigen::Vector2d(1.0, 1.0), maze, p);

    // Straight-line re-integration of the same recurrence.
    double w = 0.0, x = 20.0;
    for (int i = 0; i < 100; ++i) {
        w += p.dt * (p.wheel_accel - p.drag * w);
        x += p.dt * p.wheel_radius * w;  // both wheels equal, heading 0
    }
    REQUIRE(s.x == Catch::Approx(x).margin(1e-12));
    REQUIRE(s.y == 20.0);  // no lateral drift at heading 0
    REQUIRE(s.heading == 0.0);
    REQUIRE(s.x > 20.0 + 10.0);  // got close to full speed quickly
    REQUIRE(s.w_left == Catch::Approx(p.max_wheel_speed()).epsilon(0.01));
}

TEST_CASE("crawler_step: driving at a wall never enters it") {
    // Wall one cell to the right of the start cell.
    const MazeSpec maze = load_maze(
        "cellsize=1.0\n"
        "#####\n"
        "#.S##\n"
        "#####\n");
    CrawlerState s;
    const auto [sx, sy] = maze.start_position();
    s.x = sx;
    s.y = sy;
    for (int i = 0; i < 200; ++i) {
        s = crawler_step(s, Eigen::Vector2d(1.0, 1.0), maze);
        REQUIRE_FALSE(maze.is_wall_at(s.x, s.y));
    }
    REQUIRE(s.x < 3.0);  // pinned before the wall cell [3,4)
    REQUIRE(s.x > 2.5);  // but it did reach the boundary region
}

TEST_CASE("crawler_step: non-finite action is rejected") {
    const MazeSpec maze = big_open();
    CrawlerState s;
    REQUIRE_THROWS_AS(
        crawler_step(s, Eigen::Vector2d(std::numeric_limits<double>::quiet_NaN(), 0.0), maze),
        NumericError);
}

TEST_CASE("observe: fixed ordering and partition") {
    CrawlerState s;
    s.x = 1.0;
    s.y = 2.0;
    s.heading = 0.0;
    const Eigen::VectorXd obs = crawler_observe(s);
    REQUIRE(obs.size() == 5);
    REQUIRE(obs(0) == 0.0);
    REQUIRE(obs(1) == 0.0);
    REQUIRE(obs(2) == 1.0);
    REQUIRE(obs(3) == 2.0);
    REQUIRE(obs(4) == 0.0);

    const ObservationPartition part = crawler_partition();
    part.validate(5);
    REQUIRE(part.proprio_idx == std::vector<int>{0, 1});
    REQUIRE(part.external_idx == std::vector<int>{2, 3, 4});
    REQUIRE(part.interest_idx == std::vector<int>{2, 3});

    const Eigen::VectorXd s_h = project(obs, part.interest_idx);
    REQUIRE(s_h(0) == 1.0);
    REQUIRE(s_h(1) == 2.0);
    const Eigen::VectorXd s_l = project(obs, part.proprio_idx);
    REQUIRE(s_l.isZero(0.0));
}

TEST_CASE("observation partition round-trips the full observation") {
    CrawlerState s{1.5, -0.5, 0.7, 2.0, -1.0};
    const Eigen::VectorXd obs = crawler_observe(s);
    const ObservationPartition part = crawler_partition();
    Eigen::VectorXd rebuilt(5);
    const Eigen::VectorXd s_l = project(obs, part.proprio_idx);
    const Eigen::VectorXd s_m = project(obs, part.external_idx);
    for (std::size_t k = 0; k < part.proprio_idx.size(); ++k)
        rebuilt(part.proprio_idx[k]) = s_l(static_cast<int>(k));
    for (std::size_t k = 0; k < part.external_idx.size(); ++k)
        rebuilt(part.external_idx[k]) = s_m(static_cast<int>(k));
    REQUIRE(rebuilt == obs);
}

TEST_CASE("load_maze: smallest valid maze") {
    const MazeSpec maze = load_maze(kTinyMaze);
    REQUIRE(maze.rows == 3);
    REQUIRE(maze.cols == 3);
    REQUIRE(maze.free_cell_count() == 1);
    REQUIRE(maze.at(1, 1) == Cell::Start);
}

TEST_CASE("load_maze: rejects malformed inputs") {
    REQUIRE_THROWS_AS(load_maze("cellsize=1.0\n###\n#SS\n###\n"), ParseError);  // border break
    REQUIRE_THROWS_AS(load_maze("cellsize=1.0\n#####\n#S.S#\n#####\n"), ParseError);  // two starts
    REQUIRE_THROWS_AS(load_maze("cellsize=1.0\n###\n#.#\n###\n"), ParseError);  // no start
    REQUIRE_THROWS_AS(load_maze("cellsize=1.0\n###\n#S##\n###\n"), ParseError);  // ragged
    REQUIRE_THROWS_AS(load_maze("###\n#S#\n###\n"), ParseError);  // missing header
    try {
        load_maze("cellsize=1.0\n#####\n#SX.#\n#####\n");
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        REQUIRE(e.line() == 3);
        REQUIRE(e.column() == 3);
    }
}

TEST_CASE("load_maze: bundled cross maze has three goal candidates") {
    const MazeSpec maze = load_maze_file(maze_path("cross.maze"));
    REQUIRE(maze.goal_positions().size() == 3);
    REQUIRE(maze.name == "cross");
}

TEST_CASE("load_maze: bundled skull maze has four goal candidates") {
    const MazeSpec maze = load_maze_file(maze_path("skull.maze"));
    REQUIRE(maze.goal_positions().size() == 4);
}

TEST_CASE("reset_orientation: zeroes wheels in place, idempotently") {
    CrawlerState s{3.0, 4.0, 1.2, 2.5, -1.5};
    const CrawlerState r = reset_orientation(s);
    REQUIRE(r.x == 3.0);
    REQUIRE(r.y == 4.0);
    REQUIRE(r.heading == 1.2);
    REQUIRE(r.w_left == 0.0);
    REQUIRE(r.w_right == 0.0);
    const CrawlerState r2 = reset_orientation(r);
    REQUIRE(r2.x == r.x);
    REQUIRE(r2.w_left == r.w_left);
}

TEST_CASE("crawler env: no teleports under random actions") {
    CrawlerEnv env(load_maze_file(maze_path("gap.maze")));
    Rng rng(42);
    Eigen::VectorXd prev = env.reset(rng);
    const double bound = env.max_step_displacement() + 1e-12;
    for (int t = 0; t < 500; ++t) {
        Eigen::VectorXd action(2);
        action << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
        const Eigen::VectorXd obs = env.step(action);
        const double dx = obs(2) - prev(2), dy = obs(3) - prev(3);
        REQUIRE(std::hypot(dx, dy) <= bound);
        REQUIRE_FALSE(env.maze()->is_wall_at(obs(2), obs(3)));
        prev = obs;
    }
}

TEST_CASE("crawler env: deterministic trace for a fixed seed") {
    const MazeSpec maze = load_maze_file(maze_path("open.maze"));
    CrawlerEnv a(maze), b(maze);
    Rng ra(7), rb(7);
    a.reset(ra);
    b.reset(rb);
    Rng actions_a(11), actions_b(11);
    for (int t = 0; t < 200; ++t) {
        Eigen::VectorXd ua(2), ub(2);
        ua << actions_a.uniform(-1.0, 1.0), actions_a.uniform(-1.0, 1.0);
        ub << actions_b.uniform(-1.0, 1.0), actions_b.uniform(-1.0, 1.0);
        REQUIRE(a.step(ua) == b.step(ub));
    }
}

TEST_CASE("linear point env: action is a clipped displacement") {
    LinearPointEnv env(10.0, 10.0);
    env.set_position({5.0, 5.0});
    Eigen::VectorXd a(2);
    a << 0.25, -2.0;  // second component clips to -1
    const Eigen::VectorXd obs = env.step(a);
    REQUIRE(obs(0) == 5.25);
    REQUIRE(obs(1) == 4.0);
    REQUIRE(env.policy_feature_dim() == 0);
    REQUIRE(env.partition().proprio_idx.empty());
}

TEST_CASE("linear point env: maze collisions cancel displacement") {
    LinearPointEnv env(load_maze_file(maze_path("gap.maze")));
    env.reset_to_start();
    const Eigen::VectorXd before = env.observation();
    Eigen::VectorXd up(2);
    up << 0.0, 1.0;  // start sits under the top border wall
    const Eigen::VectorXd after = env.step(up);
    REQUIRE(after == before);
}

TEST_CASE("crawler env: spawn margin keeps resets away from walls") {
    CrawlerEnv env(make_open_arena(20, 20), CrawlerParams{}, 5.0);
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const Eigen::VectorXd obs = env.reset(rng);
        REQUIRE(obs(2) >= 5.0);
        REQUIRE(obs(2) <= 17.0);
        REQUIRE(obs(3) >= 5.0);
        REQUIRE(obs(3) <= 17.0);
    }
}
