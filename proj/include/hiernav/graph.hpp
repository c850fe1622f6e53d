#pragma once

#include <Eigen/Core>
#include <cmath>
#include <compare>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hiernav/errors.hpp"
#include "hiernav/maze.hpp"

namespace hiernav {

enum class EdgeStatus : unsigned char { Unknown, Feasible, Blocked };

inline std::string edge_status_name(EdgeStatus s) {
    switch (s) {
        case EdgeStatus::Unknown: return "unknown";
        case EdgeStatus::Feasible: return "feasible";
        case EdgeStatus::Blocked: return "blocked";
    }
    throw Error("unknown edge status");
}

inline EdgeStatus edge_status_from_name(const std::string& name) {
    if (name == "unknown") return EdgeStatus::Unknown;
    if (name == "feasible") return EdgeStatus::Feasible;
    if (name == "blocked") return EdgeStatus::Blocked;
    throw ParseError("unknown edge status name: " + name);
}

struct NodeId {
    int r = 0;
    int c = 0;
    auto operator<=>(const NodeId&) const = default;
};

// Lattice of candidate nodes over the dimensions of interest with visitation
// flags and per-edge feasibility learned online. Adjacency is 4-connected.
class NavGraph {
public:
    NavGraph(double x_min, double y_min, double x_max, double y_max, double delta_x,
             double delta_y)
        : x_min_(x_min), y_min_(y_min), delta_x_(delta_x), delta_y_(delta_y) {
        if (!(delta_x > 0.0 && delta_y > 0.0)) throw ContractViolation("grid interval must be positive");
        rows_ = std::max(1, static_cast<int>(std::round((y_max - y_min) / delta_y)));
        cols_ = std::max(1, static_cast<int>(std::round((x_max - x_min) / delta_x)));
        visited_.assign(static_cast<std::size_t>(rows_) * cols_, 0);
        h_edges_.assign(static_cast<std::size_t>(rows_) * (cols_ - 1), EdgeStatus::Unknown);
        v_edges_.assign(static_cast<std::size_t>(rows_ - 1) * cols_, EdgeStatus::Unknown);
    }

    static NavGraph for_maze(const MazeSpec& maze, double delta_x = 1.0, double delta_y = 1.0) {
        return NavGraph(0.0, 0.0, maze.width(), maze.height(), delta_x, delta_y);
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int node_count() const { return rows_ * cols_; }
    double delta_x() const { return delta_x_; }
    double delta_y() const { return delta_y_; }

    bool in_bounds(NodeId n) const { return n.r >= 0 && n.r < rows_ && n.c >= 0 && n.c < cols_; }

    Eigen::Vector2d node_position(NodeId n) const {
        check_node(n);
        return {x_min_ + (n.c + 0.5) * delta_x_, y_min_ + (n.r + 0.5) * delta_y_};
    }

    // Nearest lattice node, clamped into bounds. Exact midpoints resolve to
    // the smaller (row, col).
    NodeId associate(const Eigen::Vector2d& s_h) const {
        return {axis_index(s_h(1), y_min_, delta_y_, rows_),
                axis_index(s_h(0), x_min_, delta_x_, cols_)};
    }

    bool visited(NodeId n) const {
        check_node(n);
        return visited_[flat(n)] != 0;
    }

    void mark_visited(NodeId n) {
        check_node(n);
        visited_[flat(n)] = 1;
    }

    int visited_count() const {
        int total = 0;
        for (auto v : visited_) total += v;
        return total;
    }

    bool adjacent(NodeId a, NodeId b) const {
        return std::abs(a.r - b.r) + std::abs(a.c - b.c) == 1;
    }

    std::vector<NodeId> neighbors(NodeId n) const {
        check_node(n);
        std::vector<NodeId> out;
        // (row, col) ascending, so deterministic scans prefer smaller ids.
        const NodeId cand[4] = {{n.r - 1, n.c}, {n.r, n.c - 1}, {n.r, n.c + 1}, {n.r + 1, n.c}};
        for (const NodeId& m : cand)
            if (in_bounds(m)) out.push_back(m);
        return out;
    }

    EdgeStatus edge_status(NodeId a, NodeId b) const { return *edge_slot(a, b); }

    void set_edge_status(NodeId a, NodeId b, EdgeStatus s) { *edge_slot_mut(a, b) = s; }

    // Outcome of one attempted traversal: success makes the edge feasible and
    // the destination visited, failure blocks the edge. Later observations may
    // overwrite either way.
    void record_transition(NodeId from, NodeId to, bool success) {
        if (!adjacent(from, to))
            throw ContractViolation("record_transition: nodes are not lattice-adjacent");
        set_edge_status(from, to, success ? EdgeStatus::Feasible : EdgeStatus::Blocked);
        if (success) mark_visited(to);
    }

    void reset_blocked_edges() {
        for (auto& e : h_edges_)
            if (e == EdgeStatus::Blocked) e = EdgeStatus::Unknown;
        for (auto& e : v_edges_)
            if (e == EdgeStatus::Blocked) e = EdgeStatus::Unknown;
    }

    int edge_count(EdgeStatus s) const {
        int total = 0;
        for (auto e : h_edges_) total += e == s;
        for (auto e : v_edges_) total += e == s;
        return total;
    }

    // Breadth-first shortest path over feasible edges, endpoints included.
    std::optional<std::vector<NodeId>> plan_path(NodeId start, NodeId goal) const {
        check_node(start);
        check_node(goal);
        if (!visited(start)) throw ContractViolation("plan_path: start node must be visited");
        if (start == goal) return std::vector<NodeId>{start};
        std::vector<int> parent(static_cast<std::size_t>(rows_) * cols_, -1);
        std::deque<NodeId> queue{start};
        parent[flat(start)] = static_cast<int>(flat(start));
        while (!queue.empty()) {
            const NodeId cur = queue.front();
            queue.pop_front();
            for (const NodeId& next : neighbors(cur)) {
                if (parent[flat(next)] >= 0 || edge_status(cur, next) != EdgeStatus::Feasible)
                    continue;
                parent[flat(next)] = static_cast<int>(flat(cur));
                if (next == goal) {
                    std::vector<NodeId> path{next};
                    NodeId walk = next;
                    while (walk != start) {
                        walk = unflat(static_cast<std::size_t>(parent[flat(walk)]));
                        path.push_back(walk);
                    }
                    std::reverse(path.begin(), path.end());
                    return path;
                }
                queue.push_back(next);
            }
        }
        return std::nullopt;
    }

    struct ExplorationTarget {
        NodeId node;    // unvisited frontier node to try
        NodeId attach;  // visited neighbor it will be approached from
        int distance;   // feasible-path hops from current to attach, plus one
    };

    // Closest unexplored node reachable from the current position: unvisited,
    // joined to the visited component by a non-blocked edge, ranked by
    // traversal cost (feasible-edge hops to its attach neighbor plus one).
    // Ties prefer the smaller (row, col) node, then the smaller attach.
    std::optional<ExplorationTarget> select_exploration_target(NodeId current) const {
        check_node(current);
        if (!visited(current))
            throw ContractViolation("select_exploration_target: current node must be visited");
        constexpr int kInf = std::numeric_limits<int>::max();
        std::vector<int> dist(static_cast<std::size_t>(rows_) * cols_, kInf);
        std::deque<NodeId> queue{current};
        dist[flat(current)] = 0;
        while (!queue.empty()) {
            const NodeId cur = queue.front();
            queue.pop_front();
            for (const NodeId& next : neighbors(cur)) {
                if (dist[flat(next)] != kInf || edge_status(cur, next) != EdgeStatus::Feasible)
                    continue;
                dist[flat(next)] = dist[flat(cur)] + 1;
                queue.push_back(next);
            }
        }
        std::optional<ExplorationTarget> best;
        for (int r = 0; r < rows_; ++r) {
            for (int c = 0; c < cols_; ++c) {
                const NodeId node{r, c};
                if (visited(node)) continue;
                for (const NodeId& w : neighbors(node)) {
                    if (!visited(w) || dist[flat(w)] == kInf) continue;
                    if (edge_status(w, node) == EdgeStatus::Blocked) continue;
                    const ExplorationTarget cand{node, w, dist[flat(w)] + 1};
                    if (!best || cand.distance < best->distance ||
                        (cand.distance == best->distance &&
                         (cand.node < best->node ||
                          (cand.node == best->node && cand.attach < best->attach))))
                        best = cand;
                }
            }
        }
        return best;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["version"] = 1;
        j["delta"] = delta_x_;
        j["delta_x"] = delta_x_;
        j["delta_y"] = delta_y_;
        j["origin"] = {x_min_, y_min_};
        j["rows"] = rows_;
        j["cols"] = cols_;
        nlohmann::json nodes = nlohmann::json::array();
        for (int r = 0; r < rows_; ++r) {
            for (int c = 0; c < cols_; ++c) {
                const NodeId n{r, c};
                const Eigen::Vector2d p = node_position(n);
                nodes.push_back({{"rc", {r, c}}, {"xy", {p(0), p(1)}}, {"visited", visited(n)}});
            }
        }
        j["nodes"] = std::move(nodes);
        nlohmann::json edges = nlohmann::json::array();
        for (int r = 0; r < rows_; ++r) {
            for (int c = 0; c < cols_; ++c) {
                if (c + 1 < cols_)
                    edges.push_back({{"a", {r, c}},
                                     {"b", {r, c + 1}},
                                     {"status", edge_status_name(edge_status({r, c}, {r, c + 1}))}});
                if (r + 1 < rows_)
                    edges.push_back({{"a", {r, c}},
                                     {"b", {r + 1, c}},
                                     {"status", edge_status_name(edge_status({r, c}, {r + 1, c}))}});
            }
        }
        j["edges"] = std::move(edges);
        return j;
    }

    static NavGraph from_json(const nlohmann::json& j) {
        const double dx = j.at("delta_x").get<double>();
        const double dy = j.at("delta_y").get<double>();
        const int rows = j.at("rows").get<int>();
        const int cols = j.at("cols").get<int>();
        const double x0 = j.at("origin")[0].get<double>();
        const double y0 = j.at("origin")[1].get<double>();
        NavGraph g(x0, y0, x0 + cols * dx, y0 + rows * dy, dx, dy);
        for (const auto& node : j.at("nodes")) {
            if (node.at("visited").get<bool>())
                g.mark_visited({node.at("rc")[0].get<int>(), node.at("rc")[1].get<int>()});
        }
        for (const auto& edge : j.at("edges")) {
            const NodeId a{edge.at("a")[0].get<int>(), edge.at("a")[1].get<int>()};
            const NodeId b{edge.at("b")[0].get<int>(), edge.at("b")[1].get<int>()};
            g.set_edge_status(a, b, edge_status_from_name(edge.at("status").get<std::string>()));
        }
        return g;
    }

private:
    std::size_t flat(NodeId n) const {
        return static_cast<std::size_t>(n.r) * cols_ + static_cast<std::size_t>(n.c);
    }
    NodeId unflat(std::size_t i) const {
        return {static_cast<int>(i) / cols_, static_cast<int>(i) % cols_};
    }

    void check_node(NodeId n) const {
        if (!in_bounds(n))
            throw ContractViolation("graph node (" + std::to_string(n.r) + ", " +
                                    std::to_string(n.c) + ") out of bounds");
    }

    static int axis_index(double value, double origin, double delta, int count) {
        const double u = (value - origin) / delta;
        int i = static_cast<int>(std::floor(u));
        if (u == static_cast<double>(i) && i > 0) --i;  // midpoint tie: smaller index
        return std::clamp(i, 0, count - 1);
    }

    const EdgeStatus* edge_slot(NodeId a, NodeId b) const {
        check_node(a);
        check_node(b);
        if (!adjacent(a, b)) throw ContractViolation("edge query: nodes are not lattice-adjacent");
        if (a.r == b.r) {
            const int c = std::min(a.c, b.c);
            return &h_edges_[static_cast<std::size_t>(a.r) * (cols_ - 1) + c];
        }
        const int r = std::min(a.r, b.r);
        return &v_edges_[static_cast<std::size_t>(r) * cols_ + a.c];
    }
    EdgeStatus* edge_slot_mut(NodeId a, NodeId b) {
        return const_cast<EdgeStatus*>(edge_slot(a, b));
    }

    double x_min_, y_min_;
    double delta_x_, delta_y_;
    int rows_ = 0, cols_ = 0;
    std::vector<unsigned char> visited_;
    std::vector<EdgeStatus> h_edges_;  // (r, c) -- (r, c+1)
    std::vector<EdgeStatus> v_edges_;  // (r, c) -- (r+1, c)
};

enum class GoalMode { Explore, Reach };

// Explore mode proposes the closest frontier node (or nothing when done);
// reach mode snaps the requested target to its lattice node.
inline std::optional<NodeId> select_goal(const NavGraph& g, NodeId current, GoalMode mode,
                                         const std::optional<Eigen::Vector2d>& target = {}) {
    if (mode == GoalMode::Explore) {
        const auto t = g.select_exploration_target(current);
        if (!t) return std::nullopt;
        return t->node;
    }
    if (!target) throw ContractViolation("select_goal: reach mode needs a target");
    return g.associate(*target);
}

}  // namespace hiernav
