#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hiernav/errors.hpp"
#include "hiernav/graph.hpp"
#include "hiernav/maze.hpp"
#include "hiernav/orchestrator.hpp"

namespace hiernav {

// Population mean and standard deviation.
inline std::pair<double, double> mean_std(const std::vector<double>& values) {
    if (values.empty()) throw ContractViolation("mean_std: empty sample");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    return {mean, std::sqrt(var)};
}

// "20704.8 (6043.8)"-style cell used by the benchmark table.
inline std::string format_mean_std(double mean, double stddev) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f (%.1f)", mean, stddev);
    return buf;
}

inline std::string format_mean_std(const std::vector<double>& values) {
    const auto [m, s] = mean_std(values);
    return format_mean_std(m, s);
}

inline void write_trace_csv(const std::filesystem::path& path, const EpisodeTrace& trace) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << "step,x,y,phi,wL,wR,behavior_idx,subgoal_x,subgoal_y\n";
    char line[256];
    for (const TraceStep& s : trace.steps) {
        std::snprintf(line, sizeof(line), "%ld,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%.9g,%.9g\n", s.step,
                      s.state[0], s.state[1], s.state[2], s.state[3], s.state[4], s.behavior_idx,
                      s.subgoal(0), s.subgoal(1));
        f << line;
    }
}

struct TraceRow {
    long step = 0;
    double x = 0, y = 0, phi = 0, wL = 0, wR = 0;
    int behavior_idx = -1;
    double subgoal_x = 0, subgoal_y = 0;
};

inline std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open " + path.string());
    std::vector<TraceRow> rows;
    std::string line;
    if (!std::getline(f, line)) return rows;  // header
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        TraceRow r;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream is(line);
        if (!(is >> r.step >> r.x >> r.y >> r.phi >> r.wL >> r.wR >> r.behavior_idx >>
              r.subgoal_x >> r.subgoal_y))
            throw ParseError("trace csv: malformed row: " + line);
        rows.push_back(r);
    }
    return rows;
}

inline void write_metrics_csv(const std::filesystem::path& path,
                              const std::vector<RunMetrics>& metrics) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << "run_id,seed,maze,mode,total_steps,success,replans,subgoal_timeouts\n";
    for (const RunMetrics& m : metrics) {
        f << m.run_id << ',' << m.seed << ',' << m.maze << ',' << m.mode << ',' << m.total_steps
          << ',' << (m.success ? 1 : 0) << ',' << m.replans << ',' << m.subgoal_timeouts << "\n";
    }
}

// ---------------------------------------------------------------------------
// SVG maps: maze walls, node/edge statuses, trajectory overlay.
// ---------------------------------------------------------------------------

namespace detail {

class SvgWriter {
public:
    SvgWriter(double world_w, double world_h, double scale = 40.0)
        : scale_(scale), h_(world_h * scale) {
        os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << world_w * scale
            << "\" height=\"" << h_ << "\" viewBox=\"0 0 " << world_w * scale << " " << h_
            << "\">\n";
        os_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    double sx(double x) const { return x * scale_; }
    double sy(double y) const { return h_ - y * scale_; }  // world y up, svg y down

    void rect(double x, double y, double w, double h, const std::string& fill) {
        os_ << "<rect x=\"" << sx(x) << "\" y=\"" << sy(y + h) << "\" width=\"" << w * scale_
            << "\" height=\"" << h * scale_ << "\" fill=\"" << fill << "\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width,
              const std::string& extra = "") {
        os_ << "<line x1=\"" << sx(x1) << "\" y1=\"" << sy(y1) << "\" x2=\"" << sx(x2)
            << "\" y2=\"" << sy(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << width
            << "\" " << extra << "/>\n";
    }

    void circle(double x, double y, double r_px, const std::string& fill,
                const std::string& stroke = "none") {
        os_ << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"" << r_px
            << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                  double width) {
        if (pts.size() < 2) return;
        os_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width
            << "\" stroke-opacity=\"0.85\" points=\"";
        for (const auto& [x, y] : pts) os_ << sx(x) << "," << sy(y) << " ";
        os_ << "\"/>\n";
    }

    std::string finish() {
        os_ << "</svg>\n";
        return os_.str();
    }

private:
    double scale_;
    double h_;
    std::ostringstream os_;
};

}  // namespace detail

inline void write_graph_svg(const std::filesystem::path& path, const MazeSpec& maze,
                            const NavGraph& graph, const std::vector<TraceRow>& trajectory,
                            long step_limit = -1) {
    detail::SvgWriter svg(maze.width(), maze.height());
    for (int r = 0; r < maze.rows; ++r) {
        for (int c = 0; c < maze.cols; ++c) {
            const double x = c * maze.cell_size, y = r * maze.cell_size;
            switch (maze.at(r, c)) {
                case Cell::Wall: svg.rect(x, y, maze.cell_size, maze.cell_size, "#4a4a4a"); break;
                case Cell::GoalCandidate:
                    svg.rect(x, y, maze.cell_size, maze.cell_size, "#ffe9a8");
                    break;
                case Cell::Start: svg.rect(x, y, maze.cell_size, maze.cell_size, "#dcebff"); break;
                case Cell::Free: break;
            }
        }
    }
    for (int r = 0; r < graph.rows(); ++r) {
        for (int c = 0; c < graph.cols(); ++c) {
            const NodeId a{r, c};
            for (const NodeId b : {NodeId{r, c + 1}, NodeId{r + 1, c}}) {
                if (!graph.in_bounds(b)) continue;
                const auto pa = graph.node_position(a);
                const auto pb = graph.node_position(b);
                switch (graph.edge_status(a, b)) {
                    case EdgeStatus::Unknown:
                        svg.line(pa(0), pa(1), pb(0), pb(1), "#e0e0e0", 1.0);
                        break;
                    case EdgeStatus::Feasible:
                        svg.line(pa(0), pa(1), pb(0), pb(1), "#2a9d3a", 3.0);
                        break;
                    case EdgeStatus::Blocked:
                        svg.line(pa(0), pa(1), pb(0), pb(1), "#cc3333", 2.0,
                                 "stroke-dasharray=\"6,4\"");
                        break;
                }
            }
        }
    }
    for (int r = 0; r < graph.rows(); ++r) {
        for (int c = 0; c < graph.cols(); ++c) {
            const NodeId n{r, c};
            const auto p = graph.node_position(n);
            if (graph.visited(n))
                svg.circle(p(0), p(1), 4.0, "#1f6fb5");
            else
                svg.circle(p(0), p(1), 1.8, "#c0c0c0");
        }
    }
    std::vector<std::pair<double, double>> pts;
    for (const TraceRow& row : trajectory) {
        if (step_limit >= 0 && row.step > step_limit) break;
        pts.emplace_back(row.x, row.y);
    }
    svg.polyline(pts, "#e07b00", 1.6);

    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << svg.finish();
}

// True when some feasible edge touches a wall cell; exploration soundness
// checks want this to stay false.
inline bool any_feasible_edge_crosses_wall(const NavGraph& graph, const MazeSpec& maze) {
    for (int r = 0; r < graph.rows(); ++r) {
        for (int c = 0; c < graph.cols(); ++c) {
            const NodeId a{r, c};
            for (const NodeId b : {NodeId{r, c + 1}, NodeId{r + 1, c}}) {
                if (!graph.in_bounds(b)) continue;
                if (graph.edge_status(a, b) != EdgeStatus::Feasible) continue;
                const auto pa = graph.node_position(a);
                const auto pb = graph.node_position(b);
                // 4-connected edges cross exactly the two endpoint cells.
                if (maze.is_wall_at(pa(0), pa(1)) || maze.is_wall_at(pb(0), pb(1))) return true;
                const auto mid = 0.5 * (pa + pb);
                if (maze.is_wall_at(mid(0), mid(1))) return true;
            }
        }
    }
    return false;
}

struct ExplorationCurvePoint {
    long step = 0;
    int visited = 0;
    int feasible = 0;
    int blocked = 0;
};

inline void write_exploration_curve_csv(const std::filesystem::path& path,
                                        const std::vector<ExplorationCurvePoint>& points) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << "step,visited_nodes,feasible_edges,blocked_edges\n";
    for (const auto& p : points)
        f << p.step << ',' << p.visited << ',' << p.feasible << ',' << p.blocked << "\n";
}

}  // namespace hiernav
