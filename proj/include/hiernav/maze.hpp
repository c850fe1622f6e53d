#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hiernav/errors.hpp"

namespace hiernav {

enum class Cell : unsigned char { Wall, Free, Start, GoalCandidate };

// Axis-aligned cell maze. Rows are stored bottom-up so that cell (r, c)
// occupies [c, c+1) x [r, r+1) in cell units, with y increasing upward.
struct MazeSpec {
    int rows = 0;
    int cols = 0;
    double cell_size = 1.0;
    std::string name;
    std::vector<Cell> cells;  // row-major, row 0 at the bottom

    Cell at(int r, int c) const { return cells[static_cast<std::size_t>(r) * cols + c]; }

    bool in_grid(int r, int c) const { return r >= 0 && r < rows && c >= 0 && c < cols; }

    bool is_wall_cell(int r, int c) const { return !in_grid(r, c) || at(r, c) == Cell::Wall; }

    // Cell containing a point; points outside the grid count as wall.
    std::pair<int, int> cell_of(double x, double y) const {
        return {static_cast<int>(std::floor(y / cell_size)),
                static_cast<int>(std::floor(x / cell_size))};
    }

    bool is_wall_at(double x, double y) const {
        auto [r, c] = cell_of(x, y);
        return is_wall_cell(r, c);
    }

    double width() const { return cols * cell_size; }
    double height() const { return rows * cell_size; }

    std::pair<double, double> cell_center(int r, int c) const {
        return {(c + 0.5) * cell_size, (r + 0.5) * cell_size};
    }

    std::pair<double, double> start_position() const {
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                if (at(r, c) == Cell::Start) return cell_center(r, c);
        throw ContractViolation("maze has no start cell");
    }

    std::vector<std::pair<double, double>> goal_positions() const {
        std::vector<std::pair<double, double>> out;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                if (at(r, c) == Cell::GoalCandidate) out.push_back(cell_center(r, c));
        return out;
    }

    int free_cell_count() const {
        int n = 0;
        for (Cell cell : cells) n += cell != Cell::Wall;
        return n;
    }

    std::string to_text() const {
        std::ostringstream os;
        os << "cellsize=" << cell_size << "\n";
        for (int r = rows - 1; r >= 0; --r) {
            for (int c = 0; c < cols; ++c) {
                switch (at(r, c)) {
                    case Cell::Wall: os << '#'; break;
                    case Cell::Free: os << '.'; break;
                    case Cell::Start: os << 'S'; break;
                    case Cell::GoalCandidate: os << 'G'; break;
                }
            }
            os << "\n";
        }
        return os.str();
    }
};

// Parses the maze text format: a "cellsize=<float>" header line followed by a
// rectangular character grid of '#' (wall), '.' (free), 'S' (start, exactly
// one) and 'G' (goal candidate). The first grid line is the top of the maze.
inline MazeSpec load_maze(const std::string& text, const std::string& name = "") {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("maze: empty input", 1);
    if (line.rfind("cellsize=", 0) != 0)
        throw ParseError("maze: first line must be cellsize=<float>", 1);
    MazeSpec maze;
    maze.name = name;
    try {
        std::size_t used = 0;
        maze.cell_size = std::stod(line.substr(9), &used);
        if (used != line.size() - 9) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw ParseError("maze: invalid cellsize value", 1);
    }
    if (!(maze.cell_size > 0.0)) throw ParseError("maze: cellsize must be positive", 1);

    std::vector<std::string> grid_lines;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        grid_lines.push_back(line);
        if (line.size() != grid_lines.front().size())
            throw ParseError("maze: ragged grid row", line_no);
    }
    if (grid_lines.size() < 3 || grid_lines.front().size() < 3)
        throw ParseError("maze: grid must be at least 3x3", line_no);

    maze.rows = static_cast<int>(grid_lines.size());
    maze.cols = static_cast<int>(grid_lines.front().size());
    maze.cells.assign(static_cast<std::size_t>(maze.rows) * maze.cols, Cell::Wall);
    int start_count = 0;
    for (int text_row = 0; text_row < maze.rows; ++text_row) {
        const int r = maze.rows - 1 - text_row;
        const int text_line = text_row + 2;  // header occupies line 1
        for (int c = 0; c < maze.cols; ++c) {
            Cell cell;
            switch (grid_lines[text_row][static_cast<std::size_t>(c)]) {
                case '#': cell = Cell::Wall; break;
                case '.': cell = Cell::Free; break;
                case 'S': cell = Cell::Start; ++start_count; break;
                case 'G': cell = Cell::GoalCandidate; break;
                default:
                    throw ParseError("maze: unknown character '" +
                                         std::string(1, grid_lines[text_row][c]) + "'",
                                     text_line, c + 1);
            }
            if ((r == 0 || r == maze.rows - 1 || c == 0 || c == maze.cols - 1) &&
                cell != Cell::Wall)
                throw ParseError("maze: border cells must be walls", text_line, c + 1);
            maze.cells[static_cast<std::size_t>(r) * maze.cols + c] = cell;
        }
    }
    if (start_count == 0) throw ParseError("maze: no start cell");
    if (start_count > 1) throw ParseError("maze: multiple start cells");
    if (maze.free_cell_count() == 0) throw ParseError("maze: no free cells");
    return maze;
}

inline MazeSpec load_maze_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("maze: cannot open file " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    std::string name = path;
    if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
    if (auto dot = name.find_last_of('.'); dot != std::string::npos) name = name.substr(0, dot);
    return load_maze(buf.str(), name);
}

// Wall border around free_x x free_y open cells, start in the middle. Used as
// the obstacle-free training range for behaviors.
inline MazeSpec make_open_arena(int free_x, int free_y, double cell_size = 1.0) {
    MazeSpec maze;
    maze.rows = free_y + 2;
    maze.cols = free_x + 2;
    maze.cell_size = cell_size;
    maze.name = "arena";
    maze.cells.assign(static_cast<std::size_t>(maze.rows) * maze.cols, Cell::Free);
    for (int r = 0; r < maze.rows; ++r)
        for (int c = 0; c < maze.cols; ++c)
            if (r == 0 || r == maze.rows - 1 || c == 0 || c == maze.cols - 1)
                maze.cells[static_cast<std::size_t>(r) * maze.cols + c] = Cell::Wall;
    maze.cells[static_cast<std::size_t>(maze.rows / 2) * maze.cols + maze.cols / 2] = Cell::Start;
    return maze;
}

}  // namespace hiernav
