#pragma once

// A deliberately naive Go rules implementation used as a test oracle. It
// shares no code with the engine: plain vectors, recursive flood fill, and
// superko checked by comparing whole grids as strings.

#include <set>
#include <string>
#include <vector>

namespace oracle {

// '.', 'X' (black), 'O' (white); index = row * n + col, row 0 at the bottom.
struct Position {
    int n = 3;
    std::string grid;
    char to_move = 'X';
    int passes = 0;
    int captured_by_black = 0;
    int captured_by_white = 0;
    std::set<std::string> seen;

    explicit Position(int size) : n(size), grid(static_cast<std::size_t>(size * size), '.') { seen.insert(grid); }

    bool over() const { return passes >= 2; }
};

inline char other(char c) { return c == 'X' ? 'O' : 'X'; }

inline std::vector<int> neighbours(int n, int i) {
    std::vector<int> out;
    const int r = i / n;
    const int c = i % n;
    if (r > 0) out.push_back(i - n);
    if (r < n - 1) out.push_back(i + n);
    if (c > 0) out.push_back(i - 1);
    if (c < n - 1) out.push_back(i + 1);
    return out;
}

inline void collect(const std::string& g, int n, int i, std::vector<bool>& mark, std::vector<int>& group) {
    mark[static_cast<std::size_t>(i)] = true;
    group.push_back(i);
    for (int j : neighbours(n, i)) {
        if (!mark[static_cast<std::size_t>(j)] && g[static_cast<std::size_t>(j)] == g[static_cast<std::size_t>(i)]) {
            collect(g, n, j, mark, group);
        }
    }
}

inline int liberties(const std::string& g, int n, const std::vector<int>& group) {
    std::set<int> libs;
    for (int i : group) {
        for (int j : neighbours(n, i)) {
            if (g[static_cast<std::size_t>(j)] == '.') libs.insert(j);
        }
    }
    return static_cast<int>(libs.size());
}

// Places a stone and resolves captures; returns the number captured, or -1
// when the result is suicide.
inline int place(std::string& g, int n, int i, char c) {
    g[static_cast<std::size_t>(i)] = c;
    int taken = 0;
    for (int j : neighbours(n, i)) {
        if (g[static_cast<std::size_t>(j)] != other(c)) continue;
        std::vector<bool> mark(g.size(), false);
        std::vector<int> group;
        collect(g, n, j, mark, group);
        if (liberties(g, n, group) == 0) {
            for (int k : group) g[static_cast<std::size_t>(k)] = '.';
            taken += static_cast<int>(group.size());
        }
    }
    std::vector<bool> mark(g.size(), false);
    std::vector<int> own;
    collect(g, n, i, mark, own);
    if (liberties(g, n, own) == 0) return -1;
    return taken;
}

// -1 stands for pass.
inline bool legal(const Position& p, int i) {
    if (p.over()) return false;
    if (i < 0) return true;
    if (p.grid[static_cast<std::size_t>(i)] != '.') return false;
    std::string g = p.grid;
    if (place(g, p.n, i, p.to_move) < 0) return false;
    return p.seen.count(g) == 0;
}

inline std::vector<int> legal_moves(const Position& p) {
    std::vector<int> out;
    for (int i = 0; i < p.n * p.n; ++i) {
        if (legal(p, i)) out.push_back(i);
    }
    out.push_back(-1);
    return out;
}

inline Position apply(const Position& p, int i) {
    Position q = p;
    if (i < 0) {
        ++q.passes;
    } else {
        const int taken = place(q.grid, q.n, i, q.to_move);
        (q.to_move == 'X' ? q.captured_by_black : q.captured_by_white) += taken;
        q.passes = 0;
        q.seen.insert(q.grid);
    }
    q.to_move = other(q.to_move);
    return q;
}

struct Score {
    int black = 0;
    int white = 0;
};

// Area scoring: stones plus empty regions that reach only one colour.
inline Score area(const std::string& g, int n) {
    Score s;
    std::vector<bool> mark(g.size(), false);
    for (int i = 0; i < n * n; ++i) {
        const char v = g[static_cast<std::size_t>(i)];
        if (v == 'X') ++s.black;
        if (v == 'O') ++s.white;
        if (v != '.' || mark[static_cast<std::size_t>(i)]) continue;
        std::vector<int> region;
        collect(g, n, i, mark, region);
        bool b = false;
        bool w = false;
        for (int k : region) {
            for (int j : neighbours(n, k)) {
                b = b || g[static_cast<std::size_t>(j)] == 'X';
                w = w || g[static_cast<std::size_t>(j)] == 'O';
            }
        }
        if (b && !w) s.black += static_cast<int>(region.size());
        if (w && !b) s.white += static_cast<int>(region.size());
    }
    return s;
}

}  // namespace oracle
