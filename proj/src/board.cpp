#include "parago/board.hpp"

#include <algorithm>
#include <bitset>
#include <cctype>
#include <random>
#include <sstream>

namespace parago {

namespace {

constexpr std::string_view kColumnLetters = "ABCDEFGHJKLMNOPQRST";

struct ZobristTable {
    // [cell][0 = black, 1 = white]
    std::array<std::array<std::uint64_t, 2>, (Board::kMaxSize + 2) * (Board::kMaxSize + 2)> keys{};

    ZobristTable() {
        std::mt19937_64 gen(0x9e3779b97f4a7c15ULL);
        for (auto& k : keys) {
            k[0] = gen();
            k[1] = gen();
        }
    }
};

const ZobristTable& zobrist() {
    static const ZobristTable table;
    return table;
}

std::uint64_t key(int idx, Color c) {
    return zobrist().keys[static_cast<std::size_t>(idx)][c == Color::White ? 1 : 0];
}

constexpr int kStride = Board::kMaxSize + 2;
constexpr std::array<int, 4> kNeighbours{-kStride, -1, 1, kStride};
constexpr std::array<int, 4> kDiagonals{-kStride - 1, -kStride + 1, kStride - 1, kStride + 1};

using CellSet = std::bitset<kStride * kStride>;

std::array<int, 2> bloom_bits(std::uint64_t h) {
    return {static_cast<int>(h & 1023), static_cast<int>((h >> 20) & 1023)};
}

}  // namespace

char color_letter(Color c) {
    switch (c) {
        case Color::Black: return 'B';
        case Color::White: return 'W';
        default: return '.';
    }
}

std::string to_vertex(Move m, int board_size) {
    if (m.is_pass()) return "pass";
    if (m.point.col < 0 || m.point.col >= board_size || m.point.row < 0 ||
        m.point.row >= board_size) {
        throw std::invalid_argument("vertex off board");
    }
    return std::string(1, kColumnLetters[static_cast<std::size_t>(m.point.col)]) +
           std::to_string(m.point.row + 1);
}

Move parse_vertex(std::string_view text, int board_size) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
    if (s == "PASS") return Move::pass();
    if (s.size() < 2 || s.size() > 3) throw std::invalid_argument("invalid vertex: " + std::string(text));
    auto col = kColumnLetters.find(s[0]);
    if (col == std::string_view::npos) throw std::invalid_argument("invalid vertex: " + std::string(text));
    int row = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            throw std::invalid_argument("invalid vertex: " + std::string(text));
        }
        row = row * 10 + (s[i] - '0');
    }
    if (row < 1 || row > board_size || static_cast<int>(col) >= board_size) {
        throw std::invalid_argument("vertex off board: " + std::string(text));
    }
    return Move::play(row - 1, static_cast<int>(col));
}

std::string_view to_string(MoveError e) {
    switch (e) {
        case MoveError::None: return "legal";
        case MoveError::Occupied: return "occupied";
        case MoveError::Suicide: return "suicide";
        case MoveError::Superko: return "superko";
        case MoveError::Finished: return "game finished";
        case MoveError::OffBoard: return "off board";
    }
    return "unknown";
}

std::string result_string(const GameResult& r) {
    if (r.winner == Winner::Draw) return "0";
    std::ostringstream out;
    out << (r.winner == Winner::Black ? "B+" : "W+") << (r.margin < 0 ? -r.margin : r.margin);
    return out.str();
}

Board::Board(int size) : size_(size) {
    if (size < kMinSize || size > kMaxSize) {
        throw std::invalid_argument("board size must be in [2, 19]");
    }
    cells_.fill(kBorder);
    for (int r = 0; r < size_; ++r) {
        for (int c = 0; c < size_; ++c) cells_[static_cast<std::size_t>(index({r, c}))] = 0;
    }
    history_.reserve(static_cast<std::size_t>(size_ * size_ * 2));
    record_position();
}

Board Board::from_rows(const std::vector<std::string>& rows, Color to_move) {
    const int n = static_cast<int>(rows.size());
    Board b(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != n) {
            throw std::invalid_argument("diagram must be square");
        }
        for (int c = 0; c < n; ++c) {
            const char ch = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
            Color col = ch == 'X' ? Color::Black : ch == 'O' ? Color::White : Color::Empty;
            if (col == Color::Empty && ch != '.') throw std::invalid_argument("bad diagram cell");
            b.cells_[static_cast<std::size_t>(index({n - 1 - i, c}))] = static_cast<std::uint8_t>(col);
        }
    }
    b.to_move_ = to_move;
    b.hash_ = b.compute_hash();
    b.history_.clear();
    b.bloom_.fill(0);
    b.record_position();
    return b;
}

void Board::set_to_move(Color c) {
    if (c == Color::Empty) throw std::invalid_argument("side to move must be a color");
    to_move_ = c;
}

bool Board::seen_position(std::uint64_t h) const {
    for (int bit : bloom_bits(h)) {
        if ((bloom_[static_cast<std::size_t>(bit >> 6)] & (1ULL << (bit & 63))) == 0) return false;
    }
    return std::find(history_.begin(), history_.end(), h) != history_.end();
}

int Board::stone_count(Color c) const {
    int n = 0;
    for (int r = 0; r < size_; ++r) {
        for (int col = 0; col < size_; ++col) n += at(r, col) == c ? 1 : 0;
    }
    return n;
}

bool Board::has_liberty_except(int start, int except) const {
    const std::uint8_t colour = cells_[static_cast<std::size_t>(start)];
    CellSet seen;
    std::array<int, kCells> stack;
    int top = 0;
    stack[static_cast<std::size_t>(top++)] = start;
    seen.set(static_cast<std::size_t>(start));
    while (top > 0) {
        const int cur = stack[static_cast<std::size_t>(--top)];
        for (int d : kNeighbours) {
            const int n = cur + d;
            const std::uint8_t v = cells_[static_cast<std::size_t>(n)];
            if (v == 0) {
                if (n != except) return true;
            } else if (v == colour && !seen.test(static_cast<std::size_t>(n))) {
                seen.set(static_cast<std::size_t>(n));
                stack[static_cast<std::size_t>(top++)] = n;
            }
        }
    }
    return false;
}

Board::Analysis Board::analyse(int idx, Color c) const {
    Analysis a;
    if (cells_[static_cast<std::size_t>(idx)] != 0) {
        a.error = MoveError::Occupied;
        return a;
    }
    const auto own = static_cast<std::uint8_t>(c);
    const auto enemy = static_cast<std::uint8_t>(opponent(c));
    bool liberty = false;
    std::uint64_t h = hash_ ^ key(idx, c);
    CellSet captured;
    for (int d : kNeighbours) {
        const int n = idx + d;
        const std::uint8_t v = cells_[static_cast<std::size_t>(n)];
        if (v == 0) {
            liberty = true;
        } else if (v == own) {
            if (!liberty && has_liberty_except(n, idx)) liberty = true;
        } else if (v == enemy && !captured.test(static_cast<std::size_t>(n)) &&
                   !has_liberty_except(n, idx)) {
            a.capture_roots[static_cast<std::size_t>(a.capture_root_count++)] = n;
            // Collect the group so that a second neighbour in it is skipped.
            std::array<int, kCells> stack;
            int top = 0;
            stack[static_cast<std::size_t>(top++)] = n;
            captured.set(static_cast<std::size_t>(n));
            while (top > 0) {
                const int cur = stack[static_cast<std::size_t>(--top)];
                h ^= key(cur, opponent(c));
                ++a.captured;
                for (int dd : kNeighbours) {
                    const int m = cur + dd;
                    if (cells_[static_cast<std::size_t>(m)] == enemy && !captured.test(static_cast<std::size_t>(m))) {
                        captured.set(static_cast<std::size_t>(m));
                        stack[static_cast<std::size_t>(top++)] = m;
                    }
                }
            }
        }
    }
    if (a.captured == 0 && !liberty) {
        a.error = MoveError::Suicide;
        return a;
    }
    if (seen_position(h)) {
        a.error = MoveError::Superko;
        return a;
    }
    a.new_hash = h;
    return a;
}

MoveError Board::check(Move m) const {
    if (game_over()) return MoveError::Finished;
    if (m.is_pass()) return MoveError::None;
    if (!on_board(m.point)) return MoveError::OffBoard;
    return analyse(index(m.point), to_move_).error;
}

std::vector<Move> Board::legal_moves() const {
    if (game_over()) throw GameFinished();
    std::vector<Move> moves;
    moves.reserve(static_cast<std::size_t>(size_ * size_ + 1));
    for (int r = 0; r < size_; ++r) {
        for (int c = 0; c < size_; ++c) {
            if (analyse(index({r, c}), to_move_).error == MoveError::None) moves.push_back(Move::play(r, c));
        }
    }
    moves.push_back(Move::pass());
    return moves;
}

int Board::remove_group(int start) {
    const std::uint8_t colour = cells_[static_cast<std::size_t>(start)];
    std::array<int, kCells> stack;
    int top = 0;
    int removed = 0;
    stack[static_cast<std::size_t>(top++)] = start;
    cells_[static_cast<std::size_t>(start)] = 0;
    while (top > 0) {
        const int cur = stack[static_cast<std::size_t>(--top)];
        ++removed;
        for (int d : kNeighbours) {
            const int n = cur + d;
            if (cells_[static_cast<std::size_t>(n)] == colour) {
                cells_[static_cast<std::size_t>(n)] = 0;
                stack[static_cast<std::size_t>(top++)] = n;
            }
        }
    }
    return removed;
}

void Board::play(Move m) {
    if (game_over()) throw IllegalMove(MoveError::Finished, "illegal move: game finished");
    if (m.is_pass()) {
        ++passes_;
        ++moves_played_;
        to_move_ = opponent(to_move_);
        return;
    }
    if (!on_board(m.point)) throw IllegalMove(MoveError::OffBoard, "illegal move: off board");
    const int idx = index(m.point);
    const Analysis a = analyse(idx, to_move_);
    if (a.error != MoveError::None) {
        throw IllegalMove(a.error, "illegal move: " + std::string(parago::to_string(a.error)));
    }
    cells_[static_cast<std::size_t>(idx)] = static_cast<std::uint8_t>(to_move_);
    int removed = 0;
    for (int i = 0; i < a.capture_root_count; ++i) {
        const int root = a.capture_roots[static_cast<std::size_t>(i)];
        if (cells_[static_cast<std::size_t>(root)] != 0) removed += remove_group(root);
    }
    prisoners_[to_move_ == Color::White ? 1 : 0] += removed;
    hash_ = a.new_hash;
    record_position();
    passes_ = 0;
    ++moves_played_;
    to_move_ = opponent(to_move_);
}

Board Board::apply_move(Move m) const {
    Board next = *this;
    next.play(m);
    return next;
}

void Board::record_position() {
    history_.push_back(hash_);
    for (int bit : bloom_bits(hash_)) bloom_[static_cast<std::size_t>(bit >> 6)] |= 1ULL << (bit & 63);
}

std::uint64_t Board::compute_hash() const {
    std::uint64_t h = 0;
    for (int r = 0; r < size_; ++r) {
        for (int c = 0; c < size_; ++c) {
            const Color col = at(r, c);
            if (col != Color::Empty) h ^= key(index({r, c}), col);
        }
    }
    return h;
}

GameResult Board::score(double komi) const {
    GameResult res;
    res.komi = komi;
    CellSet seen;
    std::array<int, kCells> stack;
    for (int r = 0; r < size_; ++r) {
        for (int c = 0; c < size_; ++c) {
            const int idx = index({r, c});
            const std::uint8_t v = cells_[static_cast<std::size_t>(idx)];
            if (v == static_cast<std::uint8_t>(Color::Black)) {
                ++res.black_area;
            } else if (v == static_cast<std::uint8_t>(Color::White)) {
                ++res.white_area;
            } else if (!seen.test(static_cast<std::size_t>(idx))) {
                int region = 0;
                bool touches_black = false;
                bool touches_white = false;
                int top = 0;
                stack[static_cast<std::size_t>(top++)] = idx;
                seen.set(static_cast<std::size_t>(idx));
                while (top > 0) {
                    const int cur = stack[static_cast<std::size_t>(--top)];
                    ++region;
                    for (int d : kNeighbours) {
                        const int n = cur + d;
                        const std::uint8_t nv = cells_[static_cast<std::size_t>(n)];
                        if (nv == 0 && !seen.test(static_cast<std::size_t>(n))) {
                            seen.set(static_cast<std::size_t>(n));
                            stack[static_cast<std::size_t>(top++)] = n;
                        } else if (nv == static_cast<std::uint8_t>(Color::Black)) {
                            touches_black = true;
                        } else if (nv == static_cast<std::uint8_t>(Color::White)) {
                            touches_white = true;
                        }
                    }
                }
                if (touches_black && !touches_white) res.black_area += region;
                if (touches_white && !touches_black) res.white_area += region;
            }
        }
    }
    res.margin = static_cast<double>(res.black_area - res.white_area) - komi;
    res.winner = res.margin > 0 ? Winner::Black : res.margin < 0 ? Winner::White : Winner::Draw;
    return res;
}

bool Board::is_single_point_eye(Point p, Color c) const {
    if (!on_board(p)) return false;
    const int idx = index(p);
    if (cells_[static_cast<std::size_t>(idx)] != 0) return false;
    const auto own = static_cast<std::uint8_t>(c);
    for (int d : kNeighbours) {
        const std::uint8_t v = cells_[static_cast<std::size_t>(idx + d)];
        if (v != own && v != kBorder) return false;
    }
    int enemy = 0;
    int off_board = 0;
    const auto opp = static_cast<std::uint8_t>(opponent(c));
    for (int d : kDiagonals) {
        const std::uint8_t v = cells_[static_cast<std::size_t>(idx + d)];
        if (v == kBorder) ++off_board;
        else if (v == opp) ++enemy;
    }
    return off_board > 0 ? enemy == 0 : enemy <= 1;
}

std::string Board::to_string() const {
    std::string out;
    for (int r = size_ - 1; r >= 0; --r) {
        for (int c = 0; c < size_; ++c) {
            const Color col = at(r, c);
            out += col == Color::Black ? 'X' : col == Color::White ? 'O' : '.';
        }
        out += '\n';
    }
    return out;
}

std::string format_game_record(const std::vector<Move>& moves, Color first_player,
                               int board_size, const GameResult& result) {
    std::string out;
    Color c = first_player;
    for (const Move& m : moves) {
        out += color_letter(c);
        out += ' ';
        out += to_vertex(m, board_size);
        out += '\n';
        c = opponent(c);
    }
    out += "RE " + result_string(result) + "\n";
    return out;
}

}  // namespace parago
