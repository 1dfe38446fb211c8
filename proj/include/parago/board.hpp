#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace parago {

enum class Color : std::uint8_t { Empty = 0, Black = 1, White = 2 };

constexpr Color opponent(Color c) {
    return c == Color::Black ? Color::White
         : c == Color::White ? Color::Black
                             : Color::Empty;
}

char color_letter(Color c);

/// Board coordinate. Row 0 is the bottom line (GTP row "1"), column 0 is "A".
struct Point {
    int row = 0;
    int col = 0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct Move {
    enum class Kind : std::uint8_t { Play, Pass };

    Kind kind = Kind::Pass;
    Point point{};

    static constexpr Move pass() { return Move{Kind::Pass, {}}; }
    static constexpr Move play(int row, int col) { return Move{Kind::Play, {row, col}}; }

    bool is_pass() const { return kind == Kind::Pass; }

    friend bool operator==(const Move& a, const Move& b) {
        return a.kind == b.kind && (a.kind == Kind::Pass || a.point == b.point);
    }
};

/// Renders "E5" / "pass" using GTP letters (no "I").
std::string to_vertex(Move m, int board_size);
/// Parses a GTP vertex, case-insensitive. Throws std::invalid_argument.
Move parse_vertex(std::string_view text, int board_size);

enum class MoveError : std::uint8_t { None, Occupied, Suicide, Superko, Finished, OffBoard };

std::string_view to_string(MoveError e);

class IllegalMove : public std::runtime_error {
public:
    IllegalMove(MoveError rule, const std::string& what)
        : std::runtime_error(what), rule_(rule) {}
    MoveError rule() const { return rule_; }

private:
    MoveError rule_;
};

class GameFinished : public std::logic_error {
public:
    GameFinished() : std::logic_error("game finished") {}
};

enum class Winner : std::uint8_t { Black, White, Draw };

struct GameResult {
    Winner winner = Winner::Draw;
    /// black_area - white_area - komi.
    double margin = 0.0;
    double komi = 0.0;
    int black_area = 0;
    int white_area = 0;
};

/// "B+3", "W+6.5" or "0" for a draw.
std::string result_string(const GameResult& r);

/// Square Go position with area scoring, no suicide and positional superko.
///
/// Copies are cheap apart from the position history, which grows by one
/// hash per move.
class Board {
public:
    static constexpr int kMinSize = 2;
    static constexpr int kMaxSize = 19;

    explicit Board(int size = 9);

    /// Builds a position from rows of '.', 'X' (black) and 'O' (white).
    /// rows[0] is the top line of the diagram. The resulting position is the
    /// only entry in the history. The diagram is taken as given, so it may hold
    /// groups without liberties (useful for scoring finished boards).
    static Board from_rows(const std::vector<std::string>& rows, Color to_move);

    int size() const { return size_; }
    Color at(Point p) const { return static_cast<Color>(cells_[index(p)]); }
    Color at(int row, int col) const { return at(Point{row, col}); }
    Color to_move() const { return to_move_; }
    void set_to_move(Color c);
    int consecutive_passes() const { return passes_; }
    bool game_over() const { return passes_ >= 2; }
    /// Stones captured by `c`.
    int prisoners(Color c) const { return prisoners_[c == Color::White ? 1 : 0]; }
    int move_number() const { return moves_played_; }
    std::uint64_t hash() const { return hash_; }
    const std::vector<std::uint64_t>& position_history() const { return history_; }
    bool seen_position(std::uint64_t h) const;
    int stone_count(Color c) const;
    int stone_count() const { return stone_count(Color::Black) + stone_count(Color::White); }

    /// Legality of `m` for the side to move, without modifying the board.
    MoveError check(Move m) const;
    bool is_legal(Move m) const { return check(m) == MoveError::None; }

    /// Row-major play moves followed by Pass. Throws GameFinished.
    std::vector<Move> legal_moves() const;

    /// Applies `m` for the side to move. Throws IllegalMove.
    void play(Move m);
    Board apply_move(Move m) const;

    /// Tromp-Taylor area score.
    GameResult score(double komi) const;

    /// Empty point whose orthogonal neighbours are all `c` and which has at
    /// most one diagonal enemy stone (none on the edge).
    bool is_single_point_eye(Point p, Color c) const;

    std::string to_string() const;

private:
    static constexpr int kStride = kMaxSize + 2;
    static constexpr int kCells = kStride * kStride;
    static constexpr std::uint8_t kBorder = 3;

    struct Analysis {
        MoveError error = MoveError::None;
        std::uint64_t new_hash = 0;
        int captured = 0;
        std::array<int, 4> capture_roots{};  // neighbour indices of captured groups
        int capture_root_count = 0;
    };

    static int index(Point p) { return (p.row + 1) * kStride + (p.col + 1); }
    Point point_of(int idx) const { return {idx / kStride - 1, idx % kStride - 1}; }
    bool on_board(Point p) const {
        return p.row >= 0 && p.col >= 0 && p.row < size_ && p.col < size_;
    }

    Analysis analyse(int idx, Color c) const;
    /// True when the group containing idx has a liberty other than `except`.
    bool has_liberty_except(int idx, int except) const;
    int group_size(int idx) const;
    int remove_group(int idx);
    void record_position();
    std::uint64_t compute_hash() const;

    int size_;
    std::array<std::uint8_t, kCells> cells_{};
    Color to_move_ = Color::Black;
    int passes_ = 0;
    int moves_played_ = 0;
    std::array<int, 2> prisoners_{};
    std::uint64_t hash_ = 0;
    std::vector<std::uint64_t> history_;
    // 1024-bit Bloom filter over history_ for fast negative lookups.
    std::array<std::uint64_t, 16> bloom_{};
};

/// Text game record: one "B E5" / "W pass" line per move, then "RE B+3".
std::string format_game_record(const std::vector<Move>& moves, Color first_player,
                               int board_size, const GameResult& result);

}  // namespace parago
