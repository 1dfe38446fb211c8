#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "parago/board.hpp"
#include "parago/mcts.hpp"

namespace parago {

struct ConfidenceInterval {
    double win_rate = 0.0;
    double low = 0.0;
    double high = 0.0;
};

/// Normal-approximation interval on the true winning probability with the
/// sample rate substituted for it. A draw counts as half a win.
/// Throws std::invalid_argument("empty sample") when games == 0.
ConfidenceInterval confidence_interval(std::int64_t wins, std::int64_t draws, std::int64_t games,
                                       double z = 1.96);

struct MatchStats {
    std::int64_t games = 0;
    std::int64_t wins_a = 0;
    std::int64_t losses_a = 0;
    std::int64_t draws = 0;
    double win_rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double z = 1.96;

    static MatchStats from_counts(std::int64_t wins, std::int64_t losses, std::int64_t draws,
                                  double z = 1.96);
    bool ci_contains(double p) const { return ci_low <= p && p <= ci_high; }
};

/// n_threads,games,wins,losses,draws,w,ci_low,ci_high
std::string match_csv_header();
std::string match_csv_row(int n_threads, const MatchStats& s);

struct EnginePairing {
    SearchConfig engine_a;
    SearchConfig engine_b;
    int games = 100;
    double komi = 6.0;
    int board_size = 9;
    /// When set, overrides both engines' budgets.
    std::optional<Budget> move_budget;
    bool alternate_colors = true;

    void validate() const;
};

struct GameRecord {
    Color a_color = Color::Black;
    std::vector<Move> moves;
    GameResult result;
    Winner winner = Winner::Draw;
    /// Set when an engine produced an illegal move and lost by forfeit.
    std::optional<Color> forfeited_by;
    std::vector<SearchStats> a_stats;
    std::vector<SearchStats> b_stats;
    int board_size = 9;

    /// +1 win for engine A, -1 loss, 0 draw.
    int a_outcome() const;
    /// Move list and result in the engine text format.
    std::string text() const;
};

/// Engine signature used by play_game: returns the move for the side to move.
using MoveGenerator = std::function<SearchResult(const Board&, const SearchConfig&)>;

/// Plays one game to two passes or 3 * size^2 moves. Per-move seeds are
/// derived from `seed`, so a game is reproducible in playout-budget mode
/// with single-threaded engines.
GameRecord play_game(const EnginePairing& pairing, Color a_plays, std::uint64_t seed,
                     const MoveGenerator& generator = {});

/// Colour of engine A in game `index` of a match.
Color a_color_for_game(const EnginePairing& pairing, int index);

/// Plays pairing.games games and aggregates engine A's results. Up to
/// `parallel_games` games run at once, each with its own search trees.
MatchStats run_match(const EnginePairing& pairing, std::uint64_t seed, int parallel_games = 1,
                     const std::function<void(int, const GameRecord&)>& on_game = {});

enum class BudgetScope { PerThread, Total };

struct SweepOptions {
    std::vector<int> points;
    int games = 100;
    Budget budget = Budget::playouts(1000);
    /// Playout budgets scale with thread count under PerThread.
    BudgetScope scope = BudgetScope::PerThread;
    SearchConfig base;
    double komi = 6.0;
    int board_size = 9;
    std::uint64_t seed = 1;
    /// Null experiment: both sides get n/2 threads.
    bool identical_strength = false;
    int parallel_games = 1;
};

struct SweepPoint {
    int n_threads = 0;
    MatchStats stats;
};

/// n-thread engine against an n/2-thread engine for every n in points.
/// Every n must be even and at least 2.
std::vector<SweepPoint> doubling_sweep(const SweepOptions& options,
                                       const std::function<void(const SweepPoint&)>& on_point = {});

/// Builds the pairing doubling_sweep uses for one point.
EnginePairing sweep_pairing(const SweepOptions& options, int n);

std::string sweep_csv(const std::vector<SweepPoint>& points);

}  // namespace parago
