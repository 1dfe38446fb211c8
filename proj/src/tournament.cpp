#include "parago/tournament.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "parago/parallel.hpp"

namespace parago {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

}  // namespace

ConfidenceInterval confidence_interval(std::int64_t wins, std::int64_t draws, std::int64_t games, double z) {
    if (games <= 0) throw std::invalid_argument("empty sample");
    if (wins < 0 || draws < 0 || wins + draws > games) {
        throw std::invalid_argument("wins + draws must not exceed games");
    }
    const double n = static_cast<double>(games);
    const double w = (static_cast<double>(wins) + 0.5 * static_cast<double>(draws)) / n;
    const double h = z * std::sqrt(w * (1.0 - w) / n);
    return {w, std::max(0.0, w - h), std::min(1.0, w + h)};
}

MatchStats MatchStats::from_counts(std::int64_t wins, std::int64_t losses, std::int64_t draws, double z) {
    MatchStats s;
    s.games = wins + losses + draws;
    s.wins_a = wins;
    s.losses_a = losses;
    s.draws = draws;
    s.z = z;
    const auto ci = confidence_interval(wins, draws, s.games, z);
    s.win_rate = ci.win_rate;
    s.ci_low = ci.low;
    s.ci_high = ci.high;
    return s;
}

std::string match_csv_header() { return "n_threads,games,wins,losses,draws,w,ci_low,ci_high"; }

std::string match_csv_row(int n_threads, const MatchStats& s) {
    std::ostringstream out;
    out << n_threads << ',' << s.games << ',' << s.wins_a << ',' << s.losses_a << ',' << s.draws << ','
        << std::fixed << std::setprecision(6) << s.win_rate << ',' << s.ci_low << ',' << s.ci_high;
    return out.str();
}

void EnginePairing::validate() const {
    if (games < 1) throw std::invalid_argument("a match needs at least one game");
    if (board_size < Board::kMinSize || board_size > Board::kMaxSize) {
        throw std::invalid_argument("board size must be in [2, 19]");
    }
    engine_a.validate();
    engine_b.validate();
    if (move_budget && move_budget->amount <= 0) throw std::invalid_argument("empty budget");
}

int GameRecord::a_outcome() const {
    if (winner == Winner::Draw) return 0;
    const Color w = winner == Winner::Black ? Color::Black : Color::White;
    return w == a_color ? 1 : -1;
}

std::string GameRecord::text() const {
    if (!forfeited_by) return format_game_record(moves, Color::Black, board_size, result);
    std::string out = format_game_record(moves, Color::Black, board_size, result);
    out.erase(out.rfind("RE "));
    out += std::string("RE ") + color_letter(opponent(*forfeited_by)) + "+F\n";
    return out;
}

Color a_color_for_game(const EnginePairing& pairing, int index) {
    if (!pairing.alternate_colors) return Color::Black;
    return index % 2 == 0 ? Color::Black : Color::White;
}

GameRecord play_game(const EnginePairing& pairing, Color a_plays, std::uint64_t seed,
                     const MoveGenerator& generator) {
    pairing.validate();
    SearchConfig cfg_a = pairing.engine_a;
    SearchConfig cfg_b = pairing.engine_b;
    cfg_a.komi = cfg_b.komi = pairing.komi;
    if (pairing.move_budget) cfg_a.budget = cfg_b.budget = *pairing.move_budget;

    GameRecord rec;
    rec.a_color = a_plays;
    rec.board_size = pairing.board_size;
    Board board(pairing.board_size);
    const int cap = 3 * pairing.board_size * pairing.board_size;
    for (int ply = 0; !board.game_over() && ply < cap; ++ply) {
        const bool a_turn = board.to_move() == a_plays;
        SearchConfig cfg = a_turn ? cfg_a : cfg_b;
        cfg.seed = mix(cfg.seed ^ seed, static_cast<std::uint64_t>(ply));
        SearchResult r = generator ? generator(board, cfg) : parallel_search(board, cfg);
        (a_turn ? rec.a_stats : rec.b_stats).push_back(r.stats);
        if (!board.is_legal(r.move)) {
            spdlog::error("{} engine produced illegal move {}; forfeit", a_turn ? "A" : "B",
                          r.move.is_pass() ? "pass" : to_vertex(r.move, pairing.board_size));
            rec.forfeited_by = board.to_move();
            break;
        }
        board.play(r.move);
        rec.moves.push_back(r.move);
    }
    rec.result = board.score(pairing.komi);
    if (rec.forfeited_by) {
        rec.winner = *rec.forfeited_by == Color::Black ? Winner::White : Winner::Black;
    } else {
        rec.winner = rec.result.winner;
    }
    return rec;
}

MatchStats run_match(const EnginePairing& pairing, std::uint64_t seed, int parallel_games,
                     const std::function<void(int, const GameRecord&)>& on_game) {
    pairing.validate();
    const int games = pairing.games;
    std::vector<GameRecord> records(static_cast<std::size_t>(games));
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (int i = next.fetch_add(1); i < games; i = next.fetch_add(1)) {
            try {
                records[static_cast<std::size_t>(i)] =
                    play_game(pairing, a_color_for_game(pairing, i), mix(seed, static_cast<std::uint64_t>(i)));
                spdlog::debug("game {} finished: {}", i, result_string(records[static_cast<std::size_t>(i)].result));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(games);
            }
        }
    };
    const int workers = std::clamp(parallel_games, 1, games);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    std::int64_t wins = 0;
    std::int64_t losses = 0;
    std::int64_t draws = 0;
    for (int i = 0; i < games; ++i) {
        const auto& rec = records[static_cast<std::size_t>(i)];
        const int o = rec.a_outcome();
        wins += o > 0 ? 1 : 0;
        losses += o < 0 ? 1 : 0;
        draws += o == 0 ? 1 : 0;
        if (on_game) on_game(i, rec);
    }
    return MatchStats::from_counts(wins, losses, draws);
}

EnginePairing sweep_pairing(const SweepOptions& options, int n) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("sweep points must be even and at least 2");
    EnginePairing p;
    p.games = options.games;
    p.komi = options.komi;
    p.board_size = options.board_size;
    p.engine_a = options.base;
    p.engine_b = options.base;
    p.engine_a.threads = options.identical_strength ? n / 2 : n;
    p.engine_b.threads = n / 2;
    for (SearchConfig* cfg : {&p.engine_a, &p.engine_b}) {
        cfg->budget = options.budget;
        if (options.budget.is_playouts() && options.scope == BudgetScope::PerThread) {
            cfg->budget.amount = options.budget.amount * cfg->threads;
        }
    }
    // Engine B gets its own seed stream so identical configs do not mirror.
    p.engine_b.seed = mix(options.base.seed, 0xb);
    return p;
}

std::vector<SweepPoint> doubling_sweep(const SweepOptions& options,
                                       const std::function<void(const SweepPoint&)>& on_point) {
    if (options.points.empty()) throw std::invalid_argument("sweep needs at least one point");
    for (int n : options.points) sweep_pairing(options, n);
    std::vector<SweepPoint> out;
    for (int n : options.points) {
        const EnginePairing p = sweep_pairing(options, n);
        SweepPoint point{n, run_match(p, mix(options.seed, static_cast<std::uint64_t>(n)), options.parallel_games)};
        if (on_point) on_point(point);
        out.push_back(point);
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::string out = match_csv_header() + "\n";
    for (const auto& p : points) out += match_csv_row(p.n_threads, p.stats) + "\n";
    return out;
}

}  // namespace parago
