#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "parago/bench.hpp"
#include "parago/gtp.hpp"
#include "parago/parallel.hpp"
#include "parago/tournament.hpp"

namespace py = pybind11;
using namespace parago;

namespace {

// Searches take a while, so they run without the GIL.
template <class F>
auto unlocked(F f) {
    py::gil_scoped_release release;
    return f();
}

py::dict stats_dict(const SearchStats& s) {
    py::dict d;
    d["playouts"] = s.playouts;
    d["elapsed_ms"] = s.elapsed_ms;
    d["nodes"] = s.nodes;
    d["max_depth"] = s.max_depth;
    d["chosen_move"] = to_vertex(s.chosen_move, s.board_size);
    d["threads"] = s.threads;
    d["per_thread_playouts"] = s.per_thread_playouts;
    d["lost_expansions"] = s.lost_expansions;
    d["pinning_effective"] = s.pinning_effective;
    d["playouts_per_sec"] = s.playouts_per_sec();
    return d;
}

}  // namespace

PYBIND11_MODULE(_parago, m) {
    m.doc() = "Tree-parallel MCTS for small-board Go";
    m.attr("__version__") = PARAGO_VERSION_STRING;

    py::register_exception<IllegalMove>(m, "IllegalMove", PyExc_ValueError);
    py::register_exception<GameFinished>(m, "GameFinished", PyExc_RuntimeError);

    py::enum_<Color>(m, "Color")
        .value("EMPTY", Color::Empty)
        .value("BLACK", Color::Black)
        .value("WHITE", Color::White);
    py::enum_<Winner>(m, "Winner").value("BLACK", Winner::Black).value("WHITE", Winner::White).value("DRAW", Winner::Draw);
    py::enum_<LockMode>(m, "LockMode").value("LOCAL_LOCK", LockMode::LocalLock).value("LOCK_FREE", LockMode::LockFree);
    py::enum_<AffinityPolicy>(m, "AffinityPolicy")
        .value("NONE", AffinityPolicy::None)
        .value("COMPACT", AffinityPolicy::Compact)
        .value("BALANCED", AffinityPolicy::Balanced)
        .value("SCATTER", AffinityPolicy::Scatter);
    py::enum_<ElementType>(m, "ElementType").value("FLOAT64", ElementType::Float64).value("INT32", ElementType::Int32);
    py::enum_<BudgetScope>(m, "BudgetScope").value("PER_THREAD", BudgetScope::PerThread).value("TOTAL", BudgetScope::Total);

    py::class_<Move>(m, "Move")
        .def_static("play", &Move::play, py::arg("row"), py::arg("col"))
        .def_static("pass_", &Move::pass)
        .def_property_readonly("is_pass", &Move::is_pass)
        .def_property_readonly("row", [](const Move& mv) { return mv.point.row; })
        .def_property_readonly("col", [](const Move& mv) { return mv.point.col; })
        .def("vertex", [](const Move& mv, int size) { return to_vertex(mv, size); }, py::arg("board_size"))
        .def(py::self == py::self)
        .def("__repr__", [](const Move& mv) {
            return mv.is_pass() ? std::string("Move.pass_()")
                                : "Move.play(" + std::to_string(mv.point.row) + ", " + std::to_string(mv.point.col) + ")";
        });
    m.def("parse_vertex", [](const std::string& text, int size) { return parse_vertex(text, size); }, py::arg("text"),
          py::arg("board_size"));

    py::class_<GameResult>(m, "GameResult")
        .def_readonly("winner", &GameResult::winner)
        .def_readonly("margin", &GameResult::margin)
        .def_readonly("komi", &GameResult::komi)
        .def_readonly("black_area", &GameResult::black_area)
        .def_readonly("white_area", &GameResult::white_area)
        .def("__str__", &result_string);

    py::class_<Board>(m, "Board")
        .def(py::init<int>(), py::arg("size") = 9)
        .def_static("from_rows", &Board::from_rows, py::arg("rows"), py::arg("to_move") = Color::Black)
        .def_property_readonly("size", &Board::size)
        .def_property_readonly("to_move", &Board::to_move)
        .def_property_readonly("game_over", &Board::game_over)
        .def_property_readonly("hash", &Board::hash)
        .def_property_readonly("move_number", &Board::move_number)
        .def("at", py::overload_cast<int, int>(&Board::at, py::const_), py::arg("row"), py::arg("col"))
        .def("prisoners", &Board::prisoners)
        .def("is_legal", &Board::is_legal)
        .def("legal_moves", &Board::legal_moves)
        .def("play", &Board::play)
        .def("apply_move", &Board::apply_move)
        .def("score", &Board::score, py::arg("komi"))
        .def("copy", [](const Board& b) { return Board(b); })
        .def("__str__", &Board::to_string);

    py::class_<Budget>(m, "Budget")
        .def_static("playouts", &Budget::playouts)
        .def_static("wall_time_ms", &Budget::wall_time_ms)
        .def_readonly("amount", &Budget::amount)
        .def_property_readonly("is_playouts", &Budget::is_playouts)
        .def("__str__", &Budget::to_string);

    py::class_<SearchConfig>(m, "SearchConfig")
        .def(py::init<>())
        .def_readwrite("threads", &SearchConfig::threads)
        .def_readwrite("budget", &SearchConfig::budget)
        .def_readwrite("lock_mode", &SearchConfig::lock_mode)
        .def_readwrite("affinity", &SearchConfig::affinity)
        .def_readwrite("exploration_c", &SearchConfig::exploration_c)
        .def_readwrite("virtual_loss_size", &SearchConfig::virtual_loss_size)
        .def_readwrite("expansion_threshold", &SearchConfig::expansion_threshold)
        .def_readwrite("komi", &SearchConfig::komi)
        .def_readwrite("seed", &SearchConfig::seed)
        .def("validate", &SearchConfig::validate);

    m.def(
        "search",
        [](const Board& b, const SearchConfig& c) {
            SearchResult r = unlocked([&] { return parallel_search(b, c); });
            return py::make_tuple(r.move, stats_dict(r.stats));
        },
        py::arg("board"), py::arg("config"), "Search the position; returns (move, stats).");
    m.def("playout", [](Board b, std::uint64_t seed, double komi) {
        Rng rng(seed);
        return playout(b, rng, komi);
    }, py::arg("board"), py::arg("seed"), py::arg("komi"));

    py::class_<ConfidenceInterval>(m, "ConfidenceInterval")
        .def_readonly("win_rate", &ConfidenceInterval::win_rate)
        .def_readonly("low", &ConfidenceInterval::low)
        .def_readonly("high", &ConfidenceInterval::high);
    m.def("confidence_interval", &confidence_interval, py::arg("wins"), py::arg("draws"), py::arg("games"),
          py::arg("z") = 1.96);

    py::class_<MatchStats>(m, "MatchStats")
        .def_readonly("games", &MatchStats::games)
        .def_readonly("wins_a", &MatchStats::wins_a)
        .def_readonly("losses_a", &MatchStats::losses_a)
        .def_readonly("draws", &MatchStats::draws)
        .def_readonly("win_rate", &MatchStats::win_rate)
        .def_readonly("ci_low", &MatchStats::ci_low)
        .def_readonly("ci_high", &MatchStats::ci_high)
        .def("ci_contains", &MatchStats::ci_contains);

    py::class_<EnginePairing>(m, "EnginePairing")
        .def(py::init<>())
        .def_readwrite("engine_a", &EnginePairing::engine_a)
        .def_readwrite("engine_b", &EnginePairing::engine_b)
        .def_readwrite("games", &EnginePairing::games)
        .def_readwrite("komi", &EnginePairing::komi)
        .def_readwrite("board_size", &EnginePairing::board_size);
    m.def(
        "run_match",
        [](const EnginePairing& p, std::uint64_t seed, int parallel_games) {
            std::vector<std::string> records;
            const MatchStats s = unlocked([&] {
                return run_match(p, seed, parallel_games, [&](int, const GameRecord& r) { records.push_back(r.text()); });
            });
            return py::make_tuple(s, records);
        },
        py::arg("pairing"), py::arg("seed") = 1, py::arg("parallel_games") = 1,
        "Play a match; returns (stats, game records).");

    py::class_<SweepOptions>(m, "SweepOptions")
        .def(py::init<>())
        .def_readwrite("points", &SweepOptions::points)
        .def_readwrite("games", &SweepOptions::games)
        .def_readwrite("budget", &SweepOptions::budget)
        .def_readwrite("scope", &SweepOptions::scope)
        .def_readwrite("base", &SweepOptions::base)
        .def_readwrite("komi", &SweepOptions::komi)
        .def_readwrite("board_size", &SweepOptions::board_size)
        .def_readwrite("seed", &SweepOptions::seed)
        .def_readwrite("identical_strength", &SweepOptions::identical_strength)
        .def_readwrite("parallel_games", &SweepOptions::parallel_games);
    m.def(
        "doubling_sweep",
        [](const SweepOptions& o) {
            const auto points = unlocked([&] { return doubling_sweep(o); });
            return sweep_csv(points);
        },
        py::arg("options"), "Run the doubling sweep; returns the CSV text.");

    py::class_<AffinityMap>(m, "AffinityMap")
        .def_readonly("assignments", &AffinityMap::assignments)
        .def("core_of", &AffinityMap::core_of)
        .def("core_loads", &AffinityMap::core_loads)
        .def("threads_on_core", &AffinityMap::threads_on_core);
    m.def("compute_affinity_map", &compute_affinity_map, py::arg("threads"), py::arg("cores"), py::arg("smt_ways"),
          py::arg("policy"));

    py::class_<KernelSpec>(m, "KernelSpec")
        .def(py::init<>())
        .def_static("compute_bound", &KernelSpec::compute_bound, py::arg("element_type") = ElementType::Float64)
        .def_static("memory_bound", &KernelSpec::memory_bound, py::arg("element_type") = ElementType::Float64)
        .def_readwrite("element_type", &KernelSpec::element_type)
        .def_readwrite("array_length", &KernelSpec::array_length)
        .def_readwrite("repetitions", &KernelSpec::repetitions)
        .def_readwrite("threads", &KernelSpec::threads)
        .def_readwrite("affinity", &KernelSpec::affinity);
    py::class_<BenchResult>(m, "BenchResult")
        .def_readonly("threads", &BenchResult::threads)
        .def_readonly("ops", &BenchResult::ops)
        .def_readonly("elapsed_s", &BenchResult::elapsed_s)
        .def_readonly("ops_per_sec", &BenchResult::ops_per_sec)
        .def_readonly("bytes_per_sec", &BenchResult::bytes_per_sec)
        .def_readonly("checksum", &BenchResult::checksum)
        .def_readonly("checksum_ok", &BenchResult::checksum_ok);
    m.def("run_kernel", [](const KernelSpec& s) { return unlocked([&] { return run_kernel(s); }); });
    m.def("run_bandwidth", [](const KernelSpec& s) { return unlocked([&] { return run_bandwidth(s); }); });

    m.def(
        "tree_size_probe",
        [](const SearchConfig& c, const Board& b) {
            const ProbeResult r = unlocked([&] { return tree_size_probe(c, b); });
            py::dict d = stats_dict(r.stats);
            d["walked_nodes"] = r.walked_nodes;
            return d;
        },
        py::arg("config"), py::arg("board"));
    m.def(
        "games_per_second_probe",
        [](const SearchConfig& c, const Board& b) {
            const ProbeResult r = unlocked([&] { return games_per_second_probe(c, b); });
            py::dict d = stats_dict(r.stats);
            d["games_per_sec"] = r.games_per_sec;
            return d;
        },
        py::arg("config"), py::arg("board"));

    py::class_<GtpEngine>(m, "GtpEngine")
        .def(py::init<SearchConfig, int>(), py::arg("config"), py::arg("board_size") = 9)
        .def("handle", [](GtpEngine& e, const std::string& line) { return unlocked([&] { return e.handle(line); }); })
        .def_property_readonly("quit_requested", &GtpEngine::quit_requested);
}
