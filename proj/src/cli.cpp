#include "parago/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "parago/gtp.hpp"
#include "parago/parallel.hpp"

#ifndef PARAGO_VERSION
#define PARAGO_VERSION "0.0.0"
#endif
#ifndef PARAGO_CXX_FLAGS
#define PARAGO_CXX_FLAGS ""
#endif
#ifndef PARAGO_COMPILER
#define PARAGO_COMPILER ""
#endif

namespace parago {

std::string_view to_string(Command c) {
    switch (c) {
        case Command::Gtp: return "gtp";
        case Command::Selfplay: return "selfplay";
        case Command::Sweep: return "sweep";
        case Command::Bench: return "bench";
        case Command::Probe: return "probe";
    }
    return "gtp";
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file: " + path);
    std::vector<std::pair<std::string, std::string>> out;
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        std::string key = trim(line.substr(0, eq));
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        out.emplace_back(key, trim(line.substr(eq + 1)));
    }
    return out;
}

std::string option_name(const std::string& token) {
    if (token.rfind("--", 0) != 0) return {};
    return token.substr(2, token.find('=') == std::string::npos ? std::string::npos : token.find('=') - 2);
}

const std::set<std::string> kFlagKeys{"identical"};

std::vector<int> parse_thread_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(part, &used);
            if (used != part.size() || v < 1) throw std::invalid_argument(part);
            out.push_back(v);
        } catch (const std::exception&) {
            throw UsageError("invalid --threads value: " + text);
        }
    }
    if (out.empty()) throw UsageError("--threads needs at least one value");
    return out;
}

}  // namespace

EnginePairing RunConfig::pairing() const {
    EnginePairing p;
    p.games = games;
    p.komi = search.komi;
    p.board_size = board_size;
    p.engine_a = search;
    p.engine_b = search;
    p.engine_a.threads = thread_points.front();
    p.engine_b.threads = opponent_threads > 0 ? opponent_threads : std::max(1, thread_points.front() / 2);
    for (SearchConfig* cfg : {&p.engine_a, &p.engine_b}) {
        if (cfg->budget.is_playouts() && budget_scope == BudgetScope::PerThread) {
            cfg->budget.amount = search.budget.amount * cfg->threads;
        }
    }
    p.engine_b.seed = search.seed ^ 0xb;
    return p;
}

SweepOptions RunConfig::sweep() const {
    SweepOptions s;
    s.points = thread_points;
    s.games = games;
    s.budget = search.budget;
    s.scope = budget_scope;
    s.base = search;
    s.komi = search.komi;
    s.board_size = board_size;
    s.seed = search.seed;
    s.identical_strength = identical;
    s.parallel_games = parallel_games;
    return s;
}

RunConfig parse_args(const std::vector<std::string>& raw_args) {
    // Split off --config and collect the keys given on the command line.
    std::vector<std::string> cli_args;
    std::string config_path;
    std::set<std::string> cli_keys;
    for (std::size_t i = 0; i < raw_args.size(); ++i) {
        const std::string& tok = raw_args[i];
        if (tok == "--config") {
            if (i + 1 >= raw_args.size()) throw UsageError("--config needs a file");
            config_path = raw_args[++i];
            continue;
        }
        if (tok.rfind("--config=", 0) == 0) {
            config_path = tok.substr(9);
            continue;
        }
        if (const auto name = option_name(tok); !name.empty()) cli_keys.insert(name);
        cli_args.push_back(tok);
    }

    std::vector<std::string> merged;
    if (!config_path.empty()) {
        const bool cli_budget = cli_keys.count("budget-ms") || cli_keys.count("budget-playouts");
        const bool env_affinity = std::getenv("MCTS_AFFINITY") != nullptr;
        for (const auto& [key, value] : read_config_file(config_path)) {
            if (cli_keys.count(key)) continue;
            if (cli_budget && (key == "budget-ms" || key == "budget-playouts")) continue;
            if (env_affinity && key == "affinity") continue;
            if (kFlagKeys.count(key)) {
                if (value == "true" || value == "1") merged.push_back("--" + key);
                continue;
            }
            merged.push_back("--" + key);
            merged.push_back(value);
        }
    }
    merged.insert(merged.end(), cli_args.begin(), cli_args.end());

    RunConfig cfg;
    CLI::App app{"Tree-parallel Monte Carlo Tree Search for Go, with self-play and benchmark harnesses", "parago"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::string command;
    std::string threads = "1";
    std::int64_t budget_ms = 0;
    std::int64_t budget_playouts = 0;
    std::string scope = "per-thread";
    std::string lock = "free";
    std::string affinity = "none";
    std::string element = "float64";
    std::size_t length = 0;
    std::int64_t reps = -1;

    app.add_option("command", command, "gtp | selfplay | sweep | bench | probe")
        ->required()
        ->check(CLI::IsMember({"gtp", "selfplay", "sweep", "bench", "probe"}));
    app.add_option("--threads", threads, "Thread count, or a comma list of sweep points");
    auto* ms_opt = app.add_option("--budget-ms", budget_ms, "Wall-time budget per move (ms)");
    auto* po_opt = app.add_option("--budget-playouts", budget_playouts, "Playout budget per move");
    app.add_option("--budget-scope", scope, "Playout budget per thread or in total (selfplay/sweep)")
        ->check(CLI::IsMember({"per-thread", "total"}));
    app.add_option("--lock", lock, "Tree lock discipline")->check(CLI::IsMember({"local", "free"}));
    app.add_option("--affinity", affinity, "Thread pinning policy")
        ->check(CLI::IsMember({"compact", "balanced", "scatter", "none"}))
        ->envname("MCTS_AFFINITY");
    app.add_option("--board-size", cfg.board_size, "Board edge length")->check(CLI::Range(2, 19));
    app.add_option("--komi", cfg.search.komi, "Komi");
    app.add_option("--games", cfg.games, "Games per match or sweep point")->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.search.seed, "RNG seed");
    app.add_option("--out", cfg.output_path, "Output file (CSV); metadata goes to <out>.meta.json");
    app.add_option("--records", cfg.records_path, "Game record file (selfplay)");
    app.add_option("--opponent-threads", cfg.opponent_threads, "Threads of engine B in selfplay (default n/2)");
    app.add_option("--parallel-games", cfg.parallel_games, "Games played concurrently")->check(CLI::PositiveNumber);
    app.add_flag("--identical", cfg.identical, "Sweep null experiment: both sides use n/2 threads");
    app.add_option("--exploration", cfg.search.exploration_c, "UCT exploration constant");
    app.add_option("--virtual-loss", cfg.search.virtual_loss_size, "Virtual loss per traversal");
    app.add_option("--expansion-threshold", cfg.search.expansion_threshold, "Visits before a leaf is expanded");
    app.add_option("--kernel", cfg.bench_mode, "Benchmark: kernel | bandwidth | sweep | bandwidth-sweep")
        ->check(CLI::IsMember({"kernel", "bandwidth", "sweep", "bandwidth-sweep"}));
    app.add_option("--element-type", element, "float64 | int32")->check(CLI::IsMember({"float64", "int32"}));
    app.add_option("--length", length, "Kernel array length");
    app.add_option("--reps", reps, "Kernel repetitions");
    app.add_option("--max-threads", cfg.sweep_max_threads, "Upper thread count of a bench sweep");
    app.add_option("--probe", cfg.probe_kind, "Probe: tree | gps")->check(CLI::IsMember({"tree", "gps"}));
    app.add_option("--log-level", cfg.log_level, "trace | debug | info | warn | error | off");

    try {
        std::vector<std::string> reversed(merged.rbegin(), merged.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    if (ms_opt->count() > 0 && po_opt->count() > 0) throw UsageError("conflicting budgets");
    cfg.command = command == "gtp"        ? Command::Gtp
                  : command == "selfplay" ? Command::Selfplay
                  : command == "sweep"    ? Command::Sweep
                  : command == "bench"    ? Command::Bench
                                          : Command::Probe;
    cfg.thread_points = parse_thread_list(threads);
    if (cfg.command != Command::Sweep && cfg.thread_points.size() != 1) {
        throw UsageError("--threads takes a list only for sweep");
    }
    if (cfg.command == Command::Sweep) {
        for (int n : cfg.thread_points) {
            if (n < 2 || n % 2 != 0) throw UsageError("sweep points must be even and at least 2");
        }
    }
    cfg.search.threads = cfg.thread_points.front();
    if (ms_opt->count() > 0) {
        cfg.search.budget = Budget::wall_time_ms(budget_ms);
    } else if (po_opt->count() > 0) {
        cfg.search.budget = Budget::playouts(budget_playouts);
    }
    cfg.budget_scope = scope == "total" ? BudgetScope::Total : BudgetScope::PerThread;
    cfg.search.lock_mode = parse_lock_mode(lock);
    cfg.search.affinity = parse_affinity(affinity);

    const ElementType type = parse_element_type(element);
    const bool memory = cfg.bench_mode == "bandwidth" || cfg.bench_mode == "bandwidth-sweep";
    cfg.kernel = memory ? KernelSpec::memory_bound(type) : KernelSpec::compute_bound(type);
    if (length > 0) cfg.kernel.array_length = length;
    if (reps >= 0) cfg.kernel.repetitions = reps;
    cfg.kernel.threads = cfg.search.threads;
    cfg.kernel.affinity = cfg.search.affinity;

    try {
        cfg.search.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    cfg.echo = {{"command", command},
                {"threads", threads},
                {"budget", cfg.search.budget.to_string()},
                {"budget_scope", scope},
                {"lock", lock},
                {"affinity", affinity},
                {"board_size", std::to_string(cfg.board_size)},
                {"komi", std::to_string(cfg.search.komi)},
                {"games", std::to_string(cfg.games)},
                {"seed", std::to_string(cfg.search.seed)},
                {"exploration", std::to_string(cfg.search.exploration_c)},
                {"virtual_loss", std::to_string(cfg.search.virtual_loss_size)},
                {"expansion_threshold", std::to_string(cfg.search.expansion_threshold)},
                {"kernel", cfg.bench_mode},
                {"element_type", element},
                {"length", std::to_string(cfg.kernel.array_length)},
                {"reps", std::to_string(cfg.kernel.repetitions)},
                {"probe", cfg.probe_kind},
                {"out", cfg.output_path}};
    return cfg;
}

void write_file_atomically(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("cannot rename into " + path);
    }
}

std::string provenance_json(const RunConfig& config, const std::string& extra_json) {
    nlohmann::json j;
    j["artifact"] = "parago";
    j["version"] = PARAGO_VERSION;
    j["compiler"] = PARAGO_COMPILER;
    j["cxx_flags"] = PARAGO_CXX_FLAGS;
    j["seed"] = config.search.seed;
    nlohmann::json echo = nlohmann::json::object();
    for (const auto& [k, v] : config.echo) echo[k] = v;
    j["config"] = echo;
    const HostTopology host = detect_host_topology();
    const Topology t = host.uniform();
    j["host"] = {{"cores", t.cores},
                 {"smt", t.smt_ways},
                 {"logical_processors", host.logical_processors()},
                 {"hardware_concurrency", std::thread::hardware_concurrency()}};
    std::ifstream gov("/sys/devices/system/cpu/cpu0/cpufreq/scaling_governor");
    std::string governor;
    if (gov >> governor) j["host"]["frequency_governor"] = governor;
    j["run"] = nlohmann::json::parse(extra_json);
    return j.dump(2);
}

namespace {

void emit(const RunConfig& config, std::ostream& out, std::ostream& err, const std::string& csv,
          const std::string& extra_json) {
    if (config.output_path.empty()) {
        out << csv << std::flush;
        err << provenance_json(config, extra_json) << "\n";
    } else {
        write_file_atomically(config.output_path, csv);
        write_file_atomically(config.output_path + ".meta.json", provenance_json(config, extra_json) + "\n");
    }
}

int run_selfplay(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const EnginePairing pairing = config.pairing();
    std::string records;
    const MatchStats stats = run_match(pairing, config.search.seed, config.parallel_games,
                                       [&records](int i, const GameRecord& rec) {
                                           records += "# game " + std::to_string(i) + " A=" +
                                                      color_letter(rec.a_color) + "\n" + rec.text() + "\n";
                                       });
    const std::string csv = match_csv_header() + "\n" + match_csv_row(pairing.engine_a.threads, stats) + "\n";
    nlohmann::json extra;
    extra["engine_a_threads"] = pairing.engine_a.threads;
    extra["engine_b_threads"] = pairing.engine_b.threads;
    if (!config.records_path.empty()) write_file_atomically(config.records_path, records);
    emit(config, out, err, csv, extra.dump());
    return 0;
}

int run_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const auto points = doubling_sweep(config.sweep(), [&err](const SweepPoint& p) {
        spdlog::info("sweep point n={} w={:.3f} [{:.3f}, {:.3f}]", p.n_threads, p.stats.win_rate, p.stats.ci_low,
                     p.stats.ci_high);
        (void)err;
    });
    std::int64_t total = 0;
    for (const auto& p : points) total += p.stats.games;
    nlohmann::json extra;
    extra["points"] = points.size();
    extra["total_games"] = total;
    emit(config, out, err, sweep_csv(points), extra.dump());
    // Summary goes to the terminal, not into the CSV.
    (config.output_path.empty() ? err : out) << "sweep: " << points.size() << " points, " << total << " games total\n";
    return 0;
}

int run_bench(const RunConfig& config, std::ostream& out, std::ostream& err) {
    std::string csv = bench_csv_header() + "\n";
    nlohmann::json extra = nlohmann::json::object();
    if (config.bench_mode == "kernel" || config.bench_mode == "bandwidth") {
        const bool bw = config.bench_mode == "bandwidth";
        const BenchResult r = bw ? run_bandwidth(config.kernel) : run_kernel(config.kernel);
        csv += bench_csv_row(config.bench_mode, r) + "\n";
        extra["pinning_effective"] = r.pinning_effective;
        extra["elapsed_s"] = r.elapsed_s;
        extra["checksum"] = r.checksum;
    } else {
        const bool bw = config.bench_mode == "bandwidth-sweep";
        const int max_threads = config.sweep_max_threads > 0 ? config.sweep_max_threads
                                                             : detect_host_topology().logical_processors();
        for (const auto& r : affinity_sweep(config.kernel, max_threads, bw)) {
            csv += bench_csv_row(bw ? "bandwidth" : "kernel", r) + "\n";
        }
        extra["max_threads"] = max_threads;
    }
    emit(config, out, err, csv, extra.dump());
    return 0;
}

int run_probe(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const Board position(config.board_size);
    const SearchConfig& s = config.search;
    std::ostringstream csv;
    ProbeResult r;
    if (config.probe_kind == "tree") {
        r = tree_size_probe(s, position);
        csv << "probe,threads,policy,lock,budget,playouts,nodes,max_depth,chosen_move\n"
            << "tree," << s.threads << ',' << to_string(s.affinity) << ',' << to_string(s.lock_mode) << ','
            << s.budget.to_string() << ',' << r.stats.playouts << ',' << r.stats.nodes << ',' << r.stats.max_depth
            << ',' << to_vertex(r.stats.chosen_move, r.stats.board_size) << "\n";
    } else {
        r = games_per_second_probe(s, position);
        csv << "probe,threads,policy,lock,budget,playouts,elapsed_ms,games_per_sec\n"
            << "gps," << s.threads << ',' << to_string(s.affinity) << ',' << to_string(s.lock_mode) << ','
            << s.budget.to_string() << ',' << r.stats.playouts << ',' << std::fixed << std::setprecision(3)
            << r.stats.elapsed_ms << ',' << r.games_per_sec << "\n";
    }
    const std::string meta = run_metadata_json(s, r.stats, detect_host_topology().uniform());
    auto extra = nlohmann::json::parse(meta);
    extra["elapsed_ms"] = r.stats.elapsed_ms;
    extra["walked_nodes"] = r.walked_nodes;
    emit(config, out, err, csv.str(), extra.dump());
    return 0;
}

}  // namespace

int run(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
    try {
        spdlog::set_level(spdlog::level::from_str(config.log_level));
        switch (config.command) {
            case Command::Gtp: gtp_serve(config.search, in, out, config.board_size); return 0;
            case Command::Selfplay: return run_selfplay(config, out, err);
            case Command::Sweep: return run_sweep(config, out, err);
            case Command::Bench: return run_bench(config, out, err);
            case Command::Probe: return run_probe(config, out, err);
        }
    } catch (const std::exception& e) {
        err << "parago " << to_string(config.command) << ": " << e.what() << "\n";
        return 2;
    }
    return 2;
}

int main_entry(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    RunConfig config;
    try {
        config = parse_args(args);
    } catch (const HelpRequested& h) {
        std::cout << h.what();
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\nrun 'parago --help' for options\n";
        return 1;
    }
    return run(config, std::cin, std::cout, std::cerr);
}

}  // namespace parago
