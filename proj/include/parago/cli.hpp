#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "parago/bench.hpp"
#include "parago/mcts.hpp"
#include "parago/tournament.hpp"

namespace parago {

enum class Command { Gtp, Selfplay, Sweep, Bench, Probe };

std::string_view to_string(Command c);

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown for --help; carries the help text.
class HelpRequested : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    Command command = Command::Gtp;
    SearchConfig search;
    /// --threads as given; one entry except for sweeps.
    std::vector<int> thread_points{1};
    int opponent_threads = 0;
    BudgetScope budget_scope = BudgetScope::PerThread;
    int board_size = 9;
    int games = 100;
    int parallel_games = 1;
    bool identical = false;
    KernelSpec kernel;
    std::string bench_mode = "kernel";
    int sweep_max_threads = 0;
    std::string probe_kind = "tree";
    std::string output_path;
    std::string records_path;
    std::string log_level = "warn";
    /// Effective key=value settings, echoed into run metadata.
    std::vector<std::pair<std::string, std::string>> echo;

    EnginePairing pairing() const;
    SweepOptions sweep() const;
};

/// Parses arguments (without the program name). A `--config FILE` of
/// key=value lines supplies defaults; the command line overrides the file and
/// the MCTS_AFFINITY environment variable overrides the file's affinity.
/// Throws UsageError or HelpRequested.
RunConfig parse_args(const std::vector<std::string>& args);

/// Executes a parsed configuration. Returns 0 on success and 2 on a runtime
/// error (reported on err).
int run(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);

/// parse_args + run with exit code 1 for usage errors.
int main_entry(int argc, char** argv);

/// Writes `content` to a temporary file beside `path` and renames it into
/// place, so `path` never holds partial output.
void write_file_atomically(const std::string& path, const std::string& content);

/// JSON provenance record: config echo, seed, host topology, version.
std::string provenance_json(const RunConfig& config, const std::string& extra_json = "{}");

}  // namespace parago
