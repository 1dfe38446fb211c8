#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "parago/cli.hpp"

using namespace parago;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("parago_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_args(const std::vector<std::string>& args, std::string& out, std::string& err) {
    std::istringstream in;
    std::ostringstream o;
    std::ostringstream e;
    const int code = run(parse_args(args), in, o, e);
    out = o.str();
    err = e.str();
    return code;
}

}  // namespace

TEST(ParseArgs, SweepPoints) {
    const RunConfig c = parse_args({"sweep", "--threads", "2,4,8", "--games", "100", "--budget-playouts", "1000"});
    EXPECT_EQ(c.command, Command::Sweep);
    EXPECT_EQ(c.thread_points, (std::vector<int>{2, 4, 8}));
    EXPECT_EQ(c.games, 100);
    EXPECT_TRUE(c.search.budget.is_playouts());
    EXPECT_EQ(c.search.budget.amount, 1000);
    const SweepOptions o = c.sweep();
    EXPECT_EQ(o.points, c.thread_points);
}

TEST(ParseArgs, ConflictingBudgets) {
    try {
        parse_args({"probe", "--budget-ms", "1000", "--budget-playouts", "5"});
        FAIL() << "no error";
    } catch (const UsageError& e) {
        EXPECT_STREQ(e.what(), "conflicting budgets");
    }
}

TEST(ParseArgs, GtpSetup) {
    ::unsetenv("MCTS_AFFINITY");
    const RunConfig c = parse_args({"gtp", "--threads", "4", "--affinity", "compact"});
    EXPECT_EQ(c.command, Command::Gtp);
    EXPECT_EQ(c.search.threads, 4);
    EXPECT_EQ(c.search.affinity, AffinityPolicy::Compact);
    EXPECT_EQ(c.search.lock_mode, LockMode::LockFree);
}

TEST(ParseArgs, Rejections) {
    EXPECT_THROW(parse_args({}), UsageError);
    EXPECT_THROW(parse_args({"probe", "--frobnicate"}), UsageError);
    EXPECT_THROW(parse_args({"dance"}), UsageError);
    EXPECT_THROW(parse_args({"probe", "--lock", "global"}), UsageError);
    EXPECT_THROW(parse_args({"probe", "--threads", "2,4"}), UsageError);
    EXPECT_THROW(parse_args({"sweep", "--threads", "1,2"}), UsageError);
    EXPECT_THROW(parse_args({"probe", "--budget-ms", "0"}), UsageError);
    EXPECT_THROW(parse_args({"--help"}), HelpRequested);
}

TEST(ParseArgs, ConfigFileAndPrecedence) {
    const fs::path file = scratch("run.cfg");
    std::ofstream(file) << "# defaults\nkomi = 7.5\nbudget-ms = 250\naffinity = scatter\nseed=9\nlock=local\n";
    ::unsetenv("MCTS_AFFINITY");
    RunConfig c = parse_args({"probe", "--config", file.string(), "--seed", "3"});
    EXPECT_DOUBLE_EQ(c.search.komi, 7.5);
    EXPECT_EQ(c.search.seed, 3u);
    EXPECT_EQ(c.search.budget.kind, Budget::Kind::WallTime);
    EXPECT_EQ(c.search.affinity, AffinityPolicy::Scatter);
    EXPECT_EQ(c.search.lock_mode, LockMode::LocalLock);

    // A budget on the command line replaces the file's, even of the other kind.
    c = parse_args({"probe", "--config", file.string(), "--budget-playouts", "10"});
    EXPECT_TRUE(c.search.budget.is_playouts());

    ::setenv("MCTS_AFFINITY", "balanced", 1);
    c = parse_args({"probe", "--config", file.string()});
    EXPECT_EQ(c.search.affinity, AffinityPolicy::Balanced);
    c = parse_args({"probe", "--config", file.string(), "--affinity", "none"});
    EXPECT_EQ(c.search.affinity, AffinityPolicy::None);
    ::unsetenv("MCTS_AFFINITY");

    std::ofstream(file) << "komi\n";
    EXPECT_THROW(parse_args({"probe", "--config", file.string()}), UsageError);
    EXPECT_THROW(parse_args({"probe", "--config", (file.string() + ".missing")}), UsageError);
}

TEST(Run, BenchEmitsRow) {
    std::string out;
    std::string err;
    ASSERT_EQ(run_args({"bench", "--threads", "1", "--length", "1024", "--reps", "10"}, out, err), 0) << err;
    EXPECT_EQ(out.substr(0, out.find('\n')), bench_csv_header());
    EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 2);
    EXPECT_NE(err.find("\"version\""), std::string::npos);
}

TEST(Run, SweepWritesRowsAndSummary) {
    const fs::path csv = scratch("sweep.csv");
    std::string out;
    std::string err;
    ASSERT_EQ(run_args({"sweep", "--threads", "2,4", "--games", "2", "--board-size", "3", "--budget-playouts", "2",
                        "--out", csv.string()},
                       out, err),
              0)
        << err;
    const std::string text = slurp(csv);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
    EXPECT_NE(out.find("sweep: 2 points, 4 games total"), std::string::npos);
    const std::string meta = slurp(csv.string() + ".meta.json");
    EXPECT_NE(meta.find("\"seed\""), std::string::npos);
    EXPECT_NE(meta.find("\"host\""), std::string::npos);
    EXPECT_NE(meta.find("\"config\""), std::string::npos);
}

// Byte-identical output needs single-threaded engines: with more threads the
// shared tree depends on scheduling.
TEST(Run, PlayoutModeOutputIsReproducible) {
    const fs::path a = scratch("a.csv");
    const fs::path b = scratch("b.csv");
    std::string out;
    std::string err;
    for (const auto& p : {a, b}) {
        ASSERT_EQ(run_args({"selfplay", "--threads", "1", "--opponent-threads", "1", "--games", "3", "--board-size", "5", "--budget-playouts",
                            "10", "--seed", "5", "--out", p.string(), "--records", p.string() + ".txt"},
                           out, err),
                  0)
            << err;
    }
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(slurp(a.string() + ".txt"), slurp(b.string() + ".txt"));
    EXPECT_NE(slurp(a.string() + ".txt").find("RE "), std::string::npos);

    for (const auto& p : {a, b}) {
        ASSERT_EQ(run_args({"probe", "--budget-playouts", "300", "--seed", "2", "--out", p.string()}, out, err), 0);
    }
    EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Run, RuntimeErrorExitsTwo) {
    std::string out;
    std::string err;
    EXPECT_EQ(run_args({"bench", "--element-type", "int32", "--reps", "2000000000", "--length", "4"}, out, err), 2);
    EXPECT_NE(err.find("parago bench:"), std::string::npos);
}

TEST(AtomicWrite, ReplacesWholeFile) {
    const fs::path p = scratch("atomic.txt");
    write_file_atomically(p.string(), "first\n");
    write_file_atomically(p.string(), "second\n");
    EXPECT_EQ(slurp(p), "second\n");
    for (const auto& entry : fs::directory_iterator(p.parent_path())) {
        EXPECT_EQ(entry.path().filename().string().find("atomic.txt.tmp"), std::string::npos);
    }
}

TEST(AtomicWrite, FailureLeavesNoFile) {
    const fs::path p = scratch("no_such_dir") / "out.csv";
    EXPECT_THROW(write_file_atomically(p.string(), "x"), std::runtime_error);
    EXPECT_FALSE(fs::exists(p));
}

#ifdef PARAGO_BIN
TEST(AtomicWrite, KilledRunLeavesNoOutput) {
    const fs::path p = scratch("killed.csv");
    fs::remove(p);
    const pid_t pid = ::fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
        ::execl(PARAGO_BIN, PARAGO_BIN, "sweep", "--threads", "2", "--games", "1000", "--budget-playouts", "200",
                "--out", p.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::usleep(400 * 1000);
    ::kill(pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
    ASSERT_TRUE(WIFSIGNALED(status));
    EXPECT_FALSE(fs::exists(p));
    EXPECT_FALSE(fs::exists(p.string() + ".meta.json"));
}
#endif
