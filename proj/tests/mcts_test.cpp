#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <random>
#include <vector>

#include "oracle/go_oracle.hpp"
#include "parago/mcts.hpp"

using namespace parago;
using HighPrecision = boost::multiprecision::cpp_bin_float_50;

namespace {

struct Stat {
    std::uint32_t visits;
    double reward;
};

// Builds a root whose children carry the given statistics.
class Fixture {
public:
    Fixture(std::uint32_t parent_visits, const std::vector<Stat>& kids) {
        SearchNode& root = tree_.root();
        SearchNode* block = tree_.arena(0).allocate(kids.size());
        for (std::size_t i = 0; i < kids.size(); ++i) {
            block[i].set_move(Move::play(0, static_cast<int>(i)));
            block[i].visits = kids[i].visits;
            block[i].reward_halves = static_cast<std::uint32_t>(kids[i].reward * 2);
        }
        root.visits = parent_visits;
        root.child_count = static_cast<std::uint16_t>(kids.size());
        root.children = block;
        root.state = ExpansionState::Expanded;
    }
    SearchNode& root() { return tree_.root(); }

private:
    SearchTree tree_;
};

HighPrecision ucb(const Stat& s, std::uint32_t parent, double c) {
    const HighPrecision n(s.visits);
    return HighPrecision(s.reward) / n + HighPrecision(c) * sqrt(log(HighPrecision(parent)) / n);
}

// Straight-line reimplementation of the playout policy on top of the oracle
// rules: uniform over empty points that are legal and not the mover's own
// single-point eye, else pass.
bool oracle_eye(const oracle::Position& p, int i, char me) {
    const int n = p.n;
    if (p.grid[static_cast<std::size_t>(i)] != '.') return false;
    for (int j : oracle::neighbours(n, i)) {
        if (p.grid[static_cast<std::size_t>(j)] != me) return false;
    }
    const int r = i / n;
    const int c = i % n;
    int enemy = 0;
    int off = 0;
    for (int dr : {-1, 1}) {
        for (int dc : {-1, 1}) {
            const int rr = r + dr;
            const int cc = c + dc;
            if (rr < 0 || cc < 0 || rr >= n || cc >= n) {
                ++off;
            } else if (p.grid[static_cast<std::size_t>(rr * n + cc)] == oracle::other(me)) {
                ++enemy;
            }
        }
    }
    return off > 0 ? enemy == 0 : enemy <= 1;
}

double oracle_playout(int n, double komi, std::mt19937& rng) {
    oracle::Position p(n);
    for (int moves = 0; !p.over() && moves < 3 * n * n; ++moves) {
        std::vector<int> options;
        for (int i = 0; i < n * n; ++i) {
            if (oracle::legal(p, i) && !oracle_eye(p, i, p.to_move)) options.push_back(i);
        }
        const int pick = options.empty() ? -1 : options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
        p = oracle::apply(p, pick);
    }
    const oracle::Score s = oracle::area(p.grid, n);
    const double margin = s.black - s.white - komi;
    // Reward for Black, who starts.
    return margin > 0 ? 1.0 : margin < 0 ? 0.0 : 0.5;
}

}  // namespace

TEST(SelectChild, SingleChild) {
    Fixture f(5, {{5, 2}});
    EXPECT_EQ(select_child(f.root(), 0.7), 0u);
}

TEST(SelectChild, ZeroExplorationIsGreedy) {
    Fixture f(20, {{10, 7}, {10, 3}});
    EXPECT_EQ(select_child(f.root(), 0.0), 0u);
}

TEST(SelectChild, MatchesHighPrecisionUcb) {
    const std::vector<Stat> kids{{100, 60}, {2, 1}};
    Fixture f(102, kids);
    const HighPrecision u0 = ucb(kids[0], 102, 0.7);
    const HighPrecision u1 = ucb(kids[1], 102, 0.7);
    const std::size_t expected = u1 > u0 ? 1 : 0;
    EXPECT_EQ(select_child(f.root(), 0.7), expected);
    EXPECT_EQ(expected, 1u);
}

TEST(SelectChild, RandomStatisticsAgreeWithOracle) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t k = 2 + rng() % 6;
        std::vector<Stat> kids;
        std::uint32_t total = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const std::uint32_t v = 1 + static_cast<std::uint32_t>(rng() % 500);
            kids.push_back({v, static_cast<double>(rng() % (2 * v + 1)) / 2.0});
            total += v;
        }
        const double c = 0.1 + static_cast<double>(rng() % 100) / 50.0;
        Fixture f(total + 1, kids);
        std::size_t best = 0;
        HighPrecision best_value = ucb(kids[0], total + 1, c);
        for (std::size_t i = 1; i < k; ++i) {
            const HighPrecision v = ucb(kids[i], total + 1, c);
            if (v > best_value) {
                best_value = v;
                best = i;
            }
        }
        const std::size_t got = select_child(f.root(), c);
        if (got != best) {
            // Only an exact or near tie may disagree.
            ASSERT_LT(static_cast<double>(abs(ucb(kids[got], total + 1, c) - best_value)), 1e-12);
        }
    }
}

TEST(SelectChild, UnvisitedFirstAndLowestIndexTies) {
    Fixture f(10, {{5, 5}, {0, 0}, {0, 0}});
    EXPECT_EQ(select_child(f.root(), 0.7), 1u);
    Fixture g(20, {{10, 5}, {10, 5}});
    EXPECT_EQ(select_child(g.root(), 0.7), 0u);
}

TEST(SelectChild, VirtualLossSteersAway) {
    Fixture f(20, {{10, 6}, {10, 5}});
    EXPECT_EQ(select_child(f.root(), 0.7), 0u);
    f.root().child_span()[0].virtual_loss = 3;
    EXPECT_EQ(select_child(f.root(), 0.7), 1u);
}

TEST(SelectChild, LeafThrows) {
    SearchTree t;
    try {
        select_child(t.root(), 0.7);
        FAIL() << "no error";
    } catch (const std::logic_error& e) {
        EXPECT_STREQ(e.what(), "select on leaf");
    }
}

TEST(Backpropagate, SingleNode) {
    SearchNode n;
    SearchNode* path[] = {&n};
    backpropagate(path, 1.0);
    EXPECT_EQ(n.visits.load(), 1u);
    EXPECT_DOUBLE_EQ(n.total_reward(), 1.0);
}

TEST(Backpropagate, AlternatesPerspective) {
    SearchNode root;
    SearchNode child;
    SearchNode grandchild;
    SearchNode* path[] = {&root, &child, &grandchild};
    backpropagate(path, 1.0);
    backpropagate(path, 0.5);
    EXPECT_EQ(root.visits.load(), 2u);
    EXPECT_DOUBLE_EQ(root.total_reward(), 1.5);
    EXPECT_DOUBLE_EQ(child.total_reward(), 0.5);
    EXPECT_DOUBLE_EQ(grandchild.total_reward(), 1.5);
}

TEST(Playout, ForcedDoublePass) {
    // Black owns everything with two single-point eyes; White can only pass
    // and Black will not fill its own eyes.
    Board b = Board::from_rows({".XXXX",
                                "XXXXX",
                                "XXXXX",
                                "XXXXX",
                                "XXXX."},
                               Color::White);
    Rng rng(1);
    const double r = playout(b, rng, 0.0);
    EXPECT_TRUE(b.game_over());
    EXPECT_EQ(b.move_number(), 2);
    EXPECT_EQ(r, 0.0);
    EXPECT_EQ(b.score(0.0).winner, Winner::Black);
    EXPECT_DOUBLE_EQ(b.score(0.0).margin, 25.0);
}

TEST(Playout, RewardIsForSideToMove) {
    Board b = Board::from_rows({".XXXX", "XXXXX", "XXXXX", "XXXXX", "XXXX."}, Color::Black);
    Rng rng(1);
    EXPECT_EQ(playout(b, rng, 0.0), 1.0);
}

TEST(Playout, EndsWithinCap) {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        Board b(5);
        const double r = playout(b, rng, 0.5);
        EXPECT_TRUE(r == 0.0 || r == 1.0);
        EXPECT_LE(b.move_number(), 75);
    }
}

TEST(Playout, MatchesIndependentReimplementationOnThreeByThree) {
    constexpr int kPlayouts = 10000;
    Rng rng(11);
    double engine = 0.0;
    for (int i = 0; i < kPlayouts; ++i) {
        Board b(3);
        engine += playout(b, rng, 0.0);
    }
    std::mt19937 orng(12);
    double reference = 0.0;
    for (int i = 0; i < kPlayouts; ++i) reference += oracle_playout(3, 0.0, orng);
    EXPECT_NEAR(engine / kPlayouts, reference / kPlayouts, 0.05);
}

TEST(Search, SinglePlayout) {
    SearchConfig cfg;
    cfg.budget = Budget::playouts(1);
    const Board b(9);
    const SearchResult r = search(b, cfg);
    EXPECT_EQ(r.tree->root().visits.load(), 1u);
    EXPECT_GE(r.stats.nodes, 1u);
    EXPECT_TRUE(b.is_legal(r.move));
    EXPECT_EQ(r.stats.playouts, 1u);
}

TEST(Search, DeterministicWithFixedSeed) {
    SearchConfig cfg;
    cfg.budget = Budget::playouts(1000);
    cfg.seed = 42;
    const Board b(9);
    const SearchResult a = search(b, cfg);
    const SearchResult c = search(b, cfg);
    EXPECT_EQ(a.move, c.move);
    EXPECT_EQ(a.stats.nodes, c.stats.nodes);
    EXPECT_EQ(a.stats.max_depth, c.stats.max_depth);
    EXPECT_EQ(a.stats.playouts, c.stats.playouts);
    EXPECT_EQ(a.tree->root().reward_halves.load(), c.tree->root().reward_halves.load());
}

TEST(Search, LargerBudgetGrowsTree) {
    SearchConfig cfg;
    Board b(9);
    b.play(Move::play(4, 4));
    cfg.budget = Budget::playouts(1000);
    const auto small = search(b, cfg);
    cfg.budget = Budget::playouts(10000);
    const auto large = search(b, cfg);
    EXPECT_GT(large.stats.nodes, small.stats.nodes);
}

TEST(Search, RootVisitsCountPlayouts) {
    for (int n : {1, 2, 17, 300}) {
        SearchConfig cfg;
        cfg.budget = Budget::playouts(n);
        const Board b(5);
        const auto r = search(b, cfg);
        EXPECT_EQ(r.tree->root().visits.load(), static_cast<std::uint32_t>(n));
        const TreeWalk w = walk_tree(*r.tree, &b);
        EXPECT_EQ(w.nodes, r.stats.nodes);
        EXPECT_EQ(w.virtual_loss_total, 0u);
        EXPECT_TRUE(w.reward_within_visits);
        EXPECT_TRUE(w.children_legal);
        EXPECT_TRUE(w.children_distinct);
        EXPECT_TRUE(w.expanded_have_children);
        // Each expanded node's own visit is the playout that reached it as a leaf.
        if (w.expanded > 0) {
            EXPECT_EQ(w.min_own_visits, 1);
            EXPECT_EQ(w.max_own_visits, 1);
        }
    }
}

TEST(Search, RejectsBadConfig) {
    SearchConfig cfg;
    cfg.budget = Budget::playouts(0);
    try {
        search(Board(9), cfg);
        FAIL() << "no error";
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "empty budget");
    }
    cfg.budget = Budget::playouts(10);
    Board done(9);
    done.play(Move::pass());
    done.play(Move::pass());
    EXPECT_THROW(search(done, cfg), GameFinished);
}

TEST(Search, FindsCapture) {
    // White D3 group is in atari; Black should take it.
    const Board b = Board::from_rows({".....",
                                      "..X..",
                                      ".XOX.",
                                      ".XO..",
                                      "..X.."},
                                     Color::Black);
    SearchConfig cfg;
    cfg.budget = Budget::playouts(4000);
    cfg.komi = 0.5;
    const auto r = search(b, cfg);
    EXPECT_EQ(r.move, Move::play(1, 3));
}

TEST(Search, WallTimeBudgetRunsAtLeastOnce) {
    SearchConfig cfg;
    cfg.budget = Budget::wall_time_ms(20);
    const auto r = search(Board(9), cfg);
    EXPECT_GE(r.stats.playouts, 1u);
    EXPECT_EQ(r.tree->root().visits.load(), r.stats.playouts);
}
