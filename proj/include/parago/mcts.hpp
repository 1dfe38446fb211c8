#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "parago/affinity.hpp"
#include "parago/board.hpp"

namespace parago {

using Rng = std::mt19937_64;

struct Budget {
    enum class Kind { Playouts, WallTime };

    Kind kind = Kind::Playouts;
    /// Playout count or milliseconds.
    std::int64_t amount = 1000;

    static Budget playouts(std::int64_t n) { return {Kind::Playouts, n}; }
    static Budget wall_time_ms(std::int64_t ms) { return {Kind::WallTime, ms}; }
    bool is_playouts() const { return kind == Kind::Playouts; }
    std::string to_string() const;
};

enum class LockMode { LocalLock, LockFree };

std::string_view to_string(LockMode m);
/// "local" or "free".
LockMode parse_lock_mode(std::string_view text);

struct SearchConfig {
    int threads = 1;
    Budget budget = Budget::playouts(1000);
    LockMode lock_mode = LockMode::LockFree;
    AffinityPolicy affinity = AffinityPolicy::None;
    double exploration_c = 0.7;
    int virtual_loss_size = 1;
    int expansion_threshold = 1;
    double komi = 6.0;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

enum class ExpansionState : std::uint8_t { Unexpanded, Expanding, Expanded };

/// One node of the shared search tree. Statistics are atomic so that the
/// same layout serves the sequential and the tree-parallel search. Rewards
/// are kept in half-point units so that draws (0.5) add exactly.
struct SearchNode {
    std::atomic<std::uint32_t> visits{0};
    std::atomic<std::uint32_t> reward_halves{0};
    std::atomic<std::uint32_t> virtual_loss{0};
    std::atomic<SearchNode*> children{nullptr};
    std::uint16_t child_count = 0;
    std::atomic<ExpansionState> state{ExpansionState::Unexpanded};
    std::atomic<bool> locked{false};
    std::int8_t row = -1;
    std::int8_t col = -1;

    SearchNode() = default;
    SearchNode(const SearchNode&) = delete;
    SearchNode& operator=(const SearchNode&) = delete;

    Move move() const { return row < 0 ? Move::pass() : Move::play(row, col); }
    void set_move(Move m);
    double total_reward() const { return reward_halves.load(std::memory_order_relaxed) / 2.0; }
    bool is_expanded() const { return state.load(std::memory_order_acquire) == ExpansionState::Expanded; }
    std::span<SearchNode> child_span() const;

    void lock();
    bool try_lock() { return !locked.exchange(true, std::memory_order_acquire); }
    void unlock();
};

/// Per-thread bump storage for child arrays. Blocks live until the arena is
/// destroyed, so published nodes never move and abandoned blocks are simply
/// retired.
class NodeArena {
public:
    SearchNode* allocate(std::size_t count);
    std::size_t allocated_nodes() const { return allocated_; }

private:
    std::vector<std::unique_ptr<SearchNode[]>> blocks_;
    std::size_t allocated_ = 0;
};

/// Root plus one arena per worker. Discarded as a whole after each move.
class SearchTree {
public:
    explicit SearchTree(int workers = 1);

    SearchNode& root() { return *root_; }
    const SearchNode& root() const { return *root_; }
    NodeArena& arena(int worker) { return arenas_.at(static_cast<std::size_t>(worker)); }

    /// Root plus every published child.
    std::uint64_t node_count() const { return published_nodes_.load() + 1; }
    std::uint64_t publications() const { return publications_.load(); }
    void note_publication(std::size_t children) {
        published_nodes_.fetch_add(children, std::memory_order_relaxed);
        publications_.fetch_add(1, std::memory_order_relaxed);
    }

private:
    std::unique_ptr<SearchNode> root_;
    std::vector<NodeArena> arenas_;
    std::atomic<std::uint64_t> published_nodes_{0};
    std::atomic<std::uint64_t> publications_{0};
};

struct TreeWalk {
    std::uint64_t nodes = 0;
    std::uint64_t expanded = 0;
    std::uint64_t virtual_loss_total = 0;
    int max_depth = 0;
    /// visits - sum(child visits), min and max over expanded nodes.
    std::int64_t min_own_visits = 0;
    std::int64_t max_own_visits = 0;
    bool reward_within_visits = true;
    bool children_distinct = true;
    /// Only checked when a root board is supplied: every child list equals
    /// the legal moves of its position.
    bool children_legal = true;
    bool expanded_have_children = true;
};

/// Full walk of the published tree.
TreeWalk walk_tree(const SearchTree& tree, const Board* root_board = nullptr);

struct SearchStats {
    std::uint64_t playouts = 0;
    double elapsed_ms = 0.0;
    std::uint64_t nodes = 0;
    int max_depth = 0;
    Move chosen_move = Move::pass();
    int board_size = 9;
    int threads = 1;
    std::vector<std::uint64_t> per_thread_playouts;
    /// LocalLock: nanoseconds spent blocked on node locks.
    std::vector<std::uint64_t> lock_wait_ns;
    /// LockFree: expansions lost to another thread.
    std::vector<std::uint64_t> lost_expansions;
    bool pinning_effective = false;

    double playouts_per_sec() const;
    /// playouts,elapsed_ms,nodes,max_depth,chosen_move
    std::string csv_row() const;
    static std::string csv_header() { return "playouts,elapsed_ms,nodes,max_depth,chosen_move"; }
};

struct SearchResult {
    Move move = Move::pass();
    SearchStats stats;
    std::unique_ptr<SearchTree> tree;
};

/// UCB1 over children with virtual losses counted as zero-reward visits.
/// Unvisited children are taken first; ties go to the lowest index.
/// Throws std::logic_error("select on leaf") for a node without children.
std::size_t select_child(const SearchNode& node, double exploration_c);

/// path[0] receives `reward`, path[1] receives 1 - reward, and so on.
void backpropagate(std::span<SearchNode* const> path, double reward);

/// Uniformly random legal move that does not fill one of the mover's
/// single-point eyes; Pass when none exists.
Move policy_move(const Board& board, Rng& rng);

/// Random game from `board` until two passes or 3 * size^2 moves. Returns
/// 1 / 0.5 / 0 for a win / draw / loss of the side to move at the start.
double playout(Board& board, Rng& rng, double komi);

/// Single-threaded creation of one child per legal move.
void expand_node(SearchNode& node, const Board& board, SearchTree& tree, int worker = 0);

/// Sequential UCT; config.threads must be 1. See parallel_search.
SearchResult search(const Board& board, const SearchConfig& config);

/// Most visited root child, lowest index on ties; nullptr without children.
const SearchNode* best_root_child(const SearchTree& tree);

}  // namespace parago
