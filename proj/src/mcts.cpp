#include "parago/mcts.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

namespace parago {

std::string Budget::to_string() const {
    return is_playouts() ? "playouts:" + std::to_string(amount) : "ms:" + std::to_string(amount);
}

std::string_view to_string(LockMode m) {
    return m == LockMode::LocalLock ? "local" : "free";
}

LockMode parse_lock_mode(std::string_view text) {
    if (text == "local") return LockMode::LocalLock;
    if (text == "free") return LockMode::LockFree;
    throw std::invalid_argument("unknown lock mode: " + std::string(text));
}

void SearchConfig::validate() const {
    if (threads < 1 || threads > 1024) throw std::invalid_argument("threads must be in [1, 1024]");
    if (budget.amount <= 0) throw std::invalid_argument("empty budget");
    if (!(exploration_c > 0.0)) throw std::invalid_argument("exploration_c must be positive");
    if (virtual_loss_size < 1) throw std::invalid_argument("virtual_loss_size must be at least 1");
    if (expansion_threshold < 1) throw std::invalid_argument("expansion_threshold must be at least 1");
}

void SearchNode::set_move(Move m) {
    if (m.is_pass()) {
        row = col = -1;
    } else {
        row = static_cast<std::int8_t>(m.point.row);
        col = static_cast<std::int8_t>(m.point.col);
    }
}

std::span<SearchNode> SearchNode::child_span() const {
    if (!is_expanded()) return {};
    return {children.load(std::memory_order_acquire), child_count};
}

void SearchNode::lock() {
    for (int spins = 0; locked.exchange(true, std::memory_order_acquire); ++spins) {
        while (locked.load(std::memory_order_relaxed)) {
            if (++spins > 64) std::this_thread::yield();
        }
    }
}

void SearchNode::unlock() { locked.store(false, std::memory_order_release); }

SearchNode* NodeArena::allocate(std::size_t count) {
    blocks_.push_back(std::make_unique<SearchNode[]>(count));
    allocated_ += count;
    return blocks_.back().get();
}

SearchTree::SearchTree(int workers)
    : root_(std::make_unique<SearchNode>()), arenas_(static_cast<std::size_t>(std::max(workers, 1))) {}

TreeWalk walk_tree(const SearchTree& tree, const Board* root_board) {
    TreeWalk w;
    w.min_own_visits = std::numeric_limits<std::int64_t>::max();
    w.max_own_visits = std::numeric_limits<std::int64_t>::min();
    struct Frame {
        const SearchNode* node;
        int depth;
        std::optional<Board> board;
    };
    std::vector<Frame> stack;
    stack.push_back({&tree.root(), 0, root_board ? std::optional<Board>(*root_board) : std::nullopt});
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        const SearchNode& n = *f.node;
        ++w.nodes;
        w.max_depth = std::max(w.max_depth, f.depth);
        w.virtual_loss_total += n.virtual_loss.load();
        if (n.reward_halves.load() > 2 * static_cast<std::uint64_t>(n.visits.load())) w.reward_within_visits = false;
        if (!n.is_expanded()) continue;
        ++w.expanded;
        auto kids = n.child_span();
        if (kids.empty()) w.expanded_have_children = false;
        std::int64_t child_visits = 0;
        for (const auto& c : kids) child_visits += c.visits.load();
        const std::int64_t own = static_cast<std::int64_t>(n.visits.load()) - child_visits;
        w.min_own_visits = std::min(w.min_own_visits, own);
        w.max_own_visits = std::max(w.max_own_visits, own);
        for (std::size_t i = 0; i < kids.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                if (kids[i].move() == kids[j].move()) w.children_distinct = false;
            }
        }
        if (f.board) {
            if (f.board->game_over()) {
                w.children_legal = false;
            } else {
                const auto legal = f.board->legal_moves();
                if (legal.size() != kids.size()) {
                    w.children_legal = false;
                } else {
                    for (std::size_t i = 0; i < kids.size(); ++i) {
                        if (!(legal[i] == kids[i].move())) w.children_legal = false;
                    }
                }
            }
        }
        for (const auto& c : kids) {
            std::optional<Board> next;
            if (f.board && w.children_legal) next = f.board->apply_move(c.move());
            stack.push_back({&c, f.depth + 1, std::move(next)});
        }
    }
    if (w.expanded == 0) w.min_own_visits = w.max_own_visits = 0;
    return w;
}

double SearchStats::playouts_per_sec() const {
    return elapsed_ms > 0.0 ? static_cast<double>(playouts) * 1000.0 / elapsed_ms : 0.0;
}

std::string SearchStats::csv_row() const {
    std::ostringstream out;
    out << playouts << ',' << std::fixed << std::setprecision(3) << elapsed_ms << ',' << nodes << ','
        << max_depth << ',' << to_vertex(chosen_move, board_size);
    return out.str();
}

std::size_t select_child(const SearchNode& node, double exploration_c) {
    const SearchNode* kids = node.children.load(std::memory_order_acquire);
    if (kids == nullptr || node.child_count == 0 || !node.is_expanded()) {
        throw std::logic_error("select on leaf");
    }
    const double parent_eff = static_cast<double>(node.visits.load(std::memory_order_relaxed)) +
                              static_cast<double>(node.virtual_loss.load(std::memory_order_relaxed));
    const double log_parent = parent_eff > 0.0 ? std::log(parent_eff) : 0.0;
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < node.child_count; ++i) {
        const SearchNode& c = kids[i];
        const double eff = static_cast<double>(c.visits.load(std::memory_order_relaxed)) +
                           static_cast<double>(c.virtual_loss.load(std::memory_order_relaxed));
        if (eff == 0.0) return i;
        const double q = c.reward_halves.load(std::memory_order_relaxed) / 2.0 / eff;
        const double value = q + exploration_c * std::sqrt(log_parent / eff);
        if (value > best_value) {
            best_value = value;
            best = i;
        }
    }
    return best;
}

void backpropagate(std::span<SearchNode* const> path, double reward) {
    auto halves = static_cast<std::uint32_t>(std::lround(reward * 2.0));
    for (SearchNode* n : path) {
        n->visits.fetch_add(1, std::memory_order_relaxed);
        n->reward_halves.fetch_add(halves, std::memory_order_relaxed);
        halves = 2 - halves;
    }
}

Move policy_move(const Board& board, Rng& rng) {
    const int n = board.size();
    std::array<Point, Board::kMaxSize * Board::kMaxSize> candidates;
    int count = 0;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (board.at(r, c) == Color::Empty) candidates[static_cast<std::size_t>(count++)] = {r, c};
        }
    }
    const Color me = board.to_move();
    while (count > 0) {
        std::uniform_int_distribution<int> pick(0, count - 1);
        const int i = pick(rng);
        const Point p = candidates[static_cast<std::size_t>(i)];
        if (!board.is_single_point_eye(p, me) && board.is_legal(Move::play(p.row, p.col))) {
            return Move::play(p.row, p.col);
        }
        candidates[static_cast<std::size_t>(i)] = candidates[static_cast<std::size_t>(--count)];
    }
    return Move::pass();
}

double playout(Board& board, Rng& rng, double komi) {
    const Color start = board.to_move();
    const int cap = 3 * board.size() * board.size();
    for (int moves = 0; !board.game_over() && moves < cap; ++moves) {
        board.play(policy_move(board, rng));
    }
    const GameResult r = board.score(komi);
    if (r.winner == Winner::Draw) return 0.5;
    const Color winner = r.winner == Winner::Black ? Color::Black : Color::White;
    return winner == start ? 1.0 : 0.0;
}

void expand_node(SearchNode& node, const Board& board, SearchTree& tree, int worker) {
    if (node.is_expanded()) return;
    const auto moves = board.legal_moves();
    SearchNode* block = tree.arena(worker).allocate(moves.size());
    for (std::size_t i = 0; i < moves.size(); ++i) block[i].set_move(moves[i]);
    node.child_count = static_cast<std::uint16_t>(moves.size());
    node.children.store(block, std::memory_order_release);
    node.state.store(ExpansionState::Expanded, std::memory_order_release);
    tree.note_publication(moves.size());
}

const SearchNode* best_root_child(const SearchTree& tree) {
    auto kids = tree.root().child_span();
    const SearchNode* best = nullptr;
    for (const auto& c : kids) {
        if (best == nullptr || c.visits.load() > best->visits.load()) best = &c;
    }
    return best;
}

SearchResult search(const Board& board, const SearchConfig& config) {
    config.validate();
    if (config.threads != 1) throw std::invalid_argument("sequential search runs exactly one thread");
    if (board.game_over()) throw GameFinished();

    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const auto deadline = start + std::chrono::milliseconds(config.budget.amount);

    SearchResult result;
    result.tree = std::make_unique<SearchTree>(1);
    SearchTree& tree = *result.tree;
    Rng rng(config.seed);
    std::vector<SearchNode*> path;
    std::uint64_t done = 0;
    int max_depth = 0;

    while (config.budget.is_playouts() ? done < static_cast<std::uint64_t>(config.budget.amount)
                                       : (done == 0 || Clock::now() < deadline)) {
        Board b = board;
        SearchNode* node = &tree.root();
        path.assign(1, node);
        while (node->is_expanded()) {
            node = &node->children.load(std::memory_order_relaxed)[select_child(*node, config.exploration_c)];
            b.play(node->move());
            path.push_back(node);
        }
        if (!b.game_over() &&
            node->visits.load(std::memory_order_relaxed) >= static_cast<std::uint32_t>(config.expansion_threshold)) {
            expand_node(*node, b, tree);
            node = &node->children.load(std::memory_order_relaxed)[select_child(*node, config.exploration_c)];
            b.play(node->move());
            path.push_back(node);
        }
        const double leaf = playout(b, rng, config.komi);
        const int depth = static_cast<int>(path.size()) - 1;
        backpropagate(path, depth % 2 == 0 ? 1.0 - leaf : leaf);
        max_depth = std::max(max_depth, depth);
        ++done;
    }

    const SearchNode* best = best_root_child(tree);
    if (best) {
        result.move = best->move();
    } else {
        Rng fallback(config.seed);
        result.move = policy_move(board, fallback);
    }

    auto& s = result.stats;
    s.playouts = done;
    s.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    s.nodes = tree.node_count();
    s.max_depth = max_depth;
    s.chosen_move = result.move;
    s.board_size = board.size();
    s.threads = 1;
    s.per_thread_playouts = {done};
    s.lock_wait_ns = {0};
    s.lost_expansions = {0};
    return result;
}

}  // namespace parago
