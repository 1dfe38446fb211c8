#include "parago/parallel.hpp"

#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "json.hpp"
#include <spdlog/spdlog.h>

namespace parago {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ns(Clock::time_point since) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count());
}

void timed_lock(SearchNode& node, std::uint64_t* wait_ns) {
    if (node.try_lock()) return;
    const auto t0 = Clock::now();
    node.lock();
    if (wait_ns) *wait_ns += elapsed_ns(t0);
}

SearchNode* fill_block(const Board& board, SearchTree& tree, int worker, std::size_t& count) {
    const auto moves = board.legal_moves();
    SearchNode* block = tree.arena(worker).allocate(moves.size());
    for (std::size_t i = 0; i < moves.size(); ++i) block[i].set_move(moves[i]);
    count = moves.size();
    return block;
}

struct WorkerStats {
    std::uint64_t playouts = 0;
    std::uint64_t lock_wait_ns = 0;
    std::uint64_t lost = 0;
    int max_depth = 0;
    bool pinned = false;
};

struct Shared {
    const Board& root_board;
    const SearchConfig& config;
    SearchTree& tree;
    std::atomic<std::int64_t> tickets{0};
    std::atomic<bool> abort{false};
    Clock::time_point deadline{};
};

class Worker {
public:
    Worker(Shared& shared, int index)
        : s_(shared), index_(index), rng_(shared.config.seed ^ static_cast<std::uint64_t>(index)) {}

    void run(WorkerStats& out) {
        const bool by_playouts = s_.config.budget.is_playouts();
        while (!s_.abort.load(std::memory_order_relaxed)) {
            if (by_playouts) {
                if (s_.tickets.fetch_sub(1, std::memory_order_relaxed) <= 0) break;
            } else if (!(index_ == 0 && out.playouts == 0) && Clock::now() >= s_.deadline) {
                break;
            }
            iterate(out);
            ++out.playouts;
        }
    }

private:
    bool local() const { return s_.config.lock_mode == LockMode::LocalLock; }

    /// Picks a child of an expanded node and charges the node a virtual loss.
    SearchNode* descend(SearchNode& node, WorkerStats& out) {
        const auto vl = static_cast<std::uint32_t>(s_.config.virtual_loss_size);
        if (local()) timed_lock(node, &out.lock_wait_ns);
        const std::size_t idx = select_child(node, s_.config.exploration_c);
        node.virtual_loss.fetch_add(vl, std::memory_order_relaxed);
        if (local()) node.unlock();
        return &node.children.load(std::memory_order_acquire)[idx];
    }

    void iterate(WorkerStats& out) {
        const SearchConfig& cfg = s_.config;
        const auto vl = static_cast<std::uint32_t>(cfg.virtual_loss_size);
        Board b = s_.root_board;
        SearchNode* node = &s_.tree.root();
        path_.assign(1, node);
        while (node->is_expanded()) {
            node = descend(*node, out);
            b.play(node->move());
            path_.push_back(node);
        }
        if (!b.game_over() &&
            node->visits.load(std::memory_order_relaxed) >= static_cast<std::uint32_t>(cfg.expansion_threshold)) {
            const ExpandOutcome outcome = local() ? expand_locked(*node, b, s_.tree, index_, &out.lock_wait_ns)
                                                  : expand_lockfree(*node, b, s_.tree, index_);
            if (outcome == ExpandOutcome::Lost) ++out.lost;
            // A lost race may leave the node mid-publication; then the
            // playout simply starts here.
            if (node->is_expanded()) {
                node = descend(*node, out);
                b.play(node->move());
                path_.push_back(node);
            }
        }
        node->virtual_loss.fetch_add(vl, std::memory_order_relaxed);

        const double leaf = playout(b, rng_, cfg.komi);
        const int depth = static_cast<int>(path_.size()) - 1;
        out.max_depth = std::max(out.max_depth, depth);

        auto halves = static_cast<std::uint32_t>(std::lround((depth % 2 == 0 ? 1.0 - leaf : leaf) * 2.0));
        for (SearchNode* n : path_) {
            if (local()) timed_lock(*n, &out.lock_wait_ns);
            n->visits.fetch_add(1, std::memory_order_relaxed);
            n->reward_halves.fetch_add(halves, std::memory_order_relaxed);
            n->virtual_loss.fetch_sub(vl, std::memory_order_relaxed);
            if (local()) n->unlock();
            halves = 2 - halves;
        }
    }

    Shared& s_;
    int index_;
    Rng rng_;
    std::vector<SearchNode*> path_;
};

}  // namespace

ExpandOutcome expand_locked(SearchNode& node, const Board& board, SearchTree& tree, int worker,
                            std::uint64_t* wait_ns) {
    timed_lock(node, wait_ns);
    if (node.state.load(std::memory_order_acquire) == ExpansionState::Expanded) {
        node.unlock();
        return ExpandOutcome::AlreadyExpanded;
    }
    node.state.store(ExpansionState::Expanding, std::memory_order_relaxed);
    std::size_t count = 0;
    SearchNode* block = nullptr;
    try {
        block = fill_block(board, tree, worker, count);
    } catch (...) {
        node.state.store(ExpansionState::Unexpanded, std::memory_order_relaxed);
        node.unlock();
        throw;
    }
    node.child_count = static_cast<std::uint16_t>(count);
    node.children.store(block, std::memory_order_release);
    node.state.store(ExpansionState::Expanded, std::memory_order_release);
    tree.note_publication(count);
    node.unlock();
    return ExpandOutcome::Published;
}

ExpandOutcome expand_lockfree(SearchNode& node, const Board& board, SearchTree& tree, int worker) {
    if (node.state.load(std::memory_order_acquire) != ExpansionState::Unexpanded) {
        return node.is_expanded() ? ExpandOutcome::AlreadyExpanded : ExpandOutcome::Lost;
    }
    std::size_t count = 0;
    SearchNode* block = fill_block(board, tree, worker, count);
    auto expected = ExpansionState::Unexpanded;
    if (!node.state.compare_exchange_strong(expected, ExpansionState::Expanding, std::memory_order_acq_rel)) {
        return ExpandOutcome::Lost;
    }
    node.child_count = static_cast<std::uint16_t>(count);
    node.children.store(block, std::memory_order_release);
    node.state.store(ExpansionState::Expanded, std::memory_order_release);
    tree.note_publication(count);
    return ExpandOutcome::Published;
}

PinningPlan plan_pinning(int threads, AffinityPolicy policy, const HostTopology& host) {
    PinningPlan plan;
    plan.topology = host.uniform();
    if (policy == AffinityPolicy::None) {
        plan.note = "pinning disabled";
        return plan;
    }
    if (threads > plan.topology.logical_processors()) {
        plan.note = "more threads than host processors; running unpinned";
        return plan;
    }
    const AffinityMap map =
        compute_affinity_map(threads, plan.topology.cores, plan.topology.smt_ways, policy);
    for (int t = 0; t < threads; ++t) plan.os_cpus.push_back(host.os_cpu(*map.processor_for(t)));
    plan.note = "pinned";
    return plan;
}

SearchResult parallel_search(const Board& board, const SearchConfig& config) {
    config.validate();
    if (board.game_over()) throw GameFinished();

    const int n = config.threads;
    PinningPlan plan;
    if (config.affinity != AffinityPolicy::None) {
        plan = plan_pinning(n, config.affinity, detect_host_topology());
        if (plan.os_cpus.empty()) spdlog::warn("{}", plan.note);
    }

    SearchResult result;
    result.tree = std::make_unique<SearchTree>(n);
    Shared shared{board, config, *result.tree};
    const auto start = Clock::now();
    shared.deadline = start + std::chrono::milliseconds(config.budget.amount);
    if (config.budget.is_playouts()) shared.tickets.store(config.budget.amount);

    std::vector<WorkerStats> stats(static_cast<std::size_t>(n));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(n));
        for (int t = 0; t < n; ++t) {
            pool.emplace_back([&, t] {
                auto& out = stats[static_cast<std::size_t>(t)];
                try {
                    if (!plan.os_cpus.empty()) {
                        try {
                            out.pinned = pin_current_thread(plan.os_cpus[static_cast<std::size_t>(t)]).effective;
                        } catch (const PinError& e) {
                            spdlog::warn("worker {}: {}", t, e.what());
                        }
                    }
                    Worker(shared, t).run(out);
                } catch (...) {
                    errors[static_cast<std::size_t>(t)] = std::current_exception();
                    shared.abort.store(true);
                }
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    const SearchNode* best = best_root_child(*result.tree);
    if (best) {
        result.move = best->move();
    } else {
        Rng rng(config.seed);
        result.move = policy_move(board, rng);
    }

    auto& s = result.stats;
    s.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    s.nodes = result.tree->node_count();
    s.chosen_move = result.move;
    s.board_size = board.size();
    s.threads = n;
    s.pinning_effective = !plan.os_cpus.empty();
    for (const auto& w : stats) {
        s.playouts += w.playouts;
        s.max_depth = std::max(s.max_depth, w.max_depth);
        s.per_thread_playouts.push_back(w.playouts);
        s.lock_wait_ns.push_back(w.lock_wait_ns);
        s.lost_expansions.push_back(w.lost);
        s.pinning_effective = s.pinning_effective && w.pinned;
    }
    return result;
}

std::string run_metadata_json(const SearchConfig& config, const SearchStats& stats, const Topology& topology) {
    nlohmann::json j;
    j["threads"] = config.threads;
    j["lock_mode"] = std::string(to_string(config.lock_mode));
    j["affinity"] = std::string(to_string(config.affinity));
    j["topology"] = {{"cores", topology.cores}, {"smt", topology.smt_ways}};
    j["pinning_effective"] = stats.pinning_effective;
    j["per_thread_playouts"] = stats.per_thread_playouts;
    return j.dump();
}

}  // namespace parago
