#pragma once

#include <string>

#include "parago/affinity.hpp"
#include "parago/mcts.hpp"

namespace parago {

enum class ExpandOutcome { Published, AlreadyExpanded, Lost };

/// Child creation under the node's own lock. Exactly one caller publishes.
/// Time spent waiting for the lock is added to *wait_ns when given.
ExpandOutcome expand_locked(SearchNode& node, const Board& board, SearchTree& tree, int worker,
                            std::uint64_t* wait_ns = nullptr);

/// Racing child creation: every caller builds a candidate block in its own
/// arena and a single compare-exchange on the expansion state decides which
/// block is published. Losing blocks stay in their arena until the tree dies.
ExpandOutcome expand_lockfree(SearchNode& node, const Board& board, SearchTree& tree, int worker);

/// Tree-parallel UCT with virtual loss. All workers share one tree; each
/// playout runs on a private board copy with an RNG seeded seed ^ worker.
/// A playout budget is a shared countdown, so exactly budget playouts
/// complete. With threads == 1 the result matches search() for equal seeds.
SearchResult parallel_search(const Board& board, const SearchConfig& config);

/// Host-pinning plan used by parallel_search and the benchmarks. Empty
/// processor list when the policy is None or the host is too small.
struct PinningPlan {
    Topology topology;
    std::vector<int> os_cpus;
    std::string note;
};

PinningPlan plan_pinning(int threads, AffinityPolicy policy, const HostTopology& host);

/// {threads, lock_mode, affinity, topology:{cores,smt}, pinning_effective,
/// per_thread_playouts:[...]}
std::string run_metadata_json(const SearchConfig& config, const SearchStats& stats,
                              const Topology& topology);

}  // namespace parago
