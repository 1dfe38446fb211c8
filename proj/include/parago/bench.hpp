#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "parago/affinity.hpp"
#include "parago/board.hpp"
#include "parago/mcts.hpp"

namespace parago {

enum class ElementType { Float64, Int32 };

std::string_view to_string(ElementType t);
ElementType parse_element_type(std::string_view text);

/// Parameters of the c[j] = a[j] * b[j] + c[j] kernel.
struct KernelSpec {
    ElementType element_type = ElementType::Float64;
    std::size_t array_length = std::size_t{1} << 14;
    std::int64_t repetitions = 1000;
    int threads = 1;
    AffinityPolicy affinity = AffinityPolicy::None;

    /// Cache-resident arrays, many passes.
    static KernelSpec compute_bound(ElementType type = ElementType::Float64);
    /// Arrays well beyond the last-level cache.
    static KernelSpec memory_bound(ElementType type = ElementType::Float64);
};

struct BenchResult {
    ElementType element_type = ElementType::Float64;
    int threads = 1;
    AffinityPolicy affinity = AffinityPolicy::None;
    std::uint64_t ops = 0;
    double elapsed_s = 0.0;
    double ops_per_sec = 0.0;
    double bytes_per_sec = 0.0;
    double checksum = 0.0;
    bool checksum_ok = false;
    bool pinning_effective = false;
};

class KernelError : public std::runtime_error {
public:
    KernelError() : std::runtime_error("kernel miscompiled/raced") {}
};

/// Runs the kernel with a[j] = 1, b[j] = 2, c[j] = 0 on disjoint,
/// cache-line-aligned chunks, one per thread, timed between two barriers.
/// Throws KernelError when any c[j] differs from 2 * repetitions.
BenchResult run_kernel(const KernelSpec& spec);

/// Same kernel; intended for arrays larger than the last-level cache. The
/// byte count is 4 accesses (read a, b, c; write c) per element and pass.
BenchResult run_bandwidth(const KernelSpec& spec);

/// benchmark,threads,policy,element_type,ops_per_sec,bytes_per_sec,checksum_ok
std::string bench_csv_header();
std::string bench_csv_row(std::string_view benchmark, const BenchResult& r);

/// Runs `spec` for threads 1..max_threads under each pinning policy.
std::vector<BenchResult> affinity_sweep(KernelSpec spec, int max_threads, bool bandwidth,
                                        const std::vector<AffinityPolicy>& policies = {
                                            AffinityPolicy::Compact, AffinityPolicy::Balanced,
                                            AffinityPolicy::Scatter});

/// Coefficient of variation of ops_per_sec over `runs` repetitions.
double kernel_cv(const KernelSpec& spec, int runs, bool bandwidth = false);

/// The fixed first move the probes play before searching: the centre point.
Move probe_opening_move(int board_size);

struct ProbeResult {
    double games_per_sec = 0.0;
    SearchStats stats;
    /// Nodes counted by walking the tree after the search.
    std::uint64_t walked_nodes = 0;
};

/// Plays probe_opening_move on `position`, then searches the reply under
/// config and reports playouts per second of that search.
ProbeResult games_per_second_probe(const SearchConfig& config, const Board& position);

/// Same second-move search; reports the size of the resulting tree.
ProbeResult tree_size_probe(const SearchConfig& config, const Board& position);

}  // namespace parago
