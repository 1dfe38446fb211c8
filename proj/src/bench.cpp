#include "parago/bench.hpp"

#include <barrier>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "parago/parallel.hpp"

namespace parago {

namespace {

constexpr std::size_t kCacheLine = 64;

struct FreeDeleter {
    void operator()(void* p) const { std::free(p); }
};

template <class T>
std::unique_ptr<T[], FreeDeleter> aligned_array(std::size_t n) {
    std::size_t bytes = std::max<std::size_t>(n * sizeof(T), kCacheLine);
    bytes = (bytes + kCacheLine - 1) / kCacheLine * kCacheLine;
    auto* p = static_cast<T*>(std::aligned_alloc(kCacheLine, bytes));
    if (p == nullptr) throw std::bad_alloc();
    return std::unique_ptr<T[], FreeDeleter>(p);
}

template <class T>
void kernel_pass(const T* __restrict a, const T* __restrict b, T* __restrict c, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) c[j] = a[j] * b[j] + c[j];
}

template <class T>
BenchResult run_typed(const KernelSpec& spec) {
    if (spec.array_length < 1) throw std::invalid_argument("array_length must be at least 1");
    if (spec.repetitions < 0) throw std::invalid_argument("repetitions must be non-negative");
    if (spec.threads < 1) throw std::invalid_argument("threads must be at least 1");
    if constexpr (std::is_integral_v<T>) {
        if (spec.repetitions > std::numeric_limits<T>::max() / 2) {
            throw std::invalid_argument("repetitions overflow the int32 accumulator");
        }
    }

    PinningPlan plan;
    if (spec.affinity != AffinityPolicy::None) {
        const HostTopology host = detect_host_topology();
        if (spec.threads > host.logical_processors()) {
            throw std::invalid_argument("threads exceed host processors with pinning enabled");
        }
        plan = plan_pinning(spec.threads, spec.affinity, host);
    }

    const std::size_t n = spec.array_length;
    auto a = aligned_array<T>(n);
    auto b = aligned_array<T>(n);
    auto c = aligned_array<T>(n);

    const std::size_t per_line = kCacheLine / sizeof(T);
    const std::size_t share = (n + static_cast<std::size_t>(spec.threads) - 1) / static_cast<std::size_t>(spec.threads);
    const std::size_t chunk = (share + per_line - 1) / per_line * per_line;

    using Clock = std::chrono::steady_clock;
    Clock::time_point t0;
    Clock::time_point t1;
    int phase = 0;
    auto on_phase = [&]() noexcept {
        (phase++ == 0 ? t0 : t1) = Clock::now();
    };
    std::barrier sync(spec.threads, on_phase);
    std::vector<char> pinned(static_cast<std::size_t>(spec.threads), 0);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(spec.threads));

    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < spec.threads; ++t) {
            pool.emplace_back([&, t] {
                const std::size_t lo = std::min(n, static_cast<std::size_t>(t) * chunk);
                const std::size_t hi = std::min(n, lo + chunk);
                try {
                    if (!plan.os_cpus.empty()) {
                        pinned[static_cast<std::size_t>(t)] =
                            pin_current_thread(plan.os_cpus[static_cast<std::size_t>(t)]).effective ? 1 : 0;
                    }
                } catch (...) {
                    errors[static_cast<std::size_t>(t)] = std::current_exception();
                }
                // First touch by the owning thread.
                for (std::size_t j = lo; j < hi; ++j) {
                    a[j] = T(1);
                    b[j] = T(2);
                    c[j] = T(0);
                }
                sync.arrive_and_wait();
                T* cp = c.get();
                for (std::int64_t r = 0; r < spec.repetitions; ++r) {
                    kernel_pass(a.get() + lo, b.get() + lo, cp + lo, hi - lo);
                    // Keeps the passes from being fused or hoisted.
                    asm volatile("" : : "r"(cp) : "memory");
                }
                sync.arrive_and_wait();
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    BenchResult res;
    res.element_type = std::is_integral_v<T> ? ElementType::Int32 : ElementType::Float64;
    res.threads = spec.threads;
    res.affinity = spec.affinity;
    res.pinning_effective = !plan.os_cpus.empty() &&
                            std::all_of(pinned.begin(), pinned.end(), [](char p) { return p != 0; });
    res.ops = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(spec.repetitions);
    res.elapsed_s = std::chrono::duration<double>(t1 - t0).count();
    if (res.elapsed_s > 0.0) {
        res.ops_per_sec = static_cast<double>(res.ops) / res.elapsed_s;
        res.bytes_per_sec = 4.0 * static_cast<double>(sizeof(T)) * static_cast<double>(res.ops) / res.elapsed_s;
    }

    const T expected = static_cast<T>(2 * spec.repetitions);
    double tolerance = 0.0;
    if constexpr (!std::is_integral_v<T>) {
        const double e = static_cast<double>(expected);
        tolerance = static_cast<double>(spec.repetitions) * (std::nextafter(e, std::numeric_limits<double>::infinity()) - e);
    }
    bool ok = true;
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        sum += static_cast<double>(c[j]);
        if constexpr (std::is_integral_v<T>) {
            ok = ok && c[j] == expected;
        } else {
            ok = ok && std::abs(static_cast<double>(c[j]) - static_cast<double>(expected)) <= tolerance;
        }
    }
    res.checksum = sum;
    res.checksum_ok = ok;
    if (!ok) throw KernelError();
    return res;
}

}  // namespace

std::string_view to_string(ElementType t) { return t == ElementType::Float64 ? "float64" : "int32"; }

ElementType parse_element_type(std::string_view text) {
    if (text == "float64" || text == "double") return ElementType::Float64;
    if (text == "int32" || text == "int") return ElementType::Int32;
    throw std::invalid_argument("unknown element type: " + std::string(text));
}

KernelSpec KernelSpec::compute_bound(ElementType type) {
    KernelSpec s;
    s.element_type = type;
    s.array_length = std::size_t{1} << 14;
    s.repetitions = 20000;
    return s;
}

KernelSpec KernelSpec::memory_bound(ElementType type) {
    KernelSpec s;
    s.element_type = type;
    s.array_length = std::size_t{1} << 26;
    s.repetitions = 3;
    return s;
}

BenchResult run_kernel(const KernelSpec& spec) {
    return spec.element_type == ElementType::Float64 ? run_typed<double>(spec) : run_typed<std::int32_t>(spec);
}

BenchResult run_bandwidth(const KernelSpec& spec) { return run_kernel(spec); }

std::string bench_csv_header() {
    return "benchmark,threads,policy,element_type,ops_per_sec,bytes_per_sec,checksum_ok";
}

std::string bench_csv_row(std::string_view benchmark, const BenchResult& r) {
    std::ostringstream out;
    out << benchmark << ',' << r.threads << ',' << to_string(r.affinity) << ',' << to_string(r.element_type) << ','
        << std::setprecision(6) << std::scientific << r.ops_per_sec << ',' << r.bytes_per_sec << ','
        << (r.checksum_ok ? "true" : "false");
    return out.str();
}

std::vector<BenchResult> affinity_sweep(KernelSpec spec, int max_threads, bool bandwidth,
                                        const std::vector<AffinityPolicy>& policies) {
    std::vector<BenchResult> out;
    for (int t = 1; t <= max_threads; ++t) {
        for (AffinityPolicy p : policies) {
            spec.threads = t;
            spec.affinity = p;
            out.push_back(bandwidth ? run_bandwidth(spec) : run_kernel(spec));
        }
    }
    return out;
}

double kernel_cv(const KernelSpec& spec, int runs, bool bandwidth) {
    if (runs < 2) throw std::invalid_argument("need at least two runs");
    std::vector<double> rates;
    for (int i = 0; i < runs; ++i) rates.push_back((bandwidth ? run_bandwidth(spec) : run_kernel(spec)).ops_per_sec);
    double mean = 0.0;
    for (double r : rates) mean += r;
    mean /= static_cast<double>(runs);
    double var = 0.0;
    for (double r : rates) var += (r - mean) * (r - mean);
    var /= static_cast<double>(runs - 1);
    return mean > 0.0 ? std::sqrt(var) / mean : 0.0;
}

Move probe_opening_move(int board_size) { return Move::play(board_size / 2, board_size / 2); }

namespace {

ProbeResult second_move_search(const SearchConfig& config, const Board& position) {
    Board b = position;
    const Move first = probe_opening_move(b.size());
    if (!b.is_legal(first)) throw std::invalid_argument("probe opening move is not legal in this position");
    b.play(first);
    SearchResult r = parallel_search(b, config);
    ProbeResult out;
    out.stats = r.stats;
    out.walked_nodes = walk_tree(*r.tree).nodes;
    out.games_per_sec = r.stats.playouts_per_sec();
    return out;
}

}  // namespace

ProbeResult games_per_second_probe(const SearchConfig& config, const Board& position) {
    return second_move_search(config, position);
}

ProbeResult tree_size_probe(const SearchConfig& config, const Board& position) {
    return second_move_search(config, position);
}

}  // namespace parago
