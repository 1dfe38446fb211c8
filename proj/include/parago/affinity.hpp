#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace parago {

enum class AffinityPolicy { None, Compact, Balanced, Scatter };

std::string_view to_string(AffinityPolicy p);
/// Accepts "none", "compact", "balanced", "scatter". Throws std::invalid_argument.
AffinityPolicy parse_affinity(std::string_view text);

struct Topology {
    int cores = 1;
    int smt_ways = 1;
    int logical_processors() const { return cores * smt_ways; }
};

class Oversubscribed : public std::invalid_argument {
public:
    Oversubscribed() : std::invalid_argument("oversubscribed") {}
};

/// Thread -> logical processor assignment. A logical processor id is
/// core * smt_ways + slot, where slot is the hardware-thread index on that core.
struct AffinityMap {
    AffinityPolicy policy = AffinityPolicy::None;
    Topology topology;
    /// Empty for AffinityPolicy::None.
    std::vector<int> assignments;

    std::optional<int> processor_for(int thread) const;
    int core_of(int thread) const;
    /// Threads per core, indexed by core.
    std::vector<int> core_loads() const;
    /// Threads on `core` in ascending order.
    std::vector<int> threads_on_core(int core) const;
};

/// Compact fills each core before moving on, scatter deals threads round-robin
/// over cores, balanced gives core floor(t * cores / threads) to thread t so
/// loads differ by at most one and neighbouring threads share a core.
AffinityMap compute_affinity_map(int threads, int cores, int smt_ways, AffinityPolicy policy);

/// Host processors grouped by physical core. Falls back to one core per
/// online processor when sysfs topology is unavailable.
struct HostTopology {
    /// os_cpus[core][slot] -> OS processor number.
    std::vector<std::vector<int>> os_cpus;

    Topology uniform() const;
    int logical_processors() const;
    int physical_cores() const { return static_cast<int>(os_cpus.size()); }
    /// OS processor for a logical id of the uniform topology.
    int os_cpu(int logical_id) const;
};

HostTopology detect_host_topology();

struct PinResult {
    bool effective = false;
    std::string message;
};

class PinError : public std::runtime_error {
public:
    PinError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

/// Restricts the calling thread to one OS processor. Throws PinError when the
/// OS rejects the request; on platforms without affinity support it logs a
/// warning and returns {effective = false}.
PinResult pin_current_thread(int os_cpu);

/// OS processors in the calling thread's affinity mask.
std::vector<int> current_thread_affinity();

}  // namespace parago
