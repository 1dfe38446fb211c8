#include "parago/affinity.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include <spdlog/spdlog.h>

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif

namespace parago {

std::string_view to_string(AffinityPolicy p) {
    switch (p) {
        case AffinityPolicy::None: return "none";
        case AffinityPolicy::Compact: return "compact";
        case AffinityPolicy::Balanced: return "balanced";
        case AffinityPolicy::Scatter: return "scatter";
    }
    return "none";
}

AffinityPolicy parse_affinity(std::string_view text) {
    if (text == "none") return AffinityPolicy::None;
    if (text == "compact") return AffinityPolicy::Compact;
    if (text == "balanced") return AffinityPolicy::Balanced;
    if (text == "scatter") return AffinityPolicy::Scatter;
    throw std::invalid_argument("unknown affinity policy: " + std::string(text));
}

std::optional<int> AffinityMap::processor_for(int thread) const {
    if (assignments.empty()) return std::nullopt;
    return assignments.at(static_cast<std::size_t>(thread));
}

int AffinityMap::core_of(int thread) const {
    return assignments.at(static_cast<std::size_t>(thread)) / topology.smt_ways;
}

std::vector<int> AffinityMap::core_loads() const {
    std::vector<int> loads(static_cast<std::size_t>(topology.cores), 0);
    for (int id : assignments) ++loads[static_cast<std::size_t>(id / topology.smt_ways)];
    return loads;
}

std::vector<int> AffinityMap::threads_on_core(int core) const {
    std::vector<int> out;
    for (std::size_t t = 0; t < assignments.size(); ++t) {
        if (assignments[t] / topology.smt_ways == core) out.push_back(static_cast<int>(t));
    }
    return out;
}

AffinityMap compute_affinity_map(int threads, int cores, int smt_ways, AffinityPolicy policy) {
    if (cores < 1 || smt_ways < 1) throw std::invalid_argument("topology needs at least one core and one hardware thread");
    if (threads < 0) throw std::invalid_argument("negative thread count");
    if (threads > cores * smt_ways) throw Oversubscribed();

    AffinityMap map;
    map.policy = policy;
    map.topology = {cores, smt_ways};
    if (policy == AffinityPolicy::None) return map;

    map.assignments.resize(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        int core = 0;
        int slot = 0;
        switch (policy) {
            case AffinityPolicy::Compact:
                core = t / smt_ways;
                slot = t % smt_ways;
                break;
            case AffinityPolicy::Scatter:
                core = t % cores;
                slot = t / cores;
                break;
            case AffinityPolicy::Balanced: {
                core = static_cast<int>(static_cast<long long>(t) * cores / threads);
                // Slot = rank of t among the threads that share its core.
                int first = t;
                while (first > 0 && static_cast<long long>(first - 1) * cores / threads == core) --first;
                slot = t - first;
                break;
            }
            case AffinityPolicy::None: break;
        }
        map.assignments[static_cast<std::size_t>(t)] = core * smt_ways + slot;
    }
    return map;
}

Topology HostTopology::uniform() const {
    if (os_cpus.empty()) return {1, 1};
    std::size_t smt = os_cpus.front().size();
    for (const auto& core : os_cpus) smt = std::min(smt, core.size());
    return {static_cast<int>(os_cpus.size()), static_cast<int>(std::max<std::size_t>(smt, 1))};
}

int HostTopology::logical_processors() const {
    int n = 0;
    for (const auto& core : os_cpus) n += static_cast<int>(core.size());
    return n;
}

int HostTopology::os_cpu(int logical_id) const {
    const Topology t = uniform();
    const int core = logical_id / t.smt_ways;
    const int slot = logical_id % t.smt_ways;
    if (core < 0 || core >= t.cores) throw std::out_of_range("logical processor out of range");
    return os_cpus[static_cast<std::size_t>(core)][static_cast<std::size_t>(slot)];
}

namespace {

int read_int(const std::filesystem::path& p) {
    std::ifstream in(p);
    int v = -1;
    if (!(in >> v)) return -1;
    return v;
}

// Parses a sysfs cpu list such as "0-3,8,10-11".
std::vector<int> online_cpus() {
    std::vector<int> cpus;
    std::ifstream in("/sys/devices/system/cpu/online");
    std::string text;
    if (!std::getline(in, text)) return cpus;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string::npos) end = text.size();
        const std::string part = text.substr(pos, end - pos);
        const std::size_t dash = part.find('-');
        try {
            const int lo = std::stoi(part.substr(0, dash));
            const int hi = dash == std::string::npos ? lo : std::stoi(part.substr(dash + 1));
            for (int i = lo; i <= hi; ++i) cpus.push_back(i);
        } catch (const std::exception&) {
            return {};
        }
        pos = end + 1;
    }
    return cpus;
}

std::vector<int> allowed_cpus_fallback() {
    std::vector<int> cpus;
    const unsigned n = std::max(1u, std::thread::hardware_concurrency());
    for (unsigned i = 0; i < n; ++i) cpus.push_back(static_cast<int>(i));
    return cpus;
}

}  // namespace

HostTopology detect_host_topology() {
    HostTopology topo;
    std::vector<int> cpus;
#if defined(__linux__)
    cpus = online_cpus();
#endif
    if (cpus.empty()) cpus = allowed_cpus_fallback();

    // (package, core) -> cpus
    std::map<std::pair<int, int>, std::vector<int>> cores;
    bool sysfs_ok = true;
    for (int cpu : cpus) {
        const std::filesystem::path base =
            std::filesystem::path("/sys/devices/system/cpu") / ("cpu" + std::to_string(cpu)) / "topology";
        const int core = read_int(base / "core_id");
        const int pkg = read_int(base / "physical_package_id");
        if (core < 0) {
            sysfs_ok = false;
            break;
        }
        cores[{pkg, core}].push_back(cpu);
    }
    if (!sysfs_ok) {
        for (int cpu : cpus) topo.os_cpus.push_back({cpu});
        return topo;
    }
    for (auto& [id, list] : cores) {
        std::sort(list.begin(), list.end());
        topo.os_cpus.push_back(list);
    }
    return topo;
}

PinResult pin_current_thread(int os_cpu) {
#if defined(__linux__)
    if (os_cpu < 0 || os_cpu >= CPU_SETSIZE) {
        throw PinError(EINVAL, "cannot pin to processor " + std::to_string(os_cpu) + ": " + std::strerror(EINVAL));
    }
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(static_cast<std::size_t>(os_cpu), &set);
    const int rc = pthread_setaffinity_np(pthread_self(), sizeof(set), &set);
    if (rc != 0) {
        throw PinError(rc, "cannot pin to processor " + std::to_string(os_cpu) + ": " + std::strerror(rc));
    }
    return {true, "pinned to processor " + std::to_string(os_cpu)};
#else
    spdlog::warn("thread pinning is not supported on this platform; processor {} ignored", os_cpu);
    return {false, "pinning unsupported"};
#endif
}

std::vector<int> current_thread_affinity() {
    std::vector<int> out;
#if defined(__linux__)
    cpu_set_t set;
    CPU_ZERO(&set);
    if (pthread_getaffinity_np(pthread_self(), sizeof(set), &set) == 0) {
        for (int i = 0; i < CPU_SETSIZE; ++i) {
            if (CPU_ISSET(static_cast<std::size_t>(i), &set)) out.push_back(i);
        }
    }
#endif
    return out;
}

}  // namespace parago
