#ifndef NICSIM_TOPOLOGY_HPP
#define NICSIM_TOPOLOGY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nicsim/rng.hpp"
#include "nicsim/sim_time.hpp"

namespace nicsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-hop and per-task latency constants for one simulated platform.
struct CostModel {
    std::string platform_name;
    SimTime c_host_proc;          // host CPU handles one barrier message
    SimTime c_host_post;          // host posts a descriptor across the I/O bus
    SimTime c_nic_to_host_event;  // NIC delivers a completion event to host
    SimTime c_queue_pass;         // one send-queue inspection at the NIC
    SimTime c_pkt_alloc;          // claim + fill + release one send packet
    SimTime c_nic_send;           // NIC injects one packet
    SimTime c_nic_recv;           // NIC accepts and classifies one packet
    SimTime c_record;             // create/update one bookkeeping record
    SimTime c_wire;               // serialization + propagation per link
    SimTime c_hop;                // per switch hop
    double loss_prob = 0.0;       // per packet transit
    SimTime sender_timeout;
    SimTime receiver_timeout;
    bool reliable_network = false;

    void validate() const;

    // Defaults from the maximum transit on an n-rank placement; applied when
    // a preset leaves the timeouts unset.
    void apply_default_timeouts(int max_hops);
};

// Loads the JSON preset file (one object per platform, times in decimal
// microseconds) and resolves one platform.
CostModel load_preset(const std::string& path, const std::string& platform);
std::vector<std::string> preset_names(const std::string& path);

// Path baked in at build time; overridable via NICSIM_PRESETS env var.
std::string default_preset_path();

using Rank = int;

// Two-level switch abstraction: ranks mapped onto nodes; nodes on the same
// leaf switch are 1 hop apart, across switches 3 hops.
class Placement {
public:
    Placement(int n_ranks, std::vector<int> rank_to_node,
              int ports_per_switch = 8);

    static Placement identity(int n_ranks, int ports_per_switch = 8);

    int n_ranks() const { return n_; }
    int node_of(Rank r) const { return rank_to_node_.at(static_cast<size_t>(r)); }
    int hop_count(Rank src, Rank dst) const;
    int max_hops() const;
    int ports_per_switch() const { return ports_; }

private:
    int n_;
    int ports_;
    std::vector<int> rank_to_node_;
};

// Uniform random bijection of ranks onto nodes (Fisher-Yates on the stream).
Placement permute_placement(int n, Rng& rng, int ports_per_switch = 8);

// c_wire + hop_count(src, dst) * c_hop. src == dst is a protocol bug.
SimTime transit_time(const CostModel& model, const Placement& placement,
                     Rank src, Rank dst);

// True with probability loss_prob, drawn from the stream.
bool should_drop(const CostModel& model, Rng& rng);

} // namespace nicsim

#endif
