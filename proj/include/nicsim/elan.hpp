#ifndef NICSIM_ELAN_HPP
#define NICSIM_ELAN_HPP

#include <memory>

#include "nicsim/barrier_endpoint.hpp"
#include "nicsim/network.hpp"

namespace nicsim {

// One stage of a chained-RDMA barrier: fires its zero-byte RDMAs once the
// previous descriptor completed and its event count is reached.
struct RdmaStage {
    int round = 0;
    int wait_count = 0; // 0 for the host-initiated head of the chain
    std::vector<Rank> targets;
};

struct RdmaChain {
    std::vector<RdmaStage> stages;
    int completion_wait = 0; // arrivals of the final round before the local event
};

// Derives the descriptor chain from a validated schedule: round r's sends are
// triggered by an event with wait_count = |await_from(r-1)|; round 0 is
// host-initiated; the last event triggers the local completion event.
RdmaChain build_chain(const Schedule& sched);

// Quadrics-like backend: the barrier is a chain of zero-byte RDMAs fired by
// remote events on a reliable network. No NIC thread, no ACK/NACK traffic.
// Consecutive barriers reuse the chain with alternating even/odd event sets,
// which the one-ahead buffering realizes.
class ElanRank : public NicBase {
public:
    using CompleteFn = std::function<void(std::uint64_t seq)>;

    ElanRank(Engine& eng, Network& net, const CostModel& model, Rank me,
             const Schedule& sched);

    // Host triggers the head descriptor; the previous completion must have
    // been consumed.
    std::uint64_t trigger();

    void set_on_complete(CompleteFn fn) { complete_ = std::move(fn); }
    void on_wire_arrival(const Packet& pkt) override;
    Processor& proc() { return proc_; }

private:
    Engine& eng_;
    Network& net_;
    const CostModel& cm_;
    Rank me_;
    Processor proc_;
    CompleteFn complete_;
    std::unique_ptr<BarrierEndpoint> ep_;
};

} // namespace nicsim

#endif
