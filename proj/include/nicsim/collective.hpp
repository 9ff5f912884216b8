#ifndef NICSIM_COLLECTIVE_HPP
#define NICSIM_COLLECTIVE_HPP

#include <map>
#include <memory>
#include <set>

#include "nicsim/barrier_endpoint.hpp"
#include "nicsim/network.hpp"

namespace nicsim {

// The dedicated NIC-resident collective protocol: one queue and one static
// padded packet per group, a single bookkeeping record with a bit vector per
// barrier, no ACKs, and receiver-driven NACK retransmission.
class CollectiveNic : public NicBase {
public:
    using CompleteFn = std::function<void(int group, std::uint64_t seq)>;

    CollectiveNic(Engine& eng, Network& net, const CostModel& model, Rank me);

    // Allocates the dedicated queue and static packet. Duplicate member sets
    // and malformed member lists are rejected.
    int register_group(const std::vector<Rank>& members, const Schedule& sched);

    // Host-side request has already crossed the I/O bus; runs the single
    // dedicated-queue inspection, creates the barrier record, transmits the
    // round-0 sends, and arms the receiver timeout.
    std::uint64_t initiate(int group);

    void set_on_complete(CompleteFn fn) { complete_ = std::move(fn); }

    void on_wire_arrival(const Packet& pkt) override;

    Processor& proc() { return proc_; }
    std::uint64_t retransmits() const { return retransmits_; }
    std::uint64_t nacks_sent() const { return nacks_sent_; }

private:
    struct Group {
        std::unique_ptr<BarrierEndpoint> ep;
        EventHandle nack_timer = kInvalidHandle;
        SimTime last_progress; // initiate or latest applied arrival
    };

    void send_round(int group, int round, std::uint64_t seq);
    void transmit(int group, int round, std::uint64_t seq, Rank dst,
                  bool retransmit);
    void arm_receiver_timer(int group);
    void on_receiver_timeout(int group, std::uint64_t seq);
    void handle_barrier(const Packet& pkt);
    void handle_nack(const Packet& pkt);

    Engine& eng_;
    Network& net_;
    const CostModel& cm_;
    Rank me_;
    Processor proc_;
    CompleteFn complete_;
    std::map<int, Group> groups_;
    std::set<std::vector<Rank>> member_sets_;
    int next_group_ = 0;
    std::uint64_t retransmits_ = 0;
    std::uint64_t nacks_sent_ = 0;
};

} // namespace nicsim

#endif
