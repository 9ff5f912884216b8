#include "nicsim/collective.hpp"

#include <algorithm>

namespace nicsim {

CollectiveNic::CollectiveNic(Engine& eng, Network& net, const CostModel& model,
                             Rank me)
    : eng_(eng), net_(net), cm_(model), me_(me), proc_(eng) {}

int CollectiveNic::register_group(const std::vector<Rank>& members,
                                 const Schedule& sched) {
    std::vector<Rank> sorted = members;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ConfigError("collective: duplicate rank in member list");
    if (!std::binary_search(sorted.begin(), sorted.end(), me_))
        throw ConfigError("collective: registering a group we are not part of");
    if (static_cast<int>(members.size()) != sched.n)
        throw ConfigError("collective: member count does not match schedule");
    if (!member_sets_.insert(sorted).second)
        throw ConfigError("collective: group with identical members already registered");

    int id = next_group_++;
    Group g;
    g.ep = std::make_unique<BarrierEndpoint>(
        sched,
        [this, id](int round, std::uint64_t seq) { send_round(id, round, seq); },
        [this, id](std::uint64_t seq) {
            auto& grp = groups_.at(id);
            if (grp.nack_timer != kInvalidHandle) {
                eng_.cancel(grp.nack_timer);
                grp.nack_timer = kInvalidHandle;
            }
            if (complete_) complete_(id, seq);
        });
    groups_.emplace(id, std::move(g));
    return id;
}

std::uint64_t CollectiveNic::initiate(int group) {
    auto& grp = groups_.at(group);
    if (grp.ep->in_progress())
        throw std::logic_error("collective: barrier already in progress");
    std::uint64_t seq = grp.ep->current_seq() + 1;
    // One inspection of the dedicated queue (the token is always at its
    // front) and one record creation for the whole barrier.
    proc_.exec(cm_.c_queue_pass + cm_.c_record, [this, group] {
        auto& g = groups_.at(group);
        arm_receiver_timer(group);
        g.ep->initiate();
    });
    return seq;
}

// Triggered sends go straight out of the static packet: c_nic_send each, no
// queue traversal, no allocation.
void CollectiveNic::send_round(int group, int round, std::uint64_t seq) {
    const Schedule& sched = groups_.at(group).ep->schedule();
    for (Rank dst : sched.rounds[static_cast<size_t>(round)].send_to)
        transmit(group, round, seq, dst, false);
}

void CollectiveNic::transmit(int group, int round, std::uint64_t seq, Rank dst,
                             bool retransmit) {
    proc_.exec(cm_.c_nic_send, [this, group, round, seq, dst, retransmit] {
        Packet pkt{me_, dst, PacketKind::Barrier, group, round, seq, 0, 12};
        if (retransmit) ++retransmits_;
        net_.inject(pkt, retransmit);
    });
}

void CollectiveNic::arm_receiver_timer(int group) {
    auto& grp = groups_.at(group);
    std::uint64_t seq = grp.ep->current_seq() + 1;
    grp.last_progress = eng_.now();
    grp.nack_timer = eng_.schedule(
        eng_.now() + cm_.receiver_timeout,
        [this, group, seq] { on_receiver_timeout(group, seq); });
}

// One NACK per missing (round, peer) bit; distinct senders retransmit
// independently.
void CollectiveNic::on_receiver_timeout(int group, std::uint64_t seq) {
    auto& grp = groups_.at(group);
    if (!grp.ep->in_progress() || grp.ep->current_seq() != seq) return;
    // A multi-round barrier is healthy as long as bits keep arriving; only a
    // genuine stall (no progress for a whole timeout) warrants NACKs.
    if (grp.last_progress + cm_.receiver_timeout > eng_.now()) {
        grp.nack_timer = eng_.schedule(
            grp.last_progress + cm_.receiver_timeout,
            [this, group, seq] { on_receiver_timeout(group, seq); });
        return;
    }
    for (auto [round, peer] : grp.ep->missing()) {
        int r = round;
        Rank p = peer;
        proc_.exec(cm_.c_nic_send, [this, group, r, p, seq] {
            Packet nack{me_, p, PacketKind::Nack, group, r, seq, 0, 12};
            ++nacks_sent_;
            net_.inject(nack);
        });
    }
    grp.nack_timer = eng_.schedule(
        eng_.now() + cm_.receiver_timeout,
        [this, group, seq] { on_receiver_timeout(group, seq); });
}

void CollectiveNic::on_wire_arrival(const Packet& pkt) {
    switch (pkt.kind) {
        case PacketKind::Barrier:
            proc_.exec(cm_.c_nic_recv, [this, pkt] { handle_barrier(pkt); });
            return;
        case PacketKind::Nack:
            proc_.exec(cm_.c_nic_recv, [this, pkt] { handle_nack(pkt); });
            return;
        default:
            throw ProtocolError("collective: unexpected packet kind on the wire");
    }
}

void CollectiveNic::handle_barrier(const Packet& pkt) {
    auto& grp = groups_.at(pkt.group);
    auto cls = grp.ep->on_message(pkt.round, pkt.src, pkt.barrier_seq);
    if (cls == BarrierEndpoint::Classify::Applied)
        grp.last_progress = eng_.now();
    switch (cls) {
        case BarrierEndpoint::Classify::Applied:
        case BarrierEndpoint::Classify::OneAhead:
        case BarrierEndpoint::Classify::Duplicate:
        case BarrierEndpoint::Classify::Stale:
            return;
        case BarrierEndpoint::Classify::Corrupt:
            throw ProtocolError("collective: barrier sequence out of window");
    }
}

void CollectiveNic::handle_nack(const Packet& pkt) {
    auto& grp = groups_.at(pkt.group);
    std::uint64_t current = grp.ep->current_seq();
    if (pkt.barrier_seq > current + 1)
        throw ProtocolError("collective: NACK for a future barrier");
    // A one-ahead peer can time out before we even enter its barrier.
    if (pkt.barrier_seq > current) return;
    // A NACK may race a send we have not triggered yet; the regular dispatch
    // path will cover it.
    if (!grp.ep->round_dispatched(pkt.barrier_seq, pkt.round)) return;
    // Content is regenerable from the static packet: retransmit even if we
    // already exited that barrier.
    transmit(pkt.group, pkt.round, pkt.barrier_seq, pkt.src, true);
}

} // namespace nicsim
