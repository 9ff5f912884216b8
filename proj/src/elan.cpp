#include "nicsim/elan.hpp"

namespace nicsim {

RdmaChain build_chain(const Schedule& sched) {
    RdmaChain chain;
    for (size_t r = 0; r < sched.rounds.size(); ++r) {
        RdmaStage st;
        st.round = static_cast<int>(r);
        st.wait_count =
            r == 0 ? 0
                   : static_cast<int>(sched.rounds[r - 1].await_from.size());
        st.targets = sched.rounds[r].send_to;
        chain.stages.push_back(std::move(st));
    }
    chain.completion_wait =
        sched.rounds.empty()
            ? 0
            : static_cast<int>(sched.rounds.back().await_from.size());
    return chain;
}

ElanRank::ElanRank(Engine& eng, Network& net, const CostModel& model, Rank me,
                   const Schedule& sched)
    : eng_(eng), net_(net), cm_(model), me_(me), proc_(eng) {
    if (!model.reliable_network)
        throw ConfigError("elan backend requires a reliable network preset");
    ep_ = std::make_unique<BarrierEndpoint>(
        sched,
        [this](int round, std::uint64_t seq) {
            for (Rank dst : ep_->schedule().rounds[static_cast<size_t>(round)].send_to) {
                proc_.exec(cm_.c_nic_send, [this, dst, round, seq] {
                    // zero-byte RDMA: header only
                    Packet pkt{me_, dst, PacketKind::Barrier, 0, round, seq, 0, 4};
                    net_.inject(pkt);
                });
            }
        },
        [this](std::uint64_t seq) {
            if (complete_) complete_(seq);
        });
}

std::uint64_t ElanRank::trigger() {
    if (ep_->in_progress())
        throw std::logic_error("elan: barrier triggered while in progress");
    return ep_->initiate();
}

void ElanRank::on_wire_arrival(const Packet& pkt) {
    if (pkt.kind != PacketKind::Barrier)
        throw ProtocolError("elan: unexpected packet kind on a reliable network");
    proc_.exec(cm_.c_nic_recv, [this, pkt] {
        auto cls = ep_->on_message(pkt.round, pkt.src, pkt.barrier_seq);
        if (cls == BarrierEndpoint::Classify::Corrupt ||
            cls == BarrierEndpoint::Classify::Duplicate ||
            cls == BarrierEndpoint::Classify::Stale)
            throw ProtocolError("elan: event would fire twice");
    });
}

} // namespace nicsim
