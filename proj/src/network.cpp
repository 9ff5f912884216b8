#include "nicsim/network.hpp"

namespace nicsim {

const char* packet_kind_name(PacketKind k) {
    switch (k) {
        case PacketKind::Barrier: return "barrier";
        case PacketKind::Nack: return "nack";
        case PacketKind::Data: return "data";
        case PacketKind::Ack: return "ack";
    }
    return "?";
}

const char* trace_action_name(TraceAction a) {
    switch (a) {
        case TraceAction::Send: return "send";
        case TraceAction::Recv: return "recv";
        case TraceAction::Drop: return "drop";
        case TraceAction::Retransmit: return "retransmit";
    }
    return "?";
}

Network::Network(Engine& eng, const CostModel& model, const Placement& placement,
                 std::uint64_t seed, TraceSink* sink)
    : eng_(eng),
      model_(model),
      placement_(placement),
      nics_(static_cast<size_t>(placement.n_ranks()), nullptr),
      sink_(sink ? sink : &null_sink_) {
    loss_rngs_.reserve(nics_.size());
    for (size_t r = 0; r < nics_.size(); ++r)
        loss_rngs_.push_back(Rng::split(seed, "loss/" + std::to_string(r)));
}

void Network::attach(Rank rank, NicBase* nic) {
    nics_.at(static_cast<size_t>(rank)) = nic;
}

void Network::inject(const Packet& pkt, bool retransmit) {
    sink_->on_packet({eng_.now(),
                      retransmit ? TraceAction::Retransmit : TraceAction::Send,
                      pkt});
    if (should_drop(model_, loss_rngs_.at(static_cast<size_t>(pkt.src)))) {
        sink_->on_packet({eng_.now(), TraceAction::Drop, pkt});
        return;
    }
    SimTime arrive = eng_.now() + transit_time(model_, placement_, pkt.src, pkt.dst);
    eng_.schedule(arrive, [this, pkt] {
        sink_->on_packet({eng_.now(), TraceAction::Recv, pkt});
        NicBase* nic = nics_.at(static_cast<size_t>(pkt.dst));
        if (!nic) throw ProtocolError("packet addressed to detached rank");
        nic->on_wire_arrival(pkt);
    });
}

} // namespace nicsim
