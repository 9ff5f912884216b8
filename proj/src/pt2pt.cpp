#include "nicsim/pt2pt.hpp"

namespace nicsim {

Pt2ptNic::Pt2ptNic(Engine& eng, Network& net, const CostModel& model, Rank me,
                   Pt2ptOptions opts)
    : eng_(eng),
      net_(net),
      cm_(model),
      me_(me),
      opts_(opts),
      proc_(eng),
      free_packets_(opts.pool_size) {
    if (opts.pool_size < 1)
        throw ConfigError("pt2pt: send-packet pool must hold at least one packet");
}

size_t Pt2ptNic::total_tokens() const {
    size_t n = 0;
    for (const auto& q : queues_) n += q.size();
    return n;
}

void Pt2ptNic::post_send(Rank dst, BarrierMsg msg) {
    if (dst == me_) throw ProtocolError("pt2pt: send to self");
    auto it = queue_index_.find(dst);
    if (it == queue_index_.end()) {
        it = queue_index_.emplace(dst, queues_.size()).first;
        queue_order_.push_back(dst);
        queues_.emplace_back();
    }
    queues_[it->second].push_back(Token{dst, msg});
    kick();
}

void Pt2ptNic::kick() {
    if (scanning_ || free_packets_ == 0 || total_tokens() == 0) return;
    scanning_ = true;
    scan(0);
}

// One scheduling pass: each queue inspected costs c_queue_pass. Service stops
// when a full cycle finds nothing or the packet pool is exhausted.
void Pt2ptNic::scan(size_t inspected) {
    if (inspected == queues_.size() || free_packets_ == 0) {
        scanning_ = false;
        return;
    }
    proc_.exec(cm_.c_queue_pass, [this, inspected] {
        auto& q = queues_[cursor_];
        if (!q.empty() && free_packets_ > 0) {
            Token tok = q.front();
            q.pop_front();
            cursor_ = (cursor_ + 1) % queues_.size();
            service(std::move(tok));
        } else {
            cursor_ = (cursor_ + 1) % queues_.size();
            scan(inspected + 1);
        }
    });
}

void Pt2ptNic::service(Token tok) {
    --free_packets_; // claimed for this token until the ACK releases it
    proc_.exec(cm_.c_pkt_alloc + cm_.c_nic_send, [this, tok] {
        std::uint64_t wire_seq = next_tx_seq_[tok.dst]++;
        Packet pkt{me_,           tok.dst,        PacketKind::Data,
                   tok.msg.group, tok.msg.round,  tok.msg.barrier_seq,
                   wire_seq,      16};
        net_.inject(pkt);
        InFlight rec{pkt, 0, kInvalidHandle};
        inflight_[{tok.dst, wire_seq}] = rec;
        if (opts_.acks_enabled) {
            arm_timer(tok.dst, wire_seq);
        } else {
            // test-only mode: fire-and-forget, release the packet at once
            inflight_.erase({tok.dst, wire_seq});
            ++free_packets_;
        }
        proc_.exec(cm_.c_record, [] {}); // send-record bookkeeping
        if (total_tokens() > 0 && free_packets_ > 0) {
            scan(0);
        } else {
            scanning_ = false;
        }
    });
}

void Pt2ptNic::arm_timer(Rank dst, std::uint64_t wire_seq) {
    auto it = inflight_.find({dst, wire_seq});
    if (it == inflight_.end()) return;
    it->second.timer = eng_.schedule(eng_.now() + cm_.sender_timeout,
                                     [this, dst, wire_seq] {
                                         on_timeout(dst, wire_seq);
                                     });
}

void Pt2ptNic::on_timeout(Rank dst, std::uint64_t wire_seq) {
    auto it = inflight_.find({dst, wire_seq});
    if (it == inflight_.end()) return;
    if (++it->second.retries > opts_.retry_limit)
        throw ProtocolError("pt2pt: retry limit exceeded, destination unreachable");
    proc_.exec(cm_.c_nic_send, [this, dst, wire_seq] {
        auto rec = inflight_.find({dst, wire_seq});
        if (rec == inflight_.end()) return; // ACK raced the retransmission
        ++retransmits_;
        net_.inject(rec->second.pkt, /*retransmit=*/true);
        arm_timer(dst, wire_seq);
    });
}

void Pt2ptNic::on_wire_arrival(const Packet& pkt) {
    switch (pkt.kind) {
        case PacketKind::Data:
            proc_.exec(cm_.c_nic_recv, [this, pkt] { handle_data(pkt); });
            return;
        case PacketKind::Ack:
            proc_.exec(cm_.c_nic_recv, [this, pkt] { handle_ack(pkt); });
            return;
        default:
            throw ProtocolError("pt2pt: unexpected packet kind on the wire");
    }
}

void Pt2ptNic::handle_data(const Packet& pkt) {
    std::uint64_t& expected = next_rx_seq_[pkt.src];
    if (pkt.wire_seq == expected) {
        ++expected;
        proc_.exec(cm_.c_record, [this, pkt] {
            if (deliver_)
                deliver_(pkt.src, BarrierMsg{pkt.group, pkt.round, pkt.barrier_seq});
            if (opts_.acks_enabled) send_ack(pkt.src, pkt);
        });
        return;
    }
    // Unexpected sequence: drop. A duplicate means our ACK was lost, so
    // re-ACK cumulatively to stop the sender's retransmissions.
    net_.sink().on_packet({eng_.now(), TraceAction::Drop, pkt});
    if (pkt.wire_seq < expected && opts_.acks_enabled) {
        Packet last = pkt;
        last.wire_seq = expected - 1;
        send_ack(pkt.src, last);
    }
}

// ACKs go out through the static per-peer packet: no queueing, no allocation.
void Pt2ptNic::send_ack(Rank dst, const Packet& acked) {
    proc_.exec(cm_.c_nic_send, [this, dst, acked] {
        Packet ack{me_,          dst,           PacketKind::Ack,
                   acked.group,  acked.round,   acked.barrier_seq,
                   acked.wire_seq, 8};
        net_.inject(ack);
    });
}

// ACKs are cumulative per peer: seq s releases every record up to s.
void Pt2ptNic::handle_ack(const Packet& pkt) {
    auto it = inflight_.lower_bound({pkt.src, 0});
    while (it != inflight_.end() && it->first.first == pkt.src &&
           it->first.second <= pkt.wire_seq) {
        eng_.cancel(it->second.timer);
        it = inflight_.erase(it);
        ++free_packets_;
    }
    kick();
}

} // namespace nicsim
