#ifndef NICSIM_TRACE_HPP
#define NICSIM_TRACE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nicsim/sim_time.hpp"
#include "nicsim/topology.hpp"

namespace nicsim {

enum class PacketKind { Barrier, Nack, Data, Ack };

const char* packet_kind_name(PacketKind k);

// Simulated wire unit. Barrier and NACK packets carry no bulk payload;
// their entire content is the (group, round, barrier_seq) identity. DATA and
// ACK additionally carry the per-destination wire sequence number.
struct Packet {
    Rank src = 0;
    Rank dst = 0;
    PacketKind kind = PacketKind::Data;
    int group = 0;
    int round = 0;
    std::uint64_t barrier_seq = 0;
    std::uint64_t wire_seq = 0;
    int size = 8; // header + one integer
};

enum class TraceAction { Send, Recv, Drop, Retransmit };

const char* trace_action_name(TraceAction a);

struct TraceRecord {
    SimTime time;
    TraceAction action;
    Packet pkt;
};

// Observers of simulation progress. Packet events stream through on_packet;
// barrier lifecycle events let checkers reason about safety.
class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void on_packet(const TraceRecord&) {}
    virtual void on_initiate(Rank, std::uint64_t /*seq*/, SimTime) {}
    virtual void on_complete(Rank, std::uint64_t /*seq*/, SimTime) {}
};

class VectorTraceSink : public TraceSink {
public:
    void on_packet(const TraceRecord& r) override { records.push_back(r); }
    std::vector<TraceRecord> records;
};

// Fans one event stream out to several sinks.
class TeeTraceSink : public TraceSink {
public:
    void add(TraceSink* s) { if (s) sinks_.push_back(s); }
    void on_packet(const TraceRecord& r) override {
        for (auto* s : sinks_) s->on_packet(r);
    }
    void on_initiate(Rank rank, std::uint64_t seq, SimTime t) override {
        for (auto* s : sinks_) s->on_initiate(rank, seq, t);
    }
    void on_complete(Rank rank, std::uint64_t seq, SimTime t) override {
        for (auto* s : sinks_) s->on_complete(rank, seq, t);
    }

private:
    std::vector<TraceSink*> sinks_;
};

} // namespace nicsim

#endif
