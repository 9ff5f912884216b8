#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>

#include "nicsim/pt2pt.hpp"

using namespace nicsim;

namespace {

CostModel test_model() {
    CostModel m;
    m.platform_name = "unit-test";
    m.c_queue_pass = SimTime::us(0.3);
    m.c_pkt_alloc = SimTime::us(0.8);
    m.c_nic_send = SimTime::us(1.3);
    m.c_nic_recv = SimTime::us(1.3);
    m.c_record = SimTime::us(0.3);
    m.c_wire = SimTime::us(1.0);
    m.c_hop = SimTime::us(0.05);
    m.sender_timeout = SimTime::us(20.0);
    m.receiver_timeout = SimTime::us(10.0);
    return m;
}

struct Delivery {
    Rank to;
    Rank from;
    BarrierMsg msg;
    SimTime at;
};

struct Fixture {
    CostModel cm;
    Engine eng;
    Placement pl;
    VectorTraceSink trace;
    Network net;
    std::vector<std::unique_ptr<Pt2ptNic>> nics;
    std::vector<Delivery> delivered;

    Fixture(int n, CostModel model, std::uint64_t seed = 1,
            Pt2ptOptions opts = {})
        : cm(std::move(model)),
          pl(Placement::identity(n)),
          net(eng, cm, pl, seed, &trace) {
        for (Rank r = 0; r < n; ++r) {
            nics.push_back(std::make_unique<Pt2ptNic>(eng, net, cm, r, opts));
            net.attach(r, nics.back().get());
            Rank me = r;
            nics.back()->set_deliver([this, me](Rank src, BarrierMsg msg) {
                delivered.push_back({me, src, msg, eng.now()});
            });
        }
    }

    std::vector<TraceRecord> sends(PacketKind kind) const {
        std::vector<TraceRecord> out;
        for (const auto& r : trace.records)
            if (r.pkt.kind == kind && (r.action == TraceAction::Send ||
                                       r.action == TraceAction::Retransmit))
                out.push_back(r);
        return out;
    }

    std::size_t count(PacketKind kind, TraceAction action) const {
        std::size_t n = 0;
        for (const auto& r : trace.records)
            if (r.pkt.kind == kind && r.action == action) ++n;
        return n;
    }
};

} // namespace

TEST_CASE("single send pays every point-to-point cost stage") {
    Fixture f(2, test_model());
    f.eng.schedule(SimTime{}, [&] {
        f.nics[0]->post_send(1, BarrierMsg{0, 0, 1});
    });
    f.eng.run_until_idle();

    REQUIRE(f.delivered.size() == 1);
    CHECK(f.delivered[0].to == 1);
    CHECK(f.delivered[0].from == 0);
    // queue pass + pkt alloc + nic send + (wire + 1 hop) + nic recv + record
    // = 0.3 + 0.8 + 1.3 + 1.05 + 1.3 + 0.3
    CHECK(f.delivered[0].at == SimTime::us(5.05));
    // the delivery is acknowledged
    CHECK(f.count(PacketKind::Ack, TraceAction::Send) == 1);
    CHECK(f.nics[0]->retransmits() == 0);
}

TEST_CASE("sends to distinct destinations are serviced round-robin") {
    Fixture f(3, test_model());
    f.eng.schedule(SimTime{}, [&] {
        f.nics[0]->post_send(1, BarrierMsg{0, 0, 1});
        f.nics[0]->post_send(1, BarrierMsg{0, 1, 1});
        f.nics[0]->post_send(2, BarrierMsg{0, 0, 1});
        f.nics[0]->post_send(2, BarrierMsg{0, 1, 1});
    });
    f.eng.run_until_idle();

    std::vector<Rank> order;
    for (const auto& r : f.sends(PacketKind::Data)) order.push_back(r.pkt.dst);
    CHECK(order == std::vector<Rank>{1, 2, 1, 2});
    REQUIRE(f.delivered.size() == 4);
}

TEST_CASE("an exhausted packet pool delays transmission until an ack frees one") {
    Pt2ptOptions opts;
    opts.pool_size = 1;
    Fixture f(2, test_model(), 1, opts);
    f.eng.schedule(SimTime{}, [&] {
        f.nics[0]->post_send(1, BarrierMsg{0, 0, 1});
        f.nics[0]->post_send(1, BarrierMsg{0, 1, 1});
    });
    f.eng.run_until_idle();

    auto data = f.sends(PacketKind::Data);
    REQUIRE(data.size() == 2);
    // first ACK must be back before the second DATA leaves
    SimTime first_ack_recv;
    for (const auto& r : f.trace.records)
        if (r.pkt.kind == PacketKind::Ack && r.action == TraceAction::Recv) {
            first_ack_recv = r.time;
            break;
        }
    CHECK(first_ack_recv > SimTime{});
    CHECK(data[1].time > first_ack_recv);
    REQUIRE(f.delivered.size() == 2);
}

TEST_CASE("a future-sequence packet is dropped without state change") {
    Fixture f(2, test_model());
    f.eng.schedule(SimTime{}, [&] {
        Packet ahead{0, 1, PacketKind::Data, 0, 0, 1, /*wire_seq=*/5, 16};
        f.nics[1]->on_wire_arrival(ahead);
    });
    f.eng.run_until_idle();

    CHECK(f.delivered.empty());
    CHECK(f.count(PacketKind::Data, TraceAction::Drop) == 1);
    CHECK(f.count(PacketKind::Ack, TraceAction::Send) == 0);

    // the expected sequence is still 0: a normal send goes through afterwards
    f.eng.schedule(f.eng.now(), [&] {
        f.nics[0]->post_send(1, BarrierMsg{0, 0, 1});
    });
    f.eng.run_until_idle();
    CHECK(f.delivered.size() == 1);
}

TEST_CASE("a duplicate packet is dropped but re-acknowledged") {
    Fixture f(2, test_model());
    f.eng.schedule(SimTime{}, [&] {
        f.nics[0]->post_send(1, BarrierMsg{0, 0, 1});
    });
    f.eng.run_until_idle();
    REQUIRE(f.delivered.size() == 1);
    std::size_t acks_before = f.count(PacketKind::Ack, TraceAction::Send);

    // replay the already-delivered packet
    f.eng.schedule(f.eng.now(), [&] {
        Packet dup{0, 1, PacketKind::Data, 0, 0, 1, 0, 16};
        f.nics[1]->on_wire_arrival(dup);
    });
    f.eng.run_until_idle();

    CHECK(f.delivered.size() == 1); // not delivered twice
    CHECK(f.count(PacketKind::Data, TraceAction::Drop) == 1);
    CHECK(f.count(PacketKind::Ack, TraceAction::Send) == acks_before + 1);
}

TEST_CASE("data between a fixed pair is delivered in posting order") {
    Fixture f(2, test_model());
    f.eng.schedule(SimTime{}, [&] {
        for (int i = 0; i < 6; ++i)
            f.nics[0]->post_send(1, BarrierMsg{0, i, 1});
    });
    f.eng.run_until_idle();

    REQUIRE(f.delivered.size() == 6);
    for (int i = 0; i < 6; ++i) CHECK(f.delivered[static_cast<size_t>(i)].msg.round == i);
}

TEST_CASE("lossless traffic has exactly one ack per data packet") {
    Fixture f(4, test_model());
    f.eng.schedule(SimTime{}, [&] {
        for (Rank src = 0; src < 4; ++src)
            for (Rank dst = 0; dst < 4; ++dst)
                if (src != dst) f.nics[static_cast<size_t>(src)]->post_send(dst, BarrierMsg{0, 0, 1});
    });
    f.eng.run_until_idle();

    CHECK(f.delivered.size() == 12);
    CHECK(f.count(PacketKind::Data, TraceAction::Send) == 12);
    CHECK(f.count(PacketKind::Ack, TraceAction::Send) == 12);
    CHECK(f.count(PacketKind::Data, TraceAction::Retransmit) == 0);
    for (const auto& n : f.nics) CHECK(n->retransmits() == 0);
}

TEST_CASE("lost packets are recovered by timeout retransmission") {
    CostModel cm = test_model();
    cm.loss_prob = 0.4;
    Fixture f(2, cm, /*seed=*/7);
    f.eng.schedule(SimTime{}, [&] {
        for (int i = 0; i < 20; ++i)
            f.nics[0]->post_send(1, BarrierMsg{0, i, 1});
    });
    f.eng.run_until_idle();

    // every message arrives exactly once, in order, despite the losses
    REQUIRE(f.delivered.size() == 20);
    for (int i = 0; i < 20; ++i) CHECK(f.delivered[static_cast<size_t>(i)].msg.round == i);
    CHECK(f.count(PacketKind::Data, TraceAction::Drop) > 0);

    // every wire-lost DATA packet (a drop with no receive at the same time)
    // is later retransmitted with the same wire sequence
    for (const auto& d : f.trace.records) {
        if (d.action != TraceAction::Drop || d.pkt.kind != PacketKind::Data)
            continue;
        bool receiver_side = false;
        for (const auto& r : f.trace.records)
            if (r.action == TraceAction::Recv && r.time == d.time &&
                r.pkt.kind == PacketKind::Data &&
                r.pkt.wire_seq == d.pkt.wire_seq && r.pkt.src == d.pkt.src)
                receiver_side = true;
        if (receiver_side) continue; // dropped after arrival (sequence check)
        // recovery: a later retransmit of that packet, or a later cumulative
        // ACK proving the data had already made it across
        bool recovered = false;
        for (const auto& r : f.trace.records) {
            if (r.time <= d.time) continue;
            if (r.action == TraceAction::Retransmit &&
                r.pkt.src == d.pkt.src && r.pkt.dst == d.pkt.dst &&
                r.pkt.wire_seq == d.pkt.wire_seq)
                recovered = true;
            if (r.action == TraceAction::Recv && r.pkt.kind == PacketKind::Ack &&
                r.pkt.src == d.pkt.dst && r.pkt.dst == d.pkt.src &&
                r.pkt.wire_seq >= d.pkt.wire_seq)
                recovered = true;
        }
        CHECK(recovered);
    }
}

TEST_CASE("loss runs are reproducible for a fixed seed") {
    auto run = [] {
        CostModel cm = test_model();
        cm.loss_prob = 0.3;
        Fixture f(2, cm, 42);
        f.eng.schedule(SimTime{}, [&] {
            for (int i = 0; i < 10; ++i)
                f.nics[0]->post_send(1, BarrierMsg{0, i, 1});
        });
        SimTime end = f.eng.run_until_idle();
        return std::make_pair(end, f.trace.records.size());
    };
    CHECK(run() == run());
}

TEST_CASE("an unreachable destination exhausts the retry limit") {
    CostModel cm = test_model();
    cm.loss_prob = 0.99;
    Pt2ptOptions opts;
    opts.retry_limit = 2;
    Fixture f(2, cm, 3, opts);
    f.eng.schedule(SimTime{}, [&] {
        f.nics[0]->post_send(1, BarrierMsg{0, 0, 1});
    });
    CHECK_THROWS_AS(f.eng.run_until_idle(), ProtocolError);
}

TEST_CASE("misdirected configuration is rejected") {
    Fixture f(2, test_model());
    CHECK_THROWS_AS(f.nics[0]->post_send(0, BarrierMsg{}), ProtocolError);
    Pt2ptOptions bad;
    bad.pool_size = 0;
    CHECK_THROWS_AS(Pt2ptNic(f.eng, f.net, f.cm, 0, bad), ConfigError);
}

TEST_CASE("barrier and nack packets are rejected on the point-to-point wire") {
    Fixture f(2, test_model());
    Packet stray{0, 1, PacketKind::Barrier, 0, 0, 1, 0, 12};
    CHECK_THROWS_AS(f.nics[1]->on_wire_arrival(stray), ProtocolError);
}
