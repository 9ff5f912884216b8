#ifndef NICSIM_PT2PT_HPP
#define NICSIM_PT2PT_HPP

#include <deque>
#include <functional>
#include <map>

#include "nicsim/barrier_endpoint.hpp"
#include "nicsim/network.hpp"

namespace nicsim {

// Barrier payload carried inside a DATA packet: one integer's worth of
// identity, still paying the full point-to-point machinery.
struct BarrierMsg {
    int group = 0;
    int round = 0;
    std::uint64_t barrier_seq = 0;
};

struct Pt2ptOptions {
    int pool_size = 4;     // free send packets per NIC
    int retry_limit = 100;
    bool acks_enabled = true;
};

// MCP-like point-to-point send/receive machinery: per-destination send
// queues serviced round-robin, a bounded send-packet pool, per-packet send
// records with ACK/timeout retransmission, and sequence-checked receives
// that drop unexpected packets.
class Pt2ptNic : public NicBase {
public:
    using DeliverFn = std::function<void(Rank src, BarrierMsg msg)>;

    Pt2ptNic(Engine& eng, Network& net, const CostModel& model, Rank me,
             Pt2ptOptions opts = {});

    // Enqueues a send token for dst; the scheduling pass picks it up.
    void post_send(Rank dst, BarrierMsg msg);

    // Called once the receive record update completes (after c_nic_recv +
    // c_record on the NIC processor).
    void set_deliver(DeliverFn fn) { deliver_ = std::move(fn); }

    void on_wire_arrival(const Packet& pkt) override;

    Processor& proc() { return proc_; }
    Rank rank() const { return me_; }
    std::uint64_t retransmits() const { return retransmits_; }

private:
    struct Token {
        Rank dst;
        BarrierMsg msg;
    };
    struct InFlight {
        Packet pkt;
        int retries = 0;
        EventHandle timer = kInvalidHandle;
    };

    void kick();
    void scan(size_t inspected);
    void service(Token tok);
    void arm_timer(Rank dst, std::uint64_t wire_seq);
    void on_timeout(Rank dst, std::uint64_t wire_seq);
    void handle_data(const Packet& pkt);
    void handle_ack(const Packet& pkt);
    void send_ack(Rank dst, const Packet& acked);
    size_t total_tokens() const;

    Engine& eng_;
    Network& net_;
    const CostModel& cm_;
    Rank me_;
    Pt2ptOptions opts_;
    Processor proc_;
    DeliverFn deliver_;

    std::vector<Rank> queue_order_;            // lazily created, stable order
    std::map<Rank, size_t> queue_index_;
    std::vector<std::deque<Token>> queues_;
    size_t cursor_ = 0;
    bool scanning_ = false;
    int free_packets_;

    std::map<Rank, std::uint64_t> next_tx_seq_;
    std::map<Rank, std::uint64_t> next_rx_seq_;
    std::map<std::pair<Rank, std::uint64_t>, InFlight> inflight_;
    std::uint64_t retransmits_ = 0;
};

} // namespace nicsim

#endif
