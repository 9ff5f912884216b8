#ifndef NICSIM_NETWORK_HPP
#define NICSIM_NETWORK_HPP

#include <memory>
#include <vector>

#include "nicsim/engine.hpp"
#include "nicsim/rng.hpp"
#include "nicsim/topology.hpp"
#include "nicsim/trace.hpp"

namespace nicsim {

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class NicBase {
public:
    virtual ~NicBase() = default;
    virtual void on_wire_arrival(const Packet& pkt) = 0;
};

// Wires the NICs together: applies the transit delay and the per-packet loss
// draw. Loss streams are split per sender so entity count does not perturb
// other streams.
class Network {
public:
    Network(Engine& eng, const CostModel& model, const Placement& placement,
            std::uint64_t seed, TraceSink* sink = nullptr);

    void attach(Rank rank, NicBase* nic);

    // Called at the instant the sender NIC finishes injecting.
    void inject(const Packet& pkt, bool retransmit = false);

    TraceSink& sink() { return *sink_; }
    const CostModel& model() const { return model_; }
    const Placement& placement() const { return placement_; }

private:
    Engine& eng_;
    const CostModel& model_;
    const Placement& placement_;
    std::vector<NicBase*> nics_;
    std::vector<Rng> loss_rngs_;
    TraceSink null_sink_;
    TraceSink* sink_;
};

} // namespace nicsim

#endif
