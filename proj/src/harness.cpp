#include "nicsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <sstream>

#include "nicsim/barrier_endpoint.hpp"
#include "nicsim/collective.hpp"
#include "nicsim/elan.hpp"
#include "nicsim/engine.hpp"
#include "nicsim/pt2pt.hpp"

namespace nicsim {

std::string mode_name(BarrierMode m) {
    switch (m) {
        case BarrierMode::Host: return "host";
        case BarrierMode::NicPt2pt: return "nic-pt2pt";
        case BarrierMode::NicCollective: return "nic-collective";
        case BarrierMode::ElanChain: return "elan-chain";
    }
    return "?";
}

std::optional<BarrierMode> parse_mode(const std::string& name) {
    if (name == "host") return BarrierMode::Host;
    if (name == "nic-pt2pt") return BarrierMode::NicPt2pt;
    if (name == "nic-collective") return BarrierMode::NicCollective;
    if (name == "elan-chain") return BarrierMode::ElanChain;
    return std::nullopt;
}

void ExperimentConfig::validate(const CostModel& model) const {
    if (n < 1) throw ConfigError("config: n must be >= 1");
    if (warmup < 0) throw ConfigError("config: warmup must be >= 0");
    if (iterations < 1) throw ConfigError("config: iterations must be >= 1");
    if (host_skew_us < 0) throw ConfigError("config: host_skew must be >= 0");
    if (loss_prob) {
        if (*loss_prob < 0.0 || *loss_prob >= 1.0)
            throw ConfigError("config: loss_prob must be in [0,1)");
        if (model.reliable_network && *loss_prob > 0.0)
            throw ConfigError("config: cannot inject loss on a reliable network ("
                              + model.platform_name + ")");
    }
    if (mode == BarrierMode::ElanChain && !model.reliable_network)
        throw ConfigError("config: elan-chain mode requires a reliable platform preset");
}

namespace {

// One simulated node: drives its barrier backend and reports the lifecycle
// to the experiment controller.
class RankDriver {
public:
    virtual ~RankDriver() = default;
    virtual void initiate() = 0;
    virtual std::uint64_t retransmits() const { return 0; }
};

struct Lifecycle {
    std::function<void(Rank, std::uint64_t, SimTime)> completed;
};

class HostModeRank : public RankDriver {
public:
    HostModeRank(Engine& eng, Network& net, const CostModel& cm, Rank me,
                 const Schedule& sched, Lifecycle lc, Pt2ptOptions opts)
        : eng_(eng), cm_(cm), me_(me), host_(eng), lc_(std::move(lc)),
          nic_(eng, net, cm, me, opts) {
        net.attach(me, &nic_);
        ep_ = std::make_unique<BarrierEndpoint>(
            sched,
            [this](int round, std::uint64_t seq) {
                for (Rank dst : ep_->schedule().rounds[static_cast<size_t>(round)].send_to) {
                    host_.exec(cm_.c_host_post, [this, dst, round, seq] {
                        nic_.post_send(dst, BarrierMsg{0, round, seq});
                    });
                }
            },
            [this](std::uint64_t seq) { lc_.completed(me_, seq, eng_.now()); });
        nic_.set_deliver([this](Rank src, BarrierMsg msg) {
            // NIC -> host event crossing, then host CPU processing.
            eng_.schedule(eng_.now() + cm_.c_nic_to_host_event, [this, src, msg] {
                host_.exec(cm_.c_host_proc, [this, src, msg] {
                    if (ep_->on_message(msg.round, src, msg.barrier_seq) ==
                        BarrierEndpoint::Classify::Corrupt)
                        throw ProtocolError("host barrier: sequence out of window");
                });
            });
        });
    }

    void initiate() override { ep_->initiate(); }
    std::uint64_t retransmits() const override { return nic_.retransmits(); }

private:
    Engine& eng_;
    const CostModel& cm_;
    Rank me_;
    Processor host_;
    Lifecycle lc_;
    Pt2ptNic nic_;
    std::unique_ptr<BarrierEndpoint> ep_;
};

class NicPt2ptModeRank : public RankDriver {
public:
    NicPt2ptModeRank(Engine& eng, Network& net, const CostModel& cm, Rank me,
                     const Schedule& sched, Lifecycle lc, Pt2ptOptions opts)
        : eng_(eng), cm_(cm), me_(me), host_(eng), lc_(std::move(lc)),
          nic_(eng, net, cm, me, opts) {
        net.attach(me, &nic_);
        ep_ = std::make_unique<BarrierEndpoint>(
            sched,
            [this](int round, std::uint64_t seq) {
                // arrival-triggered sends stay on the NIC
                for (Rank dst : ep_->schedule().rounds[static_cast<size_t>(round)].send_to)
                    nic_.post_send(dst, BarrierMsg{0, round, seq});
            },
            [this](std::uint64_t seq) {
                // host learns of completion only at the end
                eng_.schedule(eng_.now() + cm_.c_nic_to_host_event,
                              [this, seq] { lc_.completed(me_, seq, eng_.now()); });
            });
        nic_.set_deliver([this](Rank src, BarrierMsg msg) {
            if (ep_->on_message(msg.round, src, msg.barrier_seq) ==
                BarrierEndpoint::Classify::Corrupt)
                throw ProtocolError("nic-pt2pt barrier: sequence out of window");
        });
    }

    void initiate() override {
        // one host-posted request for the whole barrier
        host_.exec(cm_.c_host_post, [this] { ep_->initiate(); });
    }
    std::uint64_t retransmits() const override { return nic_.retransmits(); }

private:
    Engine& eng_;
    const CostModel& cm_;
    Rank me_;
    Processor host_;
    Lifecycle lc_;
    Pt2ptNic nic_;
    std::unique_ptr<BarrierEndpoint> ep_;
};

class CollectiveModeRank : public RankDriver {
public:
    CollectiveModeRank(Engine& eng, Network& net, const CostModel& cm, Rank me,
                       const Schedule& sched, Lifecycle lc)
        : eng_(eng), cm_(cm), me_(me), host_(eng), lc_(std::move(lc)),
          nic_(eng, net, cm, me) {
        net.attach(me, &nic_);
        std::vector<Rank> members(static_cast<size_t>(sched.n));
        for (Rank r = 0; r < sched.n; ++r) members[static_cast<size_t>(r)] = r;
        group_ = nic_.register_group(members, sched);
        nic_.set_on_complete([this](int, std::uint64_t seq) {
            eng_.schedule(eng_.now() + cm_.c_nic_to_host_event,
                          [this, seq] { lc_.completed(me_, seq, eng_.now()); });
        });
    }

    void initiate() override {
        host_.exec(cm_.c_host_post, [this] { nic_.initiate(group_); });
    }
    std::uint64_t retransmits() const override { return nic_.retransmits(); }

private:
    Engine& eng_;
    const CostModel& cm_;
    Rank me_;
    Processor host_;
    Lifecycle lc_;
    CollectiveNic nic_;
    int group_ = 0;
};

class ElanModeRank : public RankDriver {
public:
    ElanModeRank(Engine& eng, Network& net, const CostModel& cm, Rank me,
                 const Schedule& sched, Lifecycle lc)
        : eng_(eng), cm_(cm), me_(me), host_(eng), lc_(std::move(lc)),
          nic_(eng, net, cm, me, sched) {
        net.attach(me, &nic_);
        nic_.set_on_complete([this](std::uint64_t seq) {
            eng_.schedule(eng_.now() + cm_.c_nic_to_host_event,
                          [this, seq] { lc_.completed(me_, seq, eng_.now()); });
        });
    }

    void initiate() override {
        host_.exec(cm_.c_host_post, [this] { nic_.trigger(); });
    }

private:
    Engine& eng_;
    const CostModel& cm_;
    Rank me_;
    Processor host_;
    Lifecycle lc_;
    ElanRank nic_;
};

// Counts sent packets and retransmissions for iterations past the warm-up.
class CountingSink : public TraceSink {
public:
    CountingSink(std::uint64_t first_measured_seq)
        : first_(first_measured_seq) {}

    void on_packet(const TraceRecord& r) override {
        if (r.pkt.barrier_seq < first_) return;
        if (r.action == TraceAction::Send || r.action == TraceAction::Retransmit) {
            switch (r.pkt.kind) {
                case PacketKind::Barrier: ++barrier; break;
                case PacketKind::Data: ++data; break;
                case PacketKind::Ack: ++ack; break;
                case PacketKind::Nack: ++nack; break;
            }
        }
        if (r.action == TraceAction::Retransmit) ++retransmit;
    }

    std::uint64_t barrier = 0, data = 0, ack = 0, nack = 0, retransmit = 0;

private:
    std::uint64_t first_;
};

double percentile(const std::vector<double>& sorted, double pct) {
    if (sorted.empty()) return 0.0;
    double rank = pct / 100.0 * static_cast<double>(sorted.size() - 1);
    size_t idx = static_cast<size_t>(std::llround(rank));
    return sorted[std::min(idx, sorted.size() - 1)];
}

} // namespace

Measurement run_experiment(const ExperimentConfig& cfg, const CostModel& model,
                           TraceSink* extra_sink) {
    CostModel cm = model;
    if (cfg.loss_prob) cm.loss_prob = *cfg.loss_prob;
    cfg.validate(cm);
    cm.validate();

    if (cfg.n == 1) {
        // A singleton barrier involves no communication and completes at the
        // instant it is entered.
        Measurement m;
        m.series_us.assign(static_cast<size_t>(cfg.iterations), 0.0);
        return m;
    }

    Engine eng;
    Rng placement_rng = Rng::split(cfg.seed, "placement");
    Placement placement = permute_placement(cfg.n, placement_rng);
    cm.apply_default_timeouts(placement.max_hops());

    auto schedules = build_all_schedules(cfg.alg, cfg.n);
    if (auto v = validate_schedules(schedules))
        throw ProtocolError("invalid schedule: " + v->what);

    std::uint64_t total = static_cast<std::uint64_t>(cfg.warmup) +
                          static_cast<std::uint64_t>(cfg.iterations);
    CountingSink counts(static_cast<std::uint64_t>(cfg.warmup) + 1);
    TeeTraceSink tee;
    tee.add(&counts);
    tee.add(extra_sink);

    Network net(eng, cm, placement, cfg.seed, &tee);

    std::vector<Rng> skew_rngs;
    for (int r = 0; r < cfg.n; ++r)
        skew_rngs.push_back(Rng::split(cfg.seed, "skew/" + std::to_string(r)));
    SimTime max_skew = SimTime::us(cfg.host_skew_us);

    // Per-iteration window: last rank in, last rank out.
    std::vector<SimTime> last_init(total + 1), last_complete(total + 1);
    std::vector<int> complete_count(total + 1, 0);
    std::vector<std::unique_ptr<RankDriver>> ranks;

    auto initiate_rank = [&](Rank r, std::uint64_t seq) {
        SimTime t = eng.now();
        tee.on_initiate(r, seq, t);
        last_init[seq] = std::max(last_init[seq], t);
        ranks[static_cast<size_t>(r)]->initiate();
    };

    Lifecycle lc;
    lc.completed = [&](Rank r, std::uint64_t seq, SimTime t) {
        tee.on_complete(r, seq, t);
        last_complete[seq] = std::max(last_complete[seq], t);
        ++complete_count[seq];
        if (seq < total) {
            SimTime delay;
            if (max_skew > SimTime{}) {
                std::uint64_t span = static_cast<std::uint64_t>(max_skew.as_ns()) + 1;
                delay = SimTime::ns(static_cast<std::int64_t>(
                    skew_rngs[static_cast<size_t>(r)].next_below(span)));
            }
            eng.schedule(t + delay, [&initiate_rank, r, seq] {
                initiate_rank(r, seq + 1);
            });
        }
    };

    Pt2ptOptions opts; // defaults: pool 4, retry limit 100, ACKs on
    for (Rank r = 0; r < cfg.n; ++r) {
        const Schedule& sched = schedules[static_cast<size_t>(r)];
        switch (cfg.mode) {
            case BarrierMode::Host:
                ranks.push_back(std::make_unique<HostModeRank>(eng, net, cm, r, sched, lc, opts));
                break;
            case BarrierMode::NicPt2pt:
                ranks.push_back(std::make_unique<NicPt2ptModeRank>(eng, net, cm, r, sched, lc, opts));
                break;
            case BarrierMode::NicCollective:
                ranks.push_back(std::make_unique<CollectiveModeRank>(eng, net, cm, r, sched, lc));
                break;
            case BarrierMode::ElanChain:
                ranks.push_back(std::make_unique<ElanModeRank>(eng, net, cm, r, sched, lc));
                break;
        }
    }

    for (Rank r = 0; r < cfg.n; ++r) {
        SimTime delay;
        if (max_skew > SimTime{}) {
            std::uint64_t span = static_cast<std::uint64_t>(max_skew.as_ns()) + 1;
            delay = SimTime::ns(static_cast<std::int64_t>(
                skew_rngs[static_cast<size_t>(r)].next_below(span)));
        }
        eng.schedule(delay, [&initiate_rank, r] { initiate_rank(r, 1); });
    }

    eng.run_until_idle();

    for (std::uint64_t k = 1; k <= total; ++k)
        if (complete_count[k] != cfg.n)
            throw ProtocolError("barrier " + std::to_string(k) +
                                " did not complete on all ranks");

    Measurement m;
    m.series_us.reserve(static_cast<size_t>(cfg.iterations));
    for (std::uint64_t k = static_cast<std::uint64_t>(cfg.warmup) + 1; k <= total; ++k)
        m.series_us.push_back((last_complete[k] - last_init[k]).as_us());
    std::vector<double> sorted = m.series_us;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0;
    for (double v : sorted) sum += v;
    m.mean_us = sum / static_cast<double>(sorted.size());
    m.min_us = sorted.front();
    m.max_us = sorted.back();
    m.p50_us = percentile(sorted, 50);
    m.p99_us = percentile(sorted, 99);
    m.pkts_barrier = counts.barrier;
    m.pkts_data = counts.data;
    m.pkts_ack = counts.ack;
    m.pkts_nack = counts.nack;
    m.retransmits = counts.retransmit;
    return m;
}

double ModeComparison::improvement_over_host(BarrierMode m) const {
    return results.at(BarrierMode::Host).mean_us / results.at(m).mean_us;
}

ModeComparison compare_modes(const ExperimentConfig& base, const CostModel& model) {
    ModeComparison cmp;
    std::vector<BarrierMode> modes{BarrierMode::Host, BarrierMode::NicPt2pt,
                                   BarrierMode::NicCollective};
    if (model.reliable_network) modes.push_back(BarrierMode::ElanChain);
    for (BarrierMode m : modes) {
        ExperimentConfig cfg = base;
        cfg.mode = m;
        cmp.results.emplace(m, run_experiment(cfg, model));
    }
    return cmp;
}

std::map<std::tuple<PacketKind, Rank, Rank>, std::uint64_t>
count_packets(const std::vector<TraceRecord>& trace) {
    std::map<std::tuple<PacketKind, Rank, Rank>, std::uint64_t> out;
    for (const auto& r : trace)
        if (r.action == TraceAction::Send || r.action == TraceAction::Retransmit)
            ++out[{r.pkt.kind, r.pkt.src, r.pkt.dst}];
    return out;
}

std::string csv_header() {
    return "platform,mode,algorithm,n,seed,mean_us,p50_us,p99_us,min_us,max_us,"
           "pkts_barrier,pkts_data,pkts_ack,pkts_nack,retransmits";
}

std::string csv_row(const ExperimentConfig& cfg, const Measurement& m) {
    std::ostringstream os;
    char num[64];
    os << cfg.platform << ',' << mode_name(cfg.mode) << ','
       << algorithm_name(cfg.alg) << ',' << cfg.n << ',' << cfg.seed;
    for (double v : {m.mean_us, m.p50_us, m.p99_us, m.min_us, m.max_us}) {
        std::snprintf(num, sizeof(num), "%.3f", v);
        os << ',' << num;
    }
    os << ',' << m.pkts_barrier << ',' << m.pkts_data << ',' << m.pkts_ack
       << ',' << m.pkts_nack << ',' << m.retransmits;
    return os.str();
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
    out << "time_ns,kind,src,dst,group,round,seq,action\n";
    for (const auto& r : trace) {
        out << r.time.as_ns() << ',' << packet_kind_name(r.pkt.kind) << ','
            << r.pkt.src << ',' << r.pkt.dst << ',' << r.pkt.group << ','
            << r.pkt.round << ',' << r.pkt.barrier_seq << ','
            << trace_action_name(r.action) << '\n';
    }
}

} // namespace nicsim
