#ifndef NICSIM_HARNESS_HPP
#define NICSIM_HARNESS_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "nicsim/schedule.hpp"
#include "nicsim/topology.hpp"
#include "nicsim/trace.hpp"

namespace nicsim {

enum class BarrierMode { Host, NicPt2pt, NicCollective, ElanChain };

std::string mode_name(BarrierMode m);
std::optional<BarrierMode> parse_mode(const std::string& name);

struct ExperimentConfig {
    std::string platform;
    BarrierMode mode = BarrierMode::NicCollective;
    AlgorithmKind alg;
    int n = 2;
    int warmup = 100;
    int iterations = 10000;
    std::uint64_t seed = 1;
    std::optional<double> loss_prob; // overrides the preset
    double host_skew_us = 0.0;       // max random stagger of barrier entry

    void validate(const CostModel& model) const;
};

struct Measurement {
    double mean_us = 0.0;
    double min_us = 0.0;
    double max_us = 0.0;
    double p50_us = 0.0;
    double p99_us = 0.0;
    std::uint64_t pkts_barrier = 0;
    std::uint64_t pkts_data = 0;
    std::uint64_t pkts_ack = 0;
    std::uint64_t pkts_nack = 0;
    std::uint64_t retransmits = 0;
    std::vector<double> series_us; // per measured iteration
};

// Runs warmup + iterations consecutive barriers with a seed-randomized node
// permutation; warm-up iterations are excluded from statistics and packet
// counts. Deterministic given the config.
Measurement run_experiment(const ExperimentConfig& cfg, const CostModel& model,
                           TraceSink* extra_sink = nullptr);

// Runs every applicable mode on the shared seed and reports host/x ratios.
struct ModeComparison {
    std::map<BarrierMode, Measurement> results;
    double improvement_over_host(BarrierMode m) const;
};

ModeComparison compare_modes(const ExperimentConfig& base, const CostModel& model);

// Exact accounting over a stored trace: sent packets by (kind, src, dst).
std::map<std::tuple<PacketKind, Rank, Rank>, std::uint64_t>
count_packets(const std::vector<TraceRecord>& trace);

// CSV schema (one row per experiment).
std::string csv_header();
std::string csv_row(const ExperimentConfig& cfg, const Measurement& m);

// Trace file schema (one row per packet event).
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);

} // namespace nicsim

#endif
