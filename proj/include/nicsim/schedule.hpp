#ifndef NICSIM_SCHEDULE_HPP
#define NICSIM_SCHEDULE_HPP

#include <optional>
#include <string>
#include <vector>

#include "nicsim/topology.hpp"

namespace nicsim {

enum class Algorithm {
    GatherBroadcast,
    PairwiseExchange,
    Dissemination,
};

struct AlgorithmKind {
    Algorithm alg = Algorithm::Dissemination;
    int degree = 2; // used by GatherBroadcast only
};

std::string algorithm_name(AlgorithmKind kind);
std::optional<AlgorithmKind> parse_algorithm(const std::string& name, int degree = 2);

struct Round {
    std::vector<Rank> send_to;
    std::vector<Rank> await_from;
};

// Per-rank communication plan: round r's sends fire only once every await of
// rounds 0..r-1 has been satisfied.
struct Schedule {
    int n = 0;
    Rank me = 0;
    std::vector<Round> rounds;

    int total_sends() const;
    int total_awaits() const;
};

// Pure function of (alg, n, me).
Schedule build_schedule(AlgorithmKind kind, int n, Rank me);

// Algorithmic step count:
//   gather-broadcast  2 * ceil(log_d n)
//   pairwise-exchange log2 n if n is a power of two, else floor(log2 n) + 2
//   dissemination     ceil(log2 n)
int num_steps(AlgorithmKind kind, int n);

std::vector<Schedule> build_all_schedules(AlgorithmKind kind, int n);

struct ScheduleViolation {
    int round;
    Rank sender;
    Rank receiver;
    std::string what;
};

// Checks global send/await matching and deadlock-freedom of the round
// structure. Returns the first violation found, or nullopt.
std::optional<ScheduleViolation>
validate_schedules(const std::vector<Schedule>& all);

int ceil_log(int base, int n);
bool is_power_of_two(int n);

} // namespace nicsim

#endif
