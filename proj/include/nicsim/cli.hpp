#ifndef NICSIM_CLI_HPP
#define NICSIM_CLI_HPP

#include <string>
#include <vector>

#include "nicsim/harness.hpp"

namespace nicsim {

// Exit codes: 0 success, 2 config error, 3 protocol corruption / invariant
// failure, 4 event budget exceeded.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitProtocol = 3;
inline constexpr int kExitBudget = 4;

// Reads a JSON experiment config. Flags override config-file values; unknown
// keys are rejected with a nearest-match suggestion.
ExperimentConfig parse_config(const std::string& path);

// "2..32" (every n) or "2..1024:pow2" (powers of two).
std::vector<int> parse_range(const std::string& spec);

struct ResultRow {
    std::string platform;
    std::string mode;
    std::string algorithm;
    int n = 0;
    double mean_us = 0.0;
};

std::vector<ResultRow> read_results_csv(const std::string& path);

// Full command-line front end; stdout carries machine-parseable output only.
int run_cli(int argc, const char* const* argv);

} // namespace nicsim

#endif
