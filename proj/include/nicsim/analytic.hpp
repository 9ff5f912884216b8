#ifndef NICSIM_ANALYTIC_HPP
#define NICSIM_ANALYTIC_HPP

#include <string>
#include <vector>

#include "nicsim/topology.hpp"

namespace nicsim {

// Scalability-model constants: two-node base latency, per-triggered-message
// increment, and adjustment term (the latter may be negative).
struct ModelParams {
    double t_init_us = 0.0;
    double t_trig_us = 0.0;
    double t_adj_us = 0.0;
    std::string label;
};

// t_init + (ceil(log2 n) - 1) * t_trig + t_adj, n >= 2.
double predict_latency_us(const ModelParams& p, int n);

// Published constant sets for the two modeled platforms.
ModelParams builtin_params(const std::string& platform);

struct FitResult {
    ModelParams params;
    double max_abs_residual_us = 0.0;
};

struct LatencySample {
    int n = 0;
    double latency_us = 0.0;
};

// Ordinary least squares of latency on (ceil(log2 n) - 1). The fit only
// exposes slope and intercept; by convention t_init is the n=2 sample when
// one is present (otherwise the intercept) and t_adj absorbs the remainder.
FitResult fit_constants(const std::vector<LatencySample>& samples);

} // namespace nicsim

#endif
