#include "nicsim/analytic.hpp"

#include <cmath>
#include <set>

#include "nicsim/schedule.hpp"

namespace nicsim {

double predict_latency_us(const ModelParams& p, int n) {
    if (n < 2)
        throw ConfigError("predict_latency: n must be >= 2 (t_init is a two-node quantity)");
    return p.t_init_us + (ceil_log(2, n) - 1) * p.t_trig_us + p.t_adj_us;
}

ModelParams builtin_params(const std::string& platform) {
    if (platform == "myrinet-lanai-xp")
        return ModelParams{3.60, 3.50, 3.84, platform};
    if (platform == "quadrics-elan3")
        return ModelParams{2.25, 2.32, -1.00, platform};
    throw ConfigError("no published model constants for platform '" + platform + "'");
}

FitResult fit_constants(const std::vector<LatencySample>& samples) {
    if (samples.size() < 3)
        throw ConfigError("fit_constants: need at least 3 samples");
    std::set<int> distinct;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& s : samples) {
        if (s.n < 2) throw ConfigError("fit_constants: samples require n >= 2");
        int x = ceil_log(2, s.n) - 1;
        distinct.insert(x);
        sx += x;
        sy += s.latency_us;
        sxx += static_cast<double>(x) * x;
        sxy += x * s.latency_us;
    }
    if (distinct.size() < 2)
        throw ConfigError("fit_constants: need >= 2 distinct values of ceil(log2 n)");
    double m = static_cast<double>(samples.size());
    double denom = m * sxx - sx * sx;
    double slope = (m * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / m;

    FitResult out;
    out.params.t_trig_us = slope;
    out.params.label = "fit";
    double t_init = intercept;
    for (const auto& s : samples)
        if (s.n == 2) { t_init = s.latency_us; break; }
    out.params.t_init_us = t_init;
    out.params.t_adj_us = intercept - t_init;
    for (const auto& s : samples) {
        double r = std::fabs(predict_latency_us(out.params, s.n) - s.latency_us);
        out.max_abs_residual_us = std::max(out.max_abs_residual_us, r);
    }
    return out;
}

} // namespace nicsim
