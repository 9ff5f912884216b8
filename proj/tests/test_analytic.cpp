#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nicsim/analytic.hpp"
#include "nicsim/sim_time.hpp"

using namespace nicsim;

TEST_CASE("published constants reproduce the 1024-node projections") {
    ModelParams myri = builtin_params("myrinet-lanai-xp");
    CHECK(format_us(predict_latency_us(myri, 1024)) == "38.94");
    ModelParams quad = builtin_params("quadrics-elan3");
    CHECK(format_us(predict_latency_us(quad, 1024)) == "22.13");
}

TEST_CASE("prediction is linear in ceil(log2 n) minus one") {
    ModelParams p{10.0, 2.0, 0.5, "t"};
    CHECK(predict_latency_us(p, 2) == doctest::Approx(10.5));
    CHECK(predict_latency_us(p, 4) == doctest::Approx(12.5));
    CHECK(predict_latency_us(p, 1024) == doctest::Approx(28.5));
    // every n in (2^k, 2^(k+1)] shares a step level
    CHECK(predict_latency_us(p, 5) == predict_latency_us(p, 8));
    CHECK(predict_latency_us(p, 9) == predict_latency_us(p, 16));
    CHECK(predict_latency_us(p, 8) != predict_latency_us(p, 9));
}

TEST_CASE("adjustment term may be negative") {
    ModelParams quad = builtin_params("quadrics-elan3");
    CHECK(quad.t_adj_us < 0.0);
    CHECK(predict_latency_us(quad, 2) > 0.0);
}

TEST_CASE("model inputs are validated") {
    ModelParams p{1, 1, 0, "t"};
    CHECK_THROWS_AS(predict_latency_us(p, 1), ConfigError);
    CHECK_THROWS_AS(builtin_params("infiniband"), ConfigError);
}

TEST_CASE("fit recovers constants from noiseless samples") {
    ModelParams truth{3.6, 3.5, 3.84, "truth"};
    std::vector<LatencySample> samples;
    for (int n : {2, 4, 8, 16, 32, 64})
        samples.push_back({n, predict_latency_us(truth, n)});
    FitResult fit = fit_constants(samples);
    CHECK(fit.params.t_trig_us == doctest::Approx(3.5).epsilon(1e-9));
    CHECK(fit.max_abs_residual_us < 1e-9);
    for (int n : {2, 8, 64, 1024})
        CHECK(predict_latency_us(fit.params, n) ==
              doctest::Approx(predict_latency_us(truth, n)).epsilon(1e-9));
}

TEST_CASE("the two-node sample anchors t_init") {
    std::vector<LatencySample> samples{{2, 7.0}, {4, 9.0}, {8, 11.0}};
    FitResult fit = fit_constants(samples);
    CHECK(fit.params.t_init_us == doctest::Approx(7.0));
    CHECK(fit.params.t_adj_us == doctest::Approx(0.0).epsilon(1e-9));

    // without an n=2 sample, the intercept plays that role
    std::vector<LatencySample> no2{{4, 9.0}, {8, 11.0}, {16, 13.0}};
    FitResult f2 = fit_constants(no2);
    CHECK(f2.params.t_init_us == doctest::Approx(7.0));
    CHECK(f2.params.t_adj_us == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("fit tolerates small noise and reports the residual") {
    ModelParams truth{5.0, 2.0, 0.0, "truth"};
    std::vector<LatencySample> samples;
    double jitter[] = {0.05, -0.04, 0.03, -0.02, 0.01};
    int i = 0;
    for (int n : {2, 4, 8, 16, 32})
        samples.push_back({n, predict_latency_us(truth, n) + jitter[i++]});
    FitResult fit = fit_constants(samples);
    CHECK(fit.params.t_trig_us == doctest::Approx(2.0).epsilon(0.02));
    CHECK(fit.max_abs_residual_us < 0.1);
    CHECK(fit.max_abs_residual_us > 0.0);
}

TEST_CASE("degenerate sample sets are rejected") {
    CHECK_THROWS_AS(fit_constants({{2, 1.0}, {4, 2.0}}), ConfigError);
    CHECK_THROWS_AS(fit_constants({{8, 1.0}, {7, 1.0}, {6, 1.0}}), ConfigError);
    CHECK_THROWS_AS(fit_constants({{1, 1.0}, {2, 2.0}, {4, 3.0}}), ConfigError);
}

TEST_CASE("report formatting rounds half up to two decimals") {
    CHECK(format_us(38.935) == "38.94");
    CHECK(format_us(22.125) == "22.13");
    CHECK(format_us(1.0) == "1.00");
    CHECK(format_us(0.004999) == "0.00");
    CHECK(format_us(0.005) == "0.01");
}
