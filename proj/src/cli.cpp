#include "nicsim/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nicsim/analytic.hpp"
#include "nicsim/engine.hpp"
#include "nicsim/network.hpp"
#include "nicsim/schedule.hpp"
#include "nicsim/svg_plot.hpp"

namespace nicsim {

namespace {

size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= b.size(); ++j) {
            size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

const std::vector<std::string> kConfigKeys = {
    "platform", "mode",      "alg",  "degree",    "n",
    "warmup",   "iterations", "seed", "loss_prob", "host_skew_us"};

std::uint64_t env_seed_fallback() {
    if (const char* s = std::getenv("NICSIM_SEED")) {
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            throw ConfigError("NICSIM_SEED is not an integer");
        }
    }
    return 1;
}

} // namespace

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(path + ": config must be a JSON object");
    for (auto& [key, val] : j.items()) {
        if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) != kConfigKeys.end())
            continue;
        std::string best;
        size_t best_d = 99;
        for (const auto& k : kConfigKeys) {
            size_t d = edit_distance(key, k);
            if (d < best_d) { best_d = d; best = k; }
        }
        std::string msg = path + ": unknown key \"" + key + "\"";
        if (best_d <= 3) msg += " (did you mean \"" + best + "\"?)";
        throw ConfigError(msg);
    }

    ExperimentConfig cfg;
    try {
        if (!j.contains("platform")) throw ConfigError(path + ": missing \"platform\"");
        cfg.platform = j.at("platform").get<std::string>();
        if (j.contains("mode")) {
            auto m = parse_mode(j.at("mode").get<std::string>());
            if (!m) throw ConfigError(path + ": unknown mode \"" +
                                      j.at("mode").get<std::string>() + "\"");
            cfg.mode = *m;
        }
        if (j.contains("alg")) {
            auto a = parse_algorithm(j.at("alg").get<std::string>(),
                                     j.value("degree", 2));
            if (!a) throw ConfigError(path + ": unknown algorithm \"" +
                                      j.at("alg").get<std::string>() + "\"");
            cfg.alg = *a;
        }
        cfg.n = j.value("n", cfg.n);
        cfg.warmup = j.value("warmup", cfg.warmup);
        cfg.iterations = j.value("iterations", cfg.iterations);
        cfg.seed = j.value("seed", env_seed_fallback());
        if (j.contains("loss_prob")) cfg.loss_prob = j.at("loss_prob").get<double>();
        cfg.host_skew_us = j.value("host_skew_us", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return cfg;
}

std::vector<int> parse_range(const std::string& spec) {
    std::string body = spec;
    bool pow2 = false;
    if (auto pos = body.find(':'); pos != std::string::npos) {
        std::string suffix = body.substr(pos + 1);
        if (suffix != "pow2")
            throw ConfigError("range: unknown qualifier \"" + suffix + "\"");
        pow2 = true;
        body = body.substr(0, pos);
    }
    auto dots = body.find("..");
    int lo, hi;
    try {
        if (dots == std::string::npos) {
            lo = hi = std::stoi(body);
        } else {
            lo = std::stoi(body.substr(0, dots));
            hi = std::stoi(body.substr(dots + 2));
        }
    } catch (const std::exception&) {
        throw ConfigError("range: cannot parse \"" + spec + "\"");
    }
    if (lo < 1 || hi < lo) throw ConfigError("range: bad bounds in \"" + spec + "\"");
    std::vector<int> out;
    if (pow2) {
        for (long long v = 1; v <= hi; v *= 2)
            if (v >= lo) out.push_back(static_cast<int>(v));
    } else {
        for (int v = lo; v <= hi; ++v) out.push_back(v);
    }
    if (out.empty()) throw ConfigError("range: empty range \"" + spec + "\"");
    return out;
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open results file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    auto col = [&](const std::string& name) {
        auto it = std::find(cols.begin(), cols.end(), name);
        if (it == cols.end())
            throw ConfigError(path + ": missing column \"" + name + "\"");
        return static_cast<size_t>(it - cols.begin());
    };
    size_t ci_platform = col("platform"), ci_mode = col("mode"),
           ci_alg = col("algorithm"), ci_n = col("n"), ci_mean = col("mean_us");
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) f.push_back(c);
        if (f.size() < cols.size())
            throw ConfigError(path + ": short row: " + line);
        ResultRow r;
        r.platform = f[ci_platform];
        r.mode = f[ci_mode];
        r.algorithm = f[ci_alg];
        try {
            r.n = std::stoi(f[ci_n]);
            r.mean_us = std::stod(f[ci_mean]);
        } catch (const std::exception&) {
            throw ConfigError(path + ": bad numeric field in row: " + line);
        }
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ConfigError(path + ": no data rows");
    return rows;
}

namespace {

struct CommonFlags {
    std::string config_path;
    std::string presets_path;
    std::string platform;
    std::string mode;
    std::string alg;
    int degree = 0;
    int n = 0;
    int warmup = -1;
    int iterations = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double loss_prob = -1.0;
    double host_skew = -1.0;

    void add_to(CLI::App* app, bool with_mode = true) {
        app->add_option("--config", config_path, "JSON experiment config");
        app->add_option("--presets", presets_path, "platform preset file");
        app->add_option("--platform", platform, "platform preset name");
        if (with_mode) app->add_option("--mode", mode, "host|nic-pt2pt|nic-collective|elan-chain");
        app->add_option("--alg", alg, "ds|pe|gb");
        app->add_option("--degree", degree, "gather-broadcast tree degree");
        app->add_option("--n", n, "number of ranks");
        app->add_option("--warmup", warmup, "warm-up iterations (default 100)");
        app->add_option("--iterations", iterations, "measured iterations (default 10000)");
        app->add_option("--seed", seed, "rng seed (fallback: NICSIM_SEED, then 1)")
            ->each([this](const std::string&) { seed_set = true; });
        app->add_option("--loss-prob", loss_prob, "per-packet loss probability override");
        app->add_option("--host-skew", host_skew, "max barrier-entry stagger, us");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = parse_config(config_path);
        else cfg.seed = env_seed_fallback();
        if (!platform.empty()) cfg.platform = platform;
        if (cfg.platform.empty())
            throw ConfigError("no platform given (flag --platform or config file)");
        if (!mode.empty()) {
            auto m = parse_mode(mode);
            if (!m) throw ConfigError("unknown mode \"" + mode + "\"");
            cfg.mode = *m;
        }
        if (!alg.empty()) {
            auto a = parse_algorithm(alg, degree > 0 ? degree : 2);
            if (!a) throw ConfigError("unknown algorithm \"" + alg + "\"");
            cfg.alg = *a;
        } else if (degree > 0) {
            cfg.alg.degree = degree;
        }
        if (n > 0) cfg.n = n;
        if (warmup >= 0) cfg.warmup = warmup;
        if (iterations >= 0) cfg.iterations = iterations;
        if (seed_set) cfg.seed = seed;
        if (loss_prob >= 0.0) cfg.loss_prob = loss_prob;
        if (host_skew >= 0.0) cfg.host_skew_us = host_skew;
        return cfg;
    }

    std::string presets() const {
        return presets_path.empty() ? default_preset_path() : presets_path;
    }
};

int cmd_run(const CommonFlags& flags, const std::string& trace_out) {
    ExperimentConfig cfg = flags.resolve();
    CostModel model = load_preset(flags.presets(), cfg.platform);
    VectorTraceSink trace;
    Measurement m = run_experiment(cfg, model, trace_out.empty() ? nullptr : &trace);
    std::cout << csv_header() << "\n" << csv_row(cfg, m) << "\n";
    if (!trace_out.empty()) {
        std::ofstream out(trace_out);
        if (!out) throw ConfigError("cannot write trace file: " + trace_out);
        write_trace_csv(out, trace.records);
    }
    return kExitOk;
}

int cmd_sweep(const CommonFlags& flags, const std::string& range,
              const std::vector<std::string>& modes) {
    ExperimentConfig base = flags.resolve();
    CostModel model = load_preset(flags.presets(), base.platform);
    std::vector<BarrierMode> mode_list;
    if (modes.empty()) {
        mode_list.push_back(base.mode);
    } else {
        for (const auto& m : modes) {
            auto parsed = parse_mode(m);
            if (!parsed) throw ConfigError("unknown mode \"" + m + "\"");
            mode_list.push_back(*parsed);
        }
    }
    std::vector<int> ns = parse_range(range);
    // rows sorted by (platform, mode, algorithm, n)
    std::sort(mode_list.begin(), mode_list.end(), [](BarrierMode a, BarrierMode b) {
        return mode_name(a) < mode_name(b);
    });
    std::cout << csv_header() << "\n";
    for (BarrierMode m : mode_list) {
        for (int n : ns) {
            ExperimentConfig cfg = base;
            cfg.mode = m;
            cfg.n = n;
            std::cout << csv_row(cfg, run_experiment(cfg, model)) << "\n";
        }
    }
    return kExitOk;
}

int cmd_compare(const CommonFlags& flags) {
    ExperimentConfig base = flags.resolve();
    CostModel model = load_preset(flags.presets(), base.platform);
    ModeComparison cmp = compare_modes(base, model);
    std::cout << "platform,algorithm,n,mode,mean_us,improvement_over_host\n";
    for (const auto& [mode, meas] : cmp.results) {
        char mean[64], ratio[64];
        std::snprintf(mean, sizeof(mean), "%.3f", meas.mean_us);
        std::snprintf(ratio, sizeof(ratio), "%.3f", cmp.improvement_over_host(mode));
        std::cout << base.platform << ',' << algorithm_name(base.alg) << ','
                  << base.n << ',' << mode_name(mode) << ',' << mean << ','
                  << ratio << "\n";
    }
    return kExitOk;
}

int cmd_model(const std::string& platform, int n) {
    ModelParams p = builtin_params(platform);
    std::cout << format_us(predict_latency_us(p, n)) << "\n";
    return kExitOk;
}

int cmd_fit(const std::string& in_path) {
    std::ifstream in(in_path);
    if (!in) throw ConfigError("cannot open samples file: " + in_path);
    std::vector<LatencySample> samples;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first && line.find_first_not_of("0123456789") != std::string::npos &&
            line.find("n") != std::string::npos) {
            first = false;
            continue; // header
        }
        first = false;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError(in_path + ": expected \"n,latency_us\" rows");
        try {
            samples.push_back({std::stoi(line.substr(0, comma)),
                               std::stod(line.substr(comma + 1))});
        } catch (const std::exception&) {
            throw ConfigError(in_path + ": bad row: " + line);
        }
    }
    FitResult fit = fit_constants(samples);
    nlohmann::json j{{"t_init_us", fit.params.t_init_us},
                     {"t_trig_us", fit.params.t_trig_us},
                     {"t_adj_us", fit.params.t_adj_us},
                     {"max_abs_residual_us", fit.max_abs_residual_us}};
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_schedule(const std::string& alg, int degree, int n, int rank) {
    auto kind = parse_algorithm(alg, degree);
    if (!kind) throw ConfigError("unknown algorithm \"" + alg + "\"");
    Schedule s = build_schedule(*kind, n, rank);
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : s.rounds)
        rounds.push_back({{"send_to", r.send_to}, {"await_from", r.await_from}});
    nlohmann::json j{{"algorithm", algorithm_name(*kind)},
                     {"n", s.n},
                     {"rank", s.me},
                     {"steps", num_steps(*kind, n)},
                     {"rounds", rounds}};
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_plot(const std::string& in_path, const std::string& out_path,
             bool model_overlay) {
    auto rows = read_results_csv(in_path);
    const std::string& platform = rows.front().platform;
    for (const auto& r : rows)
        if (r.platform != platform)
            throw ConfigError("plot: rows mix platforms (" + platform + " vs " +
                              r.platform + ")");
    std::map<std::pair<std::string, std::string>, PlotSeries> by_series;
    std::set<int> ns;
    for (const auto& r : rows) {
        auto& s = by_series[{r.mode, r.algorithm}];
        s.label = r.mode + "/" + r.algorithm;
        s.points.emplace_back(r.n, r.mean_us);
        ns.insert(r.n);
    }
    std::vector<PlotSeries> series;
    for (auto& [key, s] : by_series) {
        std::sort(s.points.begin(), s.points.end());
        series.push_back(std::move(s));
    }
    if (model_overlay) {
        ModelParams p = builtin_params(platform);
        PlotSeries overlay;
        overlay.label = "model (" + platform + ")";
        overlay.dashed = true;
        for (int n : ns)
            if (n >= 2) overlay.points.emplace_back(n, predict_latency_us(p, n));
        if (!overlay.points.empty()) series.push_back(std::move(overlay));
    }
    PlotOptions opts;
    opts.title = "Barrier latency vs nodes (" + platform + ")";
    if (platform == "quadrics-elan3") {
        opts.ref_line_us = 4.20; // hardware-broadcast barrier reference
        opts.ref_label = "hw barrier 4.20us";
    }
    std::string svg = render_latency_svg(series, opts);
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot write plot file: " + out_path);
    out << svg;
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"NIC-offloaded barrier synchronization simulator"};
    app.require_subcommand(1);

    CommonFlags run_flags, sweep_flags, compare_flags;
    std::string trace_out, sweep_range = "2..32:pow2";
    std::vector<std::string> sweep_modes;

    auto* run = app.add_subcommand("run", "run one experiment, CSV row to stdout");
    run_flags.add_to(run);
    run->add_option("--trace-out", trace_out, "write packet trace CSV here");

    auto* sweep = app.add_subcommand("sweep", "sweep node counts (and modes)");
    sweep_flags.add_to(sweep);
    sweep->add_option("--n-range", sweep_range, "e.g. 2..1024:pow2 or 2..32");
    sweep->add_option("--modes", sweep_modes, "modes to sweep")->delimiter(',');

    auto* compare = app.add_subcommand("compare", "all modes on a shared seed");
    compare_flags.add_to(compare, /*with_mode=*/false);

    std::string model_platform;
    int model_n = 0;
    auto* model = app.add_subcommand("model", "analytic latency prediction");
    model->add_option("--platform", model_platform)->required();
    model->add_option("--n", model_n)->required();

    std::string fit_in;
    auto* fit = app.add_subcommand("fit", "least-squares model calibration");
    fit->add_option("--in", fit_in, "CSV of n,latency_us")->required();

    std::string sched_alg = "ds";
    int sched_degree = 2, sched_n = 0, sched_rank = 0;
    auto* sched = app.add_subcommand("schedule", "print one rank's rounds as JSON");
    sched->add_option("--alg", sched_alg);
    sched->add_option("--degree", sched_degree);
    sched->add_option("--n", sched_n)->required();
    sched->add_option("--rank", sched_rank);

    std::string plot_in, plot_out;
    bool model_overlay = false;
    auto* plot = app.add_subcommand("plot", "render latency-vs-nodes SVG");
    plot->add_option("--in", plot_in)->required();
    plot->add_option("--out", plot_out)->required();
    plot->add_flag("--model-overlay", model_overlay, "overlay the analytic model");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            // --help goes to stdout by CLI11 convention
            return app.exit(e);
        }
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(run_flags, trace_out);
        if (sweep->parsed()) return cmd_sweep(sweep_flags, sweep_range, sweep_modes);
        if (compare->parsed()) return cmd_compare(compare_flags);
        if (model->parsed()) return cmd_model(model_platform, model_n);
        if (fit->parsed()) return cmd_fit(fit_in);
        if (sched->parsed())
            return cmd_schedule(sched_alg, sched_degree, sched_n, sched_rank);
        if (plot->parsed()) return cmd_plot(plot_in, plot_out, model_overlay);
    } catch (const LivelockError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const ProtocolError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitProtocol;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitProtocol;
    }
    return kExitConfig;
}

} // namespace nicsim
