#include "cli.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "stochlog/config.hpp"
#include "stochlog/error.hpp"
#include "stochlog/format.hpp"
#include "stochlog/hypotheses.hpp"
#include "stochlog/montecarlo.hpp"
#include "stochlog/sde.hpp"
#include "stochlog/serialize.hpp"

namespace stochlog::cli {

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

struct Options {
    // common
    std::optional<std::string> config;
    std::optional<int> example;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool json = false;

    // scan
    std::optional<double> window;
    std::optional<double> scan_start;
    std::optional<double> scan_end;
    std::optional<double> scan_step;
    std::optional<double> quad_step;
    std::optional<double> margin;
    std::optional<double> avg_horizon;
    std::optional<std::string> route;

    // sim
    std::optional<double> x0;
    std::optional<double> dt;
    std::optional<double> t_end;
    std::optional<std::string> scheme;
    std::optional<std::size_t> stride;

    // ensemble
    std::optional<std::size_t> paths;
    std::vector<double> probe_times;
    std::vector<double> p_list;
    std::optional<double> eps_ext;
    std::optional<double> lower;
    std::optional<double> upper;
    std::optional<unsigned> threads;
    std::optional<std::string> paths_csv;

    // verification
    std::optional<double> p;
    double slack = 0.10;
    double burn_in = 20.0;
    std::optional<double> y0;
    double tol = 1e-2;
    double min_fraction = 0.95;
};

void add_source_options(CLI::App& cmd, Options& o) {
    auto* config = cmd.add_option("--config", o.config, "Configuration file");
    auto* example = cmd.add_option("--example", o.example, "Built-in example 1-4")->check(CLI::Range(1, 4));
    config->excludes(example);
    example->excludes(config);
}

void add_output_options(CLI::App& cmd, Options& o) {
    cmd.add_option("--out", o.out, "Write the result to this file instead of stdout");
    cmd.add_flag("--json", o.json, "Emit JSON");
}

void add_scan_options(CLI::App& cmd, Options& o) {
    cmd.add_option("--window", o.window, "Window length for H1/H2/H3");
    cmd.add_option("--scan-start", o.scan_start);
    cmd.add_option("--scan-end", o.scan_end);
    cmd.add_option("--scan-step", o.scan_step);
    cmd.add_option("--quad-step", o.quad_step, "Simpson panel width");
    cmd.add_option("--margin", o.margin);
    cmd.add_option("--avg-horizon", o.avg_horizon, "Horizon for the long-run averages");
    cmd.add_option("--route", o.route, "windows | averages");
}

void add_sim_options(CLI::App& cmd, Options& o) {
    cmd.add_option("--x0", o.x0, "Initial population");
    cmd.add_option("--dt", o.dt, "Time step");
    cmd.add_option("--t-end", o.t_end, "Final time");
    cmd.add_option("--scheme", o.scheme, "log-em | direct-em | rk4");
    cmd.add_option("--stride", o.stride, "Record every k-th step");
}

void add_ensemble_options(CLI::App& cmd, Options& o) {
    cmd.add_option("--paths", o.paths, "Number of paths (pairs for attract)");
    cmd.add_option("--probe-times", o.probe_times, "Probe times")->delimiter(',');
    cmd.add_option("--eps-ext", o.eps_ext, "Extinction threshold");
    cmd.add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

RunConfig build_config(const Options& o) {
    RunConfig cfg;
    if (o.config) {
        cfg = load_config(*o.config);
    } else if (o.example) {
        cfg = builtin_run_config(*o.example);
    } else {
        throw UsageError("one of --config or --example is required");
    }

    if (o.window) cfg.scan.window = *o.window;
    if (o.scan_start) cfg.scan.scan_start = *o.scan_start;
    if (o.scan_end) cfg.scan.scan_end = *o.scan_end;
    if (o.scan_step) cfg.scan.scan_step = *o.scan_step;
    if (o.quad_step) cfg.scan.quad.step = *o.quad_step;
    if (o.margin) cfg.scan.margin = *o.margin;
    if (o.avg_horizon) cfg.avg_horizon = *o.avg_horizon;
    if (o.route) cfg.route = parse_route(*o.route);

    if (o.x0) cfg.sim.x0 = *o.x0;
    if (o.dt) cfg.sim.dt = *o.dt;
    if (o.t_end) cfg.sim.t_end = *o.t_end;
    if (o.scheme) cfg.sim.scheme = parse_scheme(*o.scheme);
    if (o.stride) {
        cfg.sim.record_stride = *o.stride;
    } else if (o.dt || o.t_end) {
        cfg.sim.record_stride = default_record_stride(cfg.sim.t_end, cfg.sim.dt);
    }

    if (o.paths) cfg.ensemble.n_paths = *o.paths;
    if (!o.probe_times.empty()) {
        cfg.ensemble.probe_times = o.probe_times;
    } else if (o.t_end) {
        // Keep the probes that still fit and always probe the final time.
        auto& probes = cfg.ensemble.probe_times;
        std::erase_if(probes, [&](double t) { return t > cfg.sim.t_end; });
        if (std::find(probes.begin(), probes.end(), cfg.sim.t_end) == probes.end()) probes.push_back(cfg.sim.t_end);
    }
    if (!o.p_list.empty()) cfg.p_list = o.p_list;
    if (o.eps_ext) cfg.ensemble.eps_ext = *o.eps_ext;
    if (o.lower) cfg.ensemble.lower_level = *o.lower;
    if (o.upper) cfg.ensemble.upper_level = *o.upper;
    if (o.threads) cfg.ensemble.threads = *o.threads;
    cfg.ensemble.base = cfg.sim;

    cfg.validate();
    return cfg;
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
    if (!o.out) {
        out << text;
        return;
    }
    std::ofstream file(*o.out, std::ios::binary);
    file << text;
    if (!file) throw ConfigError("cannot write " + *o.out, 0);
}

std::string window_line(const char* name, const WindowCheckResult& r) {
    std::ostringstream s;
    s << name << "  inf=" << format_double(r.inf_estimate) << " (t=" << format_double(r.argmin_t) << ")"
      << "  sup=" << format_double(r.sup_estimate) << " (t=" << format_double(r.argmax_t) << ")"
      << "  " << to_string(r.verdict) << '\n';
    return s.str();
}

std::string report_text(const SystemSpec& spec, const ScanParams& scan, const HypothesisReport& report) {
    std::ostringstream s;
    s << "system: " << (spec.label.empty() ? "(unnamed)" : spec.label) << '\n';
    s << "  r(t)     = " << spec.r.to_string() << '\n';
    s << "  a(t)     = " << spec.a.to_string() << '\n';
    s << "  sigma(t) = " << spec.sigma.to_string() << '\n';
    s << "window=" << format_double(scan.window) << " scan=[" << format_double(scan.scan_start) << ", "
      << format_double(scan.scan_end) << "] step=" << format_double(scan.scan_step)
      << " margin=" << format_double(scan.margin) << '\n';
    s << window_line("H1", report.h1) << window_line("H2", report.h2) << window_line("H3", report.h3);
    s << "avg(r - sigma^2/2) = " << format_double(report.avg_rs) << '\n';
    s << "avg(a)             = " << format_double(report.avg_a) << '\n';
    s << "classification: " << to_string(report.classification) << " (decided by " << to_string(report.decided_by)
      << ")\n";
    return s.str();
}

int cmd_check(const Options& o, std::ostream& out) {
    const RunConfig cfg = build_config(o);
    const HypothesisReport report = classify(cfg.spec, cfg.scan, cfg.avg_horizon, cfg.route);
    emit(o, out, o.json ? report_to_json(report) : report_text(cfg.spec, cfg.scan, report));
    return kOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    RunConfig cfg = build_config(o);
    if (o.seed) cfg.sim.seed = *o.seed;
    const Trajectory traj = simulate(cfg.spec, cfg.sim);
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    emit(o, out, csv.str());
    return kOk;
}

RunConfig ensemble_config(const Options& o) {
    RunConfig cfg = build_config(o);
    if (o.seed) cfg.ensemble.master_seed = *o.seed;
    return cfg;
}

std::string ensemble_text(const EnsembleStats& stats) {
    std::ostringstream s;
    s << "paths=" << stats.n_paths << " failed=" << stats.n_failed << " t_end=" << format_double(stats.t_end)
      << " max|M(T)/T|=" << format_double(stats.lln_stat) << '\n';
    for (const ProbeStats& probe : stats.probes) {
        s << "t=" << format_double(probe.time);
        for (std::size_t i = 0; i < stats.p_list.size(); ++i) {
            s << "  E[x^" << format_double(stats.p_list[i]) << "]=" << format_double(probe.mean_xp[i]);
        }
        s << "  q01=" << format_double(probe.quantiles[0]) << " q50=" << format_double(probe.quantiles[2])
          << " q99=" << format_double(probe.quantiles[4]);
        s << "  extinct(" << format_double(stats.eps_ext) << ")=" << format_double(probe.extinct_fraction(stats.eps_ext));
        if (stats.lower_level) s << "  P(x>=m)=" << format_double(probe.tail_above(*stats.lower_level));
        if (stats.upper_level) s << "  P(x<=M)=" << format_double(probe.tail_below(*stats.upper_level));
        s << '\n';
    }
    return s.str();
}

int cmd_ensemble(const Options& o, std::ostream& out) {
    const RunConfig cfg = ensemble_config(o);
    if (o.paths_csv) {
        const PathSamples samples = sample_paths(cfg.spec, cfg.ensemble);
        std::ostringstream csv;
        write_paths_csv(csv, samples);
        std::ofstream file(*o.paths_csv, std::ios::binary);
        file << csv.str();
        if (!file) throw ConfigError("cannot write " + *o.paths_csv, 0);
    }
    const EnsembleStats stats = run_ensemble(cfg.spec, cfg.ensemble, cfg.p_list);
    emit(o, out, o.json ? ensemble_to_json(stats) : ensemble_text(stats));
    return stats.failure_rate_exceeded() ? kCheckFailed : kOk;
}

int cmd_moment_bound(const Options& o, std::ostream& out) {
    const RunConfig cfg = ensemble_config(o);
    MomentBoundOptions opts;
    opts.slack = o.slack;
    opts.burn_in = o.burn_in;
    opts.h1_scan = cfg.scan;
    const double p = o.p.value_or(cfg.p_list.empty() ? 1.0 : cfg.p_list.front());
    const MomentBoundResult result = verify_moment_bound(cfg.spec, cfg.ensemble, p, opts);
    if (o.json) {
        emit(o, out, moment_bound_to_json(result));
    } else {
        std::ostringstream s;
        s << "p=" << format_double(result.p) << " running max z=" << format_double(result.running_max)
          << " L(p)=" << format_double(result.bound) << " slack=" << format_double(result.slack) << '\n';
        for (const MomentProbe& probe : result.probes) {
            s << "t=" << format_double(probe.time) << "  E[x^p]=" << format_double(probe.mean_xp)
              << "  limit=" << format_double(probe.limit) << (probe.counted ? "" : "  (burn-in)") << '\n';
        }
        s << "verdict: " << to_string(result.verdict) << (result.h1_holds ? "" : " (advisory: H1 not verified)")
          << '\n';
        emit(o, out, s.str());
    }
    return result.verdict == CheckVerdict::Pass ? kOk : kCheckFailed;
}

int cmd_attract(const Options& o, std::ostream& out) {
    const RunConfig cfg = ensemble_config(o);
    const double x0 = cfg.sim.x0;
    const double y0 = o.y0.value_or(2.0);
    const AttractivityResult result = attractivity_experiment(cfg.spec, cfg.ensemble, x0, y0);
    const double frac = result.fraction_below(o.tol);
    if (o.json) {
        emit(o, out, attractivity_to_json(result, o.tol));
    } else {
        std::ostringstream s;
        s << "pairs=" << result.n_pairs << " failed=" << result.n_failed << " x0=" << format_double(x0)
          << " y0=" << format_double(y0) << " T=" << format_double(cfg.sim.t_end) << '\n';
        s << "fraction with |x(T)-y(T)| < " << format_double(o.tol) << ": " << format_double(frac) << '\n';
        emit(o, out, s.str());
    }
    const bool too_many_failed =
        static_cast<double>(result.n_failed) > kMaxFailureRate * static_cast<double>(result.n_pairs);
    return frac >= o.min_fraction && !too_many_failed ? kOk : kCheckFailed;
}

int cmd_lln(const Options& o, std::ostream& out) {
    const RunConfig cfg = ensemble_config(o);
    const LlnResult result = lln_check(cfg.spec, cfg.ensemble);
    if (o.json) {
        emit(o, out, lln_to_json(result));
    } else {
        std::ostringstream s;
        s << "max |M(T)/T| = " << format_double(result.max_ratio) << "  bound 4*sigma_u/sqrt(T) = "
          << format_double(result.bound) << "  within = " << format_double(result.fraction_within) << '\n';
        s << "verdict: " << to_string(result.verdict) << '\n';
        emit(o, out, s.str());
    }
    return result.verdict == CheckVerdict::Pass ? kOk : kCheckFailed;
}

int cmd_examples_verify(const Options& o, std::ostream& out) {
    constexpr std::array<Classification, 4> expected{Classification::Permanent, Classification::Extinct,
                                                     Classification::Permanent, Classification::Extinct};
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    std::ostringstream text;
    bool all_ok = true;
    for (int id = 1; id <= 4; ++id) {
        Options per = o;
        per.config.reset();
        per.example = id;
        const RunConfig cfg = build_config(per);
        const HypothesisReport report = classify(cfg.spec, cfg.scan, cfg.avg_horizon, cfg.route);
        const bool ok = report.classification == expected[static_cast<std::size_t>(id - 1)];
        all_ok = all_ok && ok;
        text << "example " << id << ": " << to_string(report.classification) << " (expected "
             << to_string(expected[static_cast<std::size_t>(id - 1)]) << ", route " << to_string(cfg.route)
             << ", decided by " << to_string(report.decided_by) << ") " << (ok ? "ok" : "MISMATCH") << '\n';
        nlohmann::ordered_json entry;
        entry["example"] = id;
        entry["classification"] = std::string(to_string(report.classification));
        entry["expected"] = std::string(to_string(expected[static_cast<std::size_t>(id - 1)]));
        entry["decided_by"] = std::string(to_string(report.decided_by));
        entry["ok"] = ok;
        doc.push_back(entry);
    }
    emit(o, out, o.json ? doc.dump(2) + "\n" : text.str());
    return all_ok ? kOk : kCheckFailed;
}

}  // namespace

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulate and classify the non-autonomous stochastic logistic equation"};
    app.require_subcommand(1);
    Options o;
    std::function<int(const Options&, std::ostream&)> handler;

    auto* check = app.add_subcommand("check", "Check the window hypotheses and classify the system");
    add_source_options(*check, o);
    add_output_options(*check, o);
    add_scan_options(*check, o);
    check->add_option("--seed", o.seed, "Accepted for uniformity; classification draws no noise");
    check->callback([&] { handler = cmd_check; });

    auto* sim = app.add_subcommand("simulate", "Write one trajectory as CSV (t,x,M)");
    add_source_options(*sim, o);
    add_output_options(*sim, o);
    add_sim_options(*sim, o);
    sim->add_option("--seed", o.seed, "Noise seed");
    sim->callback([&] { handler = cmd_simulate; });

    auto* ens = app.add_subcommand("ensemble", "Monte Carlo statistics at probe times");
    add_source_options(*ens, o);
    add_output_options(*ens, o);
    add_sim_options(*ens, o);
    add_ensemble_options(*ens, o);
    ens->add_option("--seed", o.seed, "Master seed");
    ens->add_option("--p", o.p_list, "Moment orders")->delimiter(',');
    ens->add_option("--m", o.lower, "Lower permanence level m");
    ens->add_option("--M", o.upper, "Upper permanence level M");
    ens->add_option("--paths-csv", o.paths_csv, "Also dump per-path samples to this CSV");
    ens->callback([&] { handler = cmd_ensemble; });

    auto* moment = app.add_subcommand("moment-bound", "Compare E[x^p] with the comparison-ODE bound");
    add_source_options(*moment, o);
    add_output_options(*moment, o);
    add_sim_options(*moment, o);
    add_ensemble_options(*moment, o);
    add_scan_options(*moment, o);
    moment->add_option("--seed", o.seed, "Master seed");
    moment->add_option("--p", o.p, "Moment order");
    moment->add_option("--slack", o.slack, "Relative Monte Carlo slack");
    moment->add_option("--burn-in", o.burn_in, "Ignore probe times before this");
    moment->callback([&] { handler = cmd_moment_bound; });

    auto* attract = app.add_subcommand("attract", "Coupled-pair attractivity experiment");
    add_source_options(*attract, o);
    add_output_options(*attract, o);
    add_sim_options(*attract, o);
    add_ensemble_options(*attract, o);
    attract->add_option("--seed", o.seed, "Master seed");
    attract->add_option("--y0", o.y0, "Second initial value (default 2)");
    attract->add_option("--tol", o.tol, "Gap tolerance");
    attract->add_option("--min-fraction", o.min_fraction, "Required fraction of pairs below tol");
    attract->callback([&] { handler = cmd_attract; });

    auto* lln = app.add_subcommand("lln", "Strong-law check on M(T)/T");
    add_source_options(*lln, o);
    add_output_options(*lln, o);
    add_sim_options(*lln, o);
    add_ensemble_options(*lln, o);
    lln->add_option("--seed", o.seed, "Master seed");
    lln->callback([&] { handler = cmd_lln; });

    auto* verify = app.add_subcommand("examples-verify", "Classify the four built-in examples");
    add_output_options(*verify, o);
    add_scan_options(*verify, o);
    verify->add_option("--seed", o.seed, "Accepted for uniformity; classification draws no noise");
    verify->callback([&] { handler = cmd_examples_verify; });

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back("stochlog");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        return handler(o, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kConfig;
    } catch (const Error& e) {
        err << "validation error: " << e.what() << '\n';
        return kValidation;
    }
}

}  // namespace stochlog::cli
