#include "stochlog/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "stochlog/format.hpp"

namespace stochlog {

void EnsembleConfig::validate() const {
    base.validate();
    if (n_paths < 1) throw ValidationError("n_paths must be >= 1");
    if (base.scheme == Scheme::RK4) throw ValidationError("ensembles require a stochastic scheme");
    for (double t : probe_times) {
        if (!(t >= 0.0) || t > base.t_end) {
            throw ValidationError("probe time " + format_double(t) + " outside [0, t_end]");
        }
    }
    if (!(eps_ext > 0.0)) throw ValidationError("eps_ext must be > 0");
}

double quantile_sorted(const std::vector<double>& sorted, double level) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = level * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

double fraction(std::size_t count, std::size_t total) {
    return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace

double ProbeStats::tail_below(double level) const {
    const auto it = std::upper_bound(sorted_states.begin(), sorted_states.end(), level);
    return fraction(static_cast<std::size_t>(it - sorted_states.begin()), sorted_states.size());
}

double ProbeStats::tail_above(double level) const {
    const auto it = std::lower_bound(sorted_states.begin(), sorted_states.end(), level);
    return fraction(static_cast<std::size_t>(sorted_states.end() - it), sorted_states.size());
}

double ProbeStats::fraction_strictly_above(double level) const {
    const auto it = std::upper_bound(sorted_states.begin(), sorted_states.end(), level);
    return fraction(static_cast<std::size_t>(sorted_states.end() - it), sorted_states.size());
}

double ProbeStats::extinct_fraction(double eps) const {
    const auto it = std::lower_bound(sorted_states.begin(), sorted_states.end(), eps);
    return fraction(static_cast<std::size_t>(it - sorted_states.begin()), sorted_states.size());
}

void parallel_for_index(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        const std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next = n;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

PathSamples sample_paths(const SystemSpec& spec, const EnsembleConfig& cfg) {
    cfg.validate();
    const TimeGrid grid(cfg.base.dt, cfg.base.t_end);
    const CoefficientTable table(spec, grid);

    // (grid index, probe slot) in ascending index order.
    std::vector<std::pair<std::size_t, std::size_t>> schedule;
    for (std::size_t j = 0; j < cfg.probe_times.size(); ++j) {
        schedule.emplace_back(grid.index_of(cfg.probe_times[j]), j);
    }
    std::sort(schedule.begin(), schedule.end());

    const std::size_t n = cfg.n_paths;
    const std::size_t m = cfg.probe_times.size();
    PathSamples out;
    out.probe_times = cfg.probe_times;
    out.states.assign(n * m, std::numeric_limits<double>::quiet_NaN());
    out.final_noise.assign(n, std::numeric_limits<double>::quiet_NaN());
    out.seeds.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.seeds[i] = derive_seed(cfg.master_seed, i);
    std::vector<char> failed(n, 0);

    parallel_for_index(n, cfg.threads, [&](std::size_t i) {
        double* row = out.states.data() + i * m;
        std::size_t next = 0;
        double final_noise = 0.0;
        auto visit = [&](std::size_t k, double x, double noise) {
            while (next < schedule.size() && schedule[next].first == k) {
                row[schedule[next].second] = x;
                ++next;
            }
            final_noise = noise;
        };
        try {
            if (cfg.base.scheme == Scheme::DirectEM) {
                std::optional<double> absorbed;
                integrate_direct_em(table, cfg.base.x0, out.seeds[i], visit, absorbed);
            } else {
                integrate_log_em(table, cfg.base.x0, out.seeds[i], visit);
            }
            out.final_noise[i] = final_noise;
        } catch (const BlowUpError&) {
            failed[i] = 1;
            std::fill(row, row + m, std::numeric_limits<double>::quiet_NaN());
        }
    });
    out.failed.assign(failed.begin(), failed.end());
    return out;
}

void write_paths_csv(std::ostream& out, const PathSamples& samples) {
    out << "path,seed,failed";
    for (double t : samples.probe_times) out << ",x@" << format_double(t);
    out << ",M_T\n";
    for (std::size_t i = 0; i < samples.n_paths(); ++i) {
        out << i << ',' << samples.seeds[i] << ',' << (samples.failed[i] ? 1 : 0);
        for (std::size_t j = 0; j < samples.probe_times.size(); ++j) out << ',' << format_double(samples.state(i, j));
        out << ',' << format_double(samples.final_noise[i]) << '\n';
    }
}

EnsembleStats run_ensemble(const SystemSpec& spec, const EnsembleConfig& cfg, const std::vector<double>& p_list) {
    for (double p : p_list) {
        if (!(p > 0.0)) throw ValidationError("moment orders must be > 0");
    }
    const PathSamples samples = sample_paths(spec, cfg);

    EnsembleStats stats;
    stats.p_list = p_list;
    stats.n_paths = samples.n_paths();
    stats.n_failed = static_cast<std::size_t>(std::count(samples.failed.begin(), samples.failed.end(), true));
    stats.t_end = cfg.base.t_end;
    stats.eps_ext = cfg.eps_ext;
    stats.lower_level = cfg.lower_level;
    stats.upper_level = cfg.upper_level;

    for (std::size_t i = 0; i < samples.n_paths(); ++i) {
        if (samples.failed[i]) continue;
        stats.lln_stat = std::max(stats.lln_stat, std::abs(samples.final_noise[i] / cfg.base.t_end));
    }

    for (std::size_t j = 0; j < samples.probe_times.size(); ++j) {
        ProbeStats probe;
        probe.time = samples.probe_times[j];
        probe.sorted_states.reserve(samples.n_paths());
        for (std::size_t i = 0; i < samples.n_paths(); ++i) {
            if (!samples.failed[i]) probe.sorted_states.push_back(samples.state(i, j));
        }
        const auto count = static_cast<double>(probe.sorted_states.size());
        for (double p : p_list) {
            double sum = 0.0;
            for (double x : probe.sorted_states) sum += std::pow(x, p);
            probe.mean_xp.push_back(count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN());
        }
        std::sort(probe.sorted_states.begin(), probe.sorted_states.end());
        for (std::size_t q = 0; q < kQuantileLevels.size(); ++q) {
            probe.quantiles[q] = quantile_sorted(probe.sorted_states, kQuantileLevels[q]);
        }
        stats.probes.push_back(std::move(probe));
    }
    return stats;
}

std::string_view to_string(CheckVerdict v) { return v == CheckVerdict::Pass ? "Pass" : "Fail"; }

MomentBoundResult verify_moment_bound(const SystemSpec& spec, const EnsembleConfig& cfg, double p,
                                      const MomentBoundOptions& opts) {
    if (!(opts.slack >= 0.0)) throw ValidationError("slack must be >= 0");
    MomentBoundResult result;
    result.p = p;
    result.slack = opts.slack;
    result.h1_holds = check_H1(spec, opts.h1_scan).verdict == Verdict::Holds;

    SimConfig ode = cfg.base;
    ode.scheme = Scheme::RK4;
    ode.record_stride = TimeGrid(ode.dt, ode.t_end).steps();
    const MomentSolution z = solve_moment_ode(spec, p, ode);
    result.running_max = z.running_max;
    result.bound = z.bound(p);
    const double limit = result.bound * (1.0 + opts.slack);

    const EnsembleStats stats = run_ensemble(spec, cfg, {p});
    result.n_failed = stats.n_failed;
    bool ok = !stats.failure_rate_exceeded();
    bool any_counted = false;
    for (const ProbeStats& probe : stats.probes) {
        MomentProbe mp{probe.time, probe.mean_xp.front(), limit, probe.time >= opts.burn_in};
        if (mp.counted) {
            any_counted = true;
            ok = ok && mp.mean_xp <= limit;
        }
        result.probes.push_back(mp);
    }
    if (!any_counted) throw ValidationError("no probe time at or after the burn-in");
    result.verdict = ok ? CheckVerdict::Pass : CheckVerdict::Fail;
    return result;
}

double AttractivityResult::fraction_below(double tol) const {
    std::size_t ok = 0;
    std::size_t below = 0;
    for (double g : final_gaps) {
        if (std::isnan(g)) continue;
        ++ok;
        if (g < tol) ++below;
    }
    return fraction(below, ok);
}

AttractivityResult attractivity_experiment(const SystemSpec& spec, const EnsembleConfig& cfg, double x0, double y0) {
    cfg.validate();
    if (!(x0 > 0.0) || !(y0 > 0.0)) throw ValidationError("initial values must be > 0");
    const TimeGrid grid(cfg.base.dt, cfg.base.t_end);
    const CoefficientTable table(spec, grid);

    AttractivityResult result;
    result.n_pairs = cfg.n_paths;
    result.final_gaps.assign(cfg.n_paths, std::numeric_limits<double>::quiet_NaN());
    parallel_for_index(cfg.n_paths, cfg.threads, [&](std::size_t i) {
        double gap = 0.0;
        try {
            integrate_log_em_pair(table, x0, y0, derive_seed(cfg.master_seed, i),
                                  [&](std::size_t, double x, double y) { gap = std::abs(x - y); });
            result.final_gaps[i] = gap;
        } catch (const BlowUpError&) {
        }
    });
    result.n_failed = static_cast<std::size_t>(
        std::count_if(result.final_gaps.begin(), result.final_gaps.end(), [](double g) { return std::isnan(g); }));
    return result;
}

LlnResult lln_check(const SystemSpec& spec, const EnsembleConfig& cfg) {
    const double horizon = cfg.base.t_end;
    if (!(horizon >= 100.0)) throw ValidationError("lln_check requires t_end >= 100");
    EnsembleConfig run = cfg;
    run.probe_times.clear();
    const PathSamples samples = sample_paths(spec, run);

    LlnResult result;
    result.sigma_sup = sup_abs_on_grid(spec.sigma, 0.0, horizon, std::min(cfg.base.dt, 1e-3));
    result.bound = 4.0 * result.sigma_sup / std::sqrt(horizon);
    std::size_t ok = 0;
    std::size_t within = 0;
    for (std::size_t i = 0; i < samples.n_paths(); ++i) {
        if (samples.failed[i]) {
            ++result.n_failed;
            continue;
        }
        ++ok;
        const double ratio = std::abs(samples.final_noise[i] / horizon);
        result.max_ratio = std::max(result.max_ratio, ratio);
        if (ratio <= result.bound) ++within;
    }
    result.fraction_within = fraction(within, ok);
    const bool too_many_failed =
        static_cast<double>(result.n_failed) > kMaxFailureRate * static_cast<double>(samples.n_paths());
    result.verdict = !too_many_failed && result.fraction_within >= 0.99 ? CheckVerdict::Pass : CheckVerdict::Fail;
    return result;
}

}  // namespace stochlog
