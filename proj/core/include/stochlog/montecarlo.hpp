#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stochlog/hypotheses.hpp"
#include "stochlog/sde.hpp"

namespace stochlog {

struct EnsembleConfig {
    SimConfig base;
    std::size_t n_paths = 200;
    std::uint64_t master_seed = 0;
    std::vector<double> probe_times{100.0, 200.0, 500.0};
    /// Extinction threshold for extinct_fraction.
    double eps_ext = 1e-3;
    /// Optional permanence probes m (lower) and M (upper) reported in serialised stats.
    std::optional<double> lower_level;
    std::optional<double> upper_level;
    /// Worker threads; 0 picks the hardware concurrency. Never changes results.
    unsigned threads = 0;

    void validate() const;

    friend bool operator==(const EnsembleConfig&, const EnsembleConfig&) = default;
};

/// Quantile levels reported at every probe time.
inline constexpr std::array<double, 5> kQuantileLevels{0.01, 0.05, 0.50, 0.95, 0.99};

/// Fraction of failed paths above which a run is itself a failure.
inline constexpr double kMaxFailureRate = 0.01;

/// Linear interpolation between order statistics of an ascending sample.
double quantile_sorted(const std::vector<double>& sorted, double level);

struct ProbeStats {
    double time = 0.0;
    /// E[x^p] estimates, aligned with EnsembleStats::p_list.
    std::vector<double> mean_xp;
    std::array<double, kQuantileLevels.size()> quantiles{};
    /// Successful-path states at this time, ascending.
    std::vector<double> sorted_states;

    /// Fraction with x <= level.
    double tail_below(double level) const;
    /// Fraction with x >= level.
    double tail_above(double level) const;
    /// Fraction with x > level.
    double fraction_strictly_above(double level) const;
    /// Fraction with x < eps.
    double extinct_fraction(double eps) const;

    friend bool operator==(const ProbeStats&, const ProbeStats&) = default;
};

struct EnsembleStats {
    std::vector<double> p_list;
    std::vector<ProbeStats> probes;
    std::size_t n_paths = 0;
    std::size_t n_failed = 0;
    /// max over successful paths of |M(T)/T| at T = t_end.
    double lln_stat = 0.0;
    double t_end = 0.0;
    double eps_ext = 1e-3;
    std::optional<double> lower_level;
    std::optional<double> upper_level;

    bool failure_rate_exceeded() const {
        return static_cast<double>(n_failed) > kMaxFailureRate * static_cast<double>(n_paths);
    }

    friend bool operator==(const EnsembleStats&, const EnsembleStats&) = default;
};

/// Calls fn(i) for i in [0, n) on `threads` workers. Which worker runs which
/// index is unspecified; callers write results into per-index slots.
void parallel_for_index(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Simulates cfg.n_paths paths with seeds derive_seed(master_seed, i) and
/// aggregates them in path-index order. Paths that blow up are excluded and
/// counted in n_failed.
EnsembleStats run_ensemble(const SystemSpec& spec, const EnsembleConfig& cfg, const std::vector<double>& p_list);

/// Raw per-path samples behind run_ensemble.
struct PathSamples {
    std::vector<double> probe_times;
    /// states[i * probe_times.size() + j] is path i at probe j.
    std::vector<double> states;
    /// M(T) per path.
    std::vector<double> final_noise;
    std::vector<std::uint64_t> seeds;
    std::vector<bool> failed;

    std::size_t n_paths() const noexcept { return seeds.size(); }
    double state(std::size_t path, std::size_t probe) const { return states[path * probe_times.size() + probe]; }
};

PathSamples sample_paths(const SystemSpec& spec, const EnsembleConfig& cfg);

/// Per-path CSV: `path,seed,failed,x@<t>...,M_T`.
void write_paths_csv(std::ostream& out, const PathSamples& samples);

enum class CheckVerdict { Pass, Fail };

std::string_view to_string(CheckVerdict v);

struct MomentProbe {
    double time = 0.0;
    double mean_xp = 0.0;
    double limit = 0.0;
    bool counted = false;
};

struct MomentBoundResult {
    CheckVerdict verdict = CheckVerdict::Fail;
    double p = 1.0;
    double slack = 0.1;
    double running_max = 0.0;
    double bound = 0.0;
    /// False when H1 did not hold; the verdict is then advisory only.
    bool h1_holds = false;
    std::size_t n_failed = 0;
    std::vector<MomentProbe> probes;
};

struct MomentBoundOptions {
    double slack = 0.10;
    /// Probe times before this are ignored.
    double burn_in = 20.0;
    ScanParams h1_scan{};
};

/// Compares the ensemble p-th moment against running_max(z)^p (1 + slack),
/// where z solves the moment comparison ODE from the same initial value.
MomentBoundResult verify_moment_bound(const SystemSpec& spec, const EnsembleConfig& cfg, double p,
                                      const MomentBoundOptions& opts = {});

struct AttractivityResult {
    std::size_t n_pairs = 0;
    std::size_t n_failed = 0;
    /// |x(T) - y(T)| per pair in index order; NaN for failed pairs.
    std::vector<double> final_gaps;

    /// Fraction of successful pairs with gap < tol.
    double fraction_below(double tol) const;
};

/// n_paths coupled pairs started at x0 and y0, pair i sharing seed derive_seed(master_seed, i).
AttractivityResult attractivity_experiment(const SystemSpec& spec, const EnsembleConfig& cfg, double x0, double y0);

struct LlnResult {
    CheckVerdict verdict = CheckVerdict::Fail;
    double max_ratio = 0.0;
    /// 4 sigma_u / sqrt(T)
    double bound = 0.0;
    double sigma_sup = 0.0;
    double fraction_within = 0.0;
    std::size_t n_failed = 0;
};

/// Passes when at least 99% of paths satisfy |M(T)/T| <= 4 sigma_u / sqrt(T).
LlnResult lln_check(const SystemSpec& spec, const EnsembleConfig& cfg);

}  // namespace stochlog
