#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "stochlog/coeff.hpp"
#include "stochlog/error.hpp"
#include "stochlog/noise.hpp"

namespace stochlog {

enum class Scheme {
    /// Euler-Maruyama on y = ln x; states stay strictly positive.
    LogEM,
    /// Euler-Maruyama on x itself, absorbed at zero.
    DirectEM,
    /// Classical RK4 on the noise-free equation.
    RK4,
};

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view text);

struct SimConfig {
    double x0 = 0.5;
    double dt = 1e-3;
    double t_end = 500.0;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::LogEM;
    // Keeps the default 500-unit path at <= 1e5 recorded points.
    std::size_t record_stride = 6;

    void validate() const;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Smallest stride that keeps a path at or below `max_points` recorded points.
std::size_t default_record_stride(double t_end, double dt, std::size_t max_points = 100000);

/// Uniform grid t_k = k * dt on [0, t_end]; the last step is shortened when
/// t_end is not a multiple of dt.
class TimeGrid {
public:
    TimeGrid(double dt, double t_end);

    std::size_t steps() const noexcept { return steps_; }
    double dt() const noexcept { return dt_; }
    double t_end() const noexcept { return t_end_; }

    double time(std::size_t k) const noexcept {
        return k < steps_ ? static_cast<double>(k) * dt_ : t_end_;
    }
    double step(std::size_t k) const noexcept { return k + 1 < steps_ ? dt_ : last_step_; }

    /// Grid index nearest to t.
    std::size_t index_of(double t) const;

private:
    double dt_;
    double t_end_;
    std::size_t steps_;
    double last_step_;
};

/// r, a and sigma evaluated at the left endpoint of every step.
class CoefficientTable {
public:
    CoefficientTable(const SystemSpec& spec, const TimeGrid& grid);

    const TimeGrid& grid() const noexcept { return grid_; }
    double r(std::size_t k) const noexcept { return r_[k]; }
    double a(std::size_t k) const noexcept { return a_[k]; }
    double sigma(std::size_t k) const noexcept { return sigma_[k]; }

private:
    TimeGrid grid_;
    std::vector<double> r_;
    std::vector<double> a_;
    std::vector<double> sigma_;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> states;
    /// M(t) = integral of sigma dB, recorded at `times`.
    std::vector<double> noise_integral;
    Scheme scheme_used = Scheme::LogEM;
    std::uint64_t seed_used = 0;
    /// DirectEM only: time at which the path hit zero.
    std::optional<double> absorbed_at;
};

struct MomentSolution {
    Trajectory path;
    /// Maximum of z over every integration step, including z(0).
    double running_max = 0.0;

    /// Ultimate bound L(p) = running_max^p on E[x^p].
    double bound(double p) const { return std::pow(running_max, p); }
};

/// Log-state ceiling; beyond it exp(y) is not representable.
inline constexpr double kMaxLogState = 709.0;

/// Drives the log-domain Euler-Maruyama recursion
///
///     y_{k+1} = y_k + (r_k - sigma_k^2/2 - a_k exp(y_k)) h_k + sigma_k dB_k
///
/// with dB_k = sqrt(h_k) z_k drawn from NormalStream(seed). `visit(k, x, M)`
/// is called for k = 0 .. steps. Throws BlowUpError when y exceeds kMaxLogState.
/// States too small to represent are reported as the smallest positive double.
template <class Visitor>
void integrate_log_em(const CoefficientTable& table, double x0, std::uint64_t seed, Visitor&& visit) {
    const TimeGrid& grid = table.grid();
    const NormalStream normal(seed);
    const std::size_t n = grid.steps();
    const double sqrt_dt = std::sqrt(grid.dt());
    double y = std::log(x0);
    double x = x0;
    double noise = 0.0;
    visit(std::size_t{0}, x, noise);
    for (std::size_t k = 0; k < n; ++k) {
        const double h = grid.step(k);
        const double dB = (k + 1 < n ? sqrt_dt : std::sqrt(h)) * normal(k);
        const double s = table.sigma(k);
        const double drift = table.r(k) - 0.5 * s * s - table.a(k) * x;
        y += drift * h + s * dB;
        noise += s * dB;
        if (!(y < kMaxLogState)) throw BlowUpError(grid.time(k + 1));
        x = std::exp(y);
        if (x == 0.0) x = std::numeric_limits<double>::denorm_min();
        visit(k + 1, x, noise);
    }
}

/// Two log-domain paths driven by the same increments. `visit(k, x, y)`.
template <class Visitor>
void integrate_log_em_pair(const CoefficientTable& table, double x0, double y0, std::uint64_t seed,
                           Visitor&& visit) {
    const TimeGrid& grid = table.grid();
    const NormalStream normal(seed);
    const std::size_t n = grid.steps();
    const double sqrt_dt = std::sqrt(grid.dt());
    double lx = std::log(x0);
    double ly = std::log(y0);
    double x = x0;
    double y = y0;
    visit(std::size_t{0}, x, y);
    for (std::size_t k = 0; k < n; ++k) {
        const double h = grid.step(k);
        const double dB = (k + 1 < n ? sqrt_dt : std::sqrt(h)) * normal(k);
        const double s = table.sigma(k);
        const double base = table.r(k) - 0.5 * s * s;
        lx += (base - table.a(k) * x) * h + s * dB;
        ly += (base - table.a(k) * y) * h + s * dB;
        if (!(lx < kMaxLogState) || !(ly < kMaxLogState)) throw BlowUpError(grid.time(k + 1));
        x = std::exp(lx);
        y = std::exp(ly);
        if (x == 0.0) x = std::numeric_limits<double>::denorm_min();
        if (y == 0.0) y = std::numeric_limits<double>::denorm_min();
        visit(k + 1, x, y);
    }
}

/// Direct Euler-Maruyama x_{k+1} = x_k + x_k (r_k - a_k x_k) h_k + x_k sigma_k dB_k.
/// Once x reaches zero or below the path stays at 0 and `absorbed_at` is set.
template <class Visitor>
void integrate_direct_em(const CoefficientTable& table, double x0, std::uint64_t seed, Visitor&& visit,
                         std::optional<double>& absorbed_at) {
    const TimeGrid& grid = table.grid();
    const NormalStream normal(seed);
    const std::size_t n = grid.steps();
    const double sqrt_dt = std::sqrt(grid.dt());
    double x = x0;
    double noise = 0.0;
    absorbed_at.reset();
    visit(std::size_t{0}, x, noise);
    for (std::size_t k = 0; k < n; ++k) {
        const double h = grid.step(k);
        const double dB = (k + 1 < n ? sqrt_dt : std::sqrt(h)) * normal(k);
        const double s = table.sigma(k);
        noise += s * dB;
        if (!absorbed_at) {
            x += x * (table.r(k) - table.a(k) * x) * h + x * s * dB;
            if (!std::isfinite(x)) throw BlowUpError(grid.time(k + 1));
            if (x <= 0.0) {
                x = 0.0;
                absorbed_at = grid.time(k + 1);
            }
        }
        visit(k + 1, x, noise);
    }
}

/// Log-domain Euler-Maruyama sample path.
Trajectory simulate_log_em(const SystemSpec& spec, const SimConfig& cfg);

/// Direct Euler-Maruyama sample path with absorption at zero.
Trajectory simulate_direct_em(const SystemSpec& spec, const SimConfig& cfg);

/// RK4 solution of the noise-free equation dx/dt = x (r - a x).
Trajectory solve_deterministic(const SystemSpec& spec, const SimConfig& cfg);

/// RK4 solution of dz/dt = z ((r + (p-1) sigma^2 / 2) - a z) with z(0) = cfg.x0,
/// whose running maximum bounds the p-th moment of the stochastic solution.
MomentSolution solve_moment_ode(const SystemSpec& spec, double p, const SimConfig& cfg);

/// Dispatches on cfg.scheme.
Trajectory simulate(const SystemSpec& spec, const SimConfig& cfg);

/// Two LogEM paths from x0 and y0 sharing the noise of cfg.seed.
std::pair<Trajectory, Trajectory> coupled_pair(const SystemSpec& spec, const SimConfig& cfg, double x0, double y0);

/// Writes `t,x,M` rows with round-trip precision.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace stochlog
