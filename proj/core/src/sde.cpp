#include "stochlog/sde.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "stochlog/format.hpp"

namespace stochlog {

std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::LogEM: return "log-em";
        case Scheme::DirectEM: return "direct-em";
        case Scheme::RK4: return "rk4";
    }
    return "";
}

Scheme parse_scheme(std::string_view text) {
    if (text == "log-em") return Scheme::LogEM;
    if (text == "direct-em") return Scheme::DirectEM;
    if (text == "rk4") return Scheme::RK4;
    throw ValidationError("unknown scheme '" + std::string(text) + "' (expected log-em, direct-em or rk4)");
}

void SimConfig::validate() const {
    if (!(x0 > 0.0) || !std::isfinite(x0)) throw ValidationError("x0 must be > 0");
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    if (!(dt <= t_end) || !std::isfinite(t_end)) throw ValidationError("t_end must be finite and >= dt");
    if (record_stride < 1) throw ValidationError("record_stride must be >= 1");
}

std::size_t default_record_stride(double t_end, double dt, std::size_t max_points) {
    const TimeGrid grid(dt, t_end);
    const std::size_t points = grid.steps() + 1;
    return std::max<std::size_t>(1, (points + max_points - 1) / max_points);
}

TimeGrid::TimeGrid(double dt, double t_end) : dt_(dt), t_end_(t_end) {
    if (!(dt > 0.0) || !(t_end >= dt)) throw ValidationError("time grid requires 0 < dt <= t_end");
    steps_ = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    last_step_ = t_end - static_cast<double>(steps_ - 1) * dt;
}

std::size_t TimeGrid::index_of(double t) const {
    if (!(t >= 0.0) || t > t_end_ + 1e-9 * std::max(1.0, t_end_)) {
        throw ValidationError("time " + format_double(t) + " outside [0, t_end]");
    }
    if (t >= t_end_) return steps_;
    return std::min(steps_, static_cast<std::size_t>(std::llround(t / dt_)));
}

CoefficientTable::CoefficientTable(const SystemSpec& spec, const TimeGrid& grid) : grid_(grid) {
    const std::size_t n = grid.steps();
    r_.resize(n);
    a_.resize(n);
    sigma_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = grid.time(k);
        r_[k] = spec.r(t);
        a_[k] = spec.a(t);
        sigma_[k] = spec.sigma(t);
    }
}

namespace {

struct Recorder {
    const TimeGrid& grid;
    std::size_t stride;
    Trajectory& out;

    void operator()(std::size_t k, double x, double m) const {
        if (k % stride == 0 || k == grid.steps()) {
            out.times.push_back(grid.time(k));
            out.states.push_back(x);
            out.noise_integral.push_back(m);
        }
    }
};

Trajectory prepared(const SimConfig& cfg, const TimeGrid& grid, Scheme scheme) {
    Trajectory traj;
    traj.scheme_used = scheme;
    traj.seed_used = cfg.seed;
    const std::size_t points = grid.steps() / cfg.record_stride + 2;
    traj.times.reserve(points);
    traj.states.reserve(points);
    traj.noise_integral.reserve(points);
    return traj;
}

// RK4 for dz/dt = z (r + c sigma^2 - a z).
MomentSolution integrate_rk4(const SystemSpec& spec, double c, const SimConfig& cfg) {
    cfg.validate();
    const TimeGrid grid(cfg.dt, cfg.t_end);
    MomentSolution sol;
    sol.path = prepared(cfg, grid, Scheme::RK4);
    Recorder record{grid, cfg.record_stride, sol.path};

    auto rhs = [&](double t, double z) {
        const double s = spec.sigma(t);
        return z * ((spec.r(t) + c * s * s) - spec.a(t) * z);
    };

    double z = cfg.x0;
    sol.running_max = z;
    record(0, z, 0.0);
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        const double t = grid.time(k);
        const double h = grid.step(k);
        const double k1 = rhs(t, z);
        const double k2 = rhs(t + 0.5 * h, z + 0.5 * h * k1);
        const double k3 = rhs(t + 0.5 * h, z + 0.5 * h * k2);
        const double k4 = rhs(t + h, z + h * k3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(z) || std::abs(z) > 1e300) throw BlowUpError(grid.time(k + 1));
        sol.running_max = std::max(sol.running_max, z);
        record(k + 1, z, 0.0);
    }
    return sol;
}

}  // namespace

Trajectory simulate_log_em(const SystemSpec& spec, const SimConfig& cfg) {
    cfg.validate();
    if (cfg.scheme != Scheme::LogEM) throw ValidationError("simulate_log_em requires scheme log-em");
    const TimeGrid grid(cfg.dt, cfg.t_end);
    const CoefficientTable table(spec, grid);
    Trajectory traj = prepared(cfg, grid, Scheme::LogEM);
    integrate_log_em(table, cfg.x0, cfg.seed, Recorder{grid, cfg.record_stride, traj});
    return traj;
}

Trajectory simulate_direct_em(const SystemSpec& spec, const SimConfig& cfg) {
    cfg.validate();
    if (cfg.scheme != Scheme::DirectEM) throw ValidationError("simulate_direct_em requires scheme direct-em");
    const TimeGrid grid(cfg.dt, cfg.t_end);
    const CoefficientTable table(spec, grid);
    Trajectory traj = prepared(cfg, grid, Scheme::DirectEM);
    integrate_direct_em(table, cfg.x0, cfg.seed, Recorder{grid, cfg.record_stride, traj}, traj.absorbed_at);
    return traj;
}

Trajectory solve_deterministic(const SystemSpec& spec, const SimConfig& cfg) {
    return integrate_rk4(spec, 0.0, cfg).path;
}

MomentSolution solve_moment_ode(const SystemSpec& spec, double p, const SimConfig& cfg) {
    if (!(p > 0.0)) throw ValidationError("moment order p must be > 0");
    return integrate_rk4(spec, 0.5 * (p - 1.0), cfg);
}

Trajectory simulate(const SystemSpec& spec, const SimConfig& cfg) {
    switch (cfg.scheme) {
        case Scheme::LogEM: return simulate_log_em(spec, cfg);
        case Scheme::DirectEM: return simulate_direct_em(spec, cfg);
        case Scheme::RK4: return solve_deterministic(spec, cfg);
    }
    throw ValidationError("unknown scheme");
}

std::pair<Trajectory, Trajectory> coupled_pair(const SystemSpec& spec, const SimConfig& cfg, double x0, double y0) {
    if (!(x0 > 0.0) || !(y0 > 0.0)) throw ValidationError("coupled_pair requires x0, y0 > 0");
    SimConfig first = cfg;
    first.scheme = Scheme::LogEM;
    first.x0 = x0;
    SimConfig second = first;
    second.x0 = y0;
    return {simulate_log_em(spec, first), simulate_log_em(spec, second)};
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,x,M\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out << format_double(traj.times[i]) << ',' << format_double(traj.states[i]) << ','
            << format_double(traj.noise_integral[i]) << '\n';
    }
}

}  // namespace stochlog
