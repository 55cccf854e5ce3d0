#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "stochlog/config.hpp"
#include "stochlog/error.hpp"
#include "stochlog/sde.hpp"

using namespace stochlog;

namespace {

SimConfig sim(double x0, double dt, double t_end, Scheme scheme = Scheme::LogEM, std::uint64_t seed = 1) {
    SimConfig c;
    c.x0 = x0;
    c.dt = dt;
    c.t_end = t_end;
    c.scheme = scheme;
    c.seed = seed;
    c.record_stride = 1;
    return c;
}

double sup_gap(const Trajectory& a, const Trajectory& b) {
    EXPECT_EQ(a.times.size(), b.times.size());
    double gap = 0.0;
    for (std::size_t i = 0; i < a.states.size() && i < b.states.size(); ++i) {
        gap = std::max(gap, std::abs(a.states[i] - b.states[i]));
    }
    return gap;
}

}  // namespace

TEST(SimConfigTest, Validation) {
    EXPECT_NO_THROW(SimConfig{}.validate());
    EXPECT_THROW(sim(0.0, 1e-3, 1.0).validate(), ValidationError);
    EXPECT_THROW(sim(-1.0, 1e-3, 1.0).validate(), ValidationError);
    EXPECT_THROW(sim(1.0, 0.0, 1.0).validate(), ValidationError);
    EXPECT_THROW(sim(1.0, 2.0, 1.0).validate(), ValidationError);
    SimConfig c = sim(1.0, 1e-3, 1.0);
    c.record_stride = 0;
    EXPECT_THROW(c.validate(), ValidationError);
}

TEST(SimConfigTest, DefaultStrideBoundsRecordedPoints) {
    EXPECT_EQ(default_record_stride(500.0, 1e-3), SimConfig{}.record_stride);
    EXPECT_EQ(default_record_stride(10.0, 1e-3), 1u);
    const SystemSpec s = builtin_example(1);
    const Trajectory t = simulate_log_em(s, SimConfig{});
    EXPECT_LE(t.times.size(), 100001u);
    EXPECT_EQ(t.times.back(), 500.0);
}

TEST(TimeGridTest, ShortenedFinalStep) {
    const TimeGrid g(0.3, 1.0);
    EXPECT_EQ(g.steps(), 4u);
    EXPECT_DOUBLE_EQ(g.step(0), 0.3);
    EXPECT_NEAR(g.step(3), 0.1, 1e-15);
    EXPECT_EQ(g.time(4), 1.0);
    EXPECT_EQ(g.index_of(0.31), 1u);
    EXPECT_EQ(g.index_of(1.0), 4u);
    EXPECT_THROW((void)g.index_of(1.5), ValidationError);
    EXPECT_THROW((void)g.index_of(-0.1), ValidationError);
    EXPECT_EQ(TimeGrid(1e-3, 500.0).steps(), 500000u);
    EXPECT_THROW(TimeGrid(0.0, 1.0), ValidationError);
}

TEST(SchemeNames, RoundTrip) {
    for (Scheme s : {Scheme::LogEM, Scheme::DirectEM, Scheme::RK4}) EXPECT_EQ(parse_scheme(to_string(s)), s);
    EXPECT_THROW(parse_scheme("milstein"), ValidationError);
}

TEST(LogEM, EquilibriumStaysPut) {
    const Trajectory t = simulate_log_em(make_system("1", "1", "0"), sim(1.0, 1e-3, 5.0));
    for (std::size_t k = 0; k < t.states.size(); ++k) EXPECT_NEAR(t.states[k], 1.0, 1e-9 * static_cast<double>(k + 1));
}

TEST(LogEM, LinearGrowthReachesE) {
    const Trajectory t = simulate_log_em(make_system("1", "0", "0"), sim(1.0, 1e-4, 1.0));
    EXPECT_NEAR(t.states.back(), std::exp(1.0), 1e-3);
}

TEST(LogEM, NoiseFreeMatchesDeterministicToFirstOrder) {
    const SystemSpec s = make_system("sin(t)+2/3", "cos(t)+1", "0");
    const Trajectory ref = solve_deterministic(s, sim(0.5, 1e-3, 50.0, Scheme::RK4));
    const double err_coarse = sup_gap(simulate_log_em(s, sim(0.5, 1e-3, 50.0)), ref);
    EXPECT_LT(err_coarse, 1e-2);
    // Halving dt should roughly halve the error, so compare on the shared grid.
    SimConfig fine = sim(0.5, 5e-4, 50.0);
    fine.record_stride = 2;
    const double err_fine = sup_gap(simulate_log_em(s, fine), ref);
    EXPECT_GT(err_coarse / err_fine, 1.6);
    EXPECT_LT(err_coarse / err_fine, 2.4);
}

TEST(LogEM, PositiveStatesAndInvariants) {
    SimConfig c = sim(0.5, 1e-3, 200.0, Scheme::LogEM, 77);
    c.record_stride = 7;
    const Trajectory t = simulate_log_em(builtin_example(2), c);
    EXPECT_EQ(t.times.front(), 0.0);
    EXPECT_EQ(t.noise_integral.front(), 0.0);
    EXPECT_EQ(t.scheme_used, Scheme::LogEM);
    EXPECT_EQ(t.seed_used, 77u);
    for (std::size_t i = 1; i < t.times.size(); ++i) EXPECT_GT(t.times[i], t.times[i - 1]);
    for (double x : t.states) EXPECT_GT(x, 0.0);
    EXPECT_EQ(t.times.back(), 200.0);
}

TEST(LogEM, UnderflowStaysPositive) {
    // Strong negative drift would drive exp(y) below the smallest double.
    const Trajectory t = simulate_log_em(make_system("-2000", "0", "0"), sim(1.0, 1e-2, 1.0));
    EXPECT_GT(t.states.back(), 0.0);
}

TEST(LogEM, BlowUpReportsTime) {
    try {
        (void)simulate_log_em(make_system("1", "0", "0"), sim(1.0, 0.5, 2000.0));
        FAIL();
    } catch (const BlowUpError& e) {
        EXPECT_NEAR(e.time(), 709.0, 1.0);
    }
}

TEST(LogEM, MatchesIndependentRecursion) {
    const SystemSpec s = builtin_example(1);
    const SimConfig c = sim(0.8, 0.01, 20.0, Scheme::LogEM, 4242);
    const Trajectory t = simulate_log_em(s, c);
    const NoiseStream dB = brownian_increments(c.seed, 2000, c.dt);
    double y = std::log(c.x0);
    double m = 0.0;
    for (std::size_t k = 0; k < 2000; ++k) {
        const double tk = static_cast<double>(k) * c.dt;
        const double sig = std::sqrt(std::cos(tk) + 1.0);
        y += (std::sin(tk) + 2.0 / 3.0 - 0.5 * sig * sig - (std::cos(tk) + 1.0) * std::exp(y)) * c.dt + sig * dB.increments[k];
        m += sig * dB.increments[k];
        ASSERT_NEAR(std::log(t.states[k + 1]), y, 1e-9) << k;
        ASSERT_NEAR(t.noise_integral[k + 1], m, 1e-9) << k;
    }
}

TEST(LogEM, WrongSchemeRejected) {
    EXPECT_THROW((void)simulate_log_em(builtin_example(1), sim(1.0, 1e-3, 1.0, Scheme::DirectEM)), ValidationError);
    EXPECT_THROW((void)simulate_direct_em(builtin_example(1), sim(1.0, 1e-3, 1.0)), ValidationError);
}

TEST(DirectEM, NoiseFreeMatchesDeterministic) {
    const SystemSpec s = make_system("sin(t)+2/3", "cos(t)+1", "0");
    const Trajectory ref = solve_deterministic(s, sim(0.5, 1e-3, 50.0, Scheme::RK4));
    EXPECT_LT(sup_gap(simulate_direct_em(s, sim(0.5, 1e-3, 50.0, Scheme::DirectEM)), ref), 1e-2);
}

TEST(DirectEM, AbsorbsAtZero) {
    const SystemSpec s = make_system("0", "0", "4");
    bool absorbed_any = false;
    for (std::uint64_t seed = 0; seed < 20 && !absorbed_any; ++seed) {
        const Trajectory t = simulate_direct_em(s, sim(1.0, 0.1, 10.0, Scheme::DirectEM, seed));
        if (!t.absorbed_at) continue;
        absorbed_any = true;
        for (std::size_t i = 0; i < t.times.size(); ++i) {
            if (t.times[i] >= *t.absorbed_at - 1e-12) {
                EXPECT_EQ(t.states[i], 0.0);
            }
            EXPECT_GE(t.states[i], 0.0);
        }
    }
    EXPECT_TRUE(absorbed_any);
}

TEST(DirectEM, MatchesIndependentRecursion) {
    const SystemSpec s = make_system("1", "1", "0.5");
    const SimConfig c = sim(0.1, 0.01, 1.0, Scheme::DirectEM, 31);
    const Trajectory t = simulate_direct_em(s, c);
    const NoiseStream dB = brownian_increments(c.seed, 100, c.dt);
    double x = c.x0;
    for (std::size_t k = 0; k < 100; ++k) {
        x += x * (1.0 - x) * c.dt + x * 0.5 * dB.increments[k];
        EXPECT_EQ(t.states[k + 1], x);
    }
}

// Weak-order probe: Brownian paths are shared across step sizes by summing fine
// increments, so the Monte Carlo noise in the error differences stays small.
TEST(DirectEM, WeakErrorHalvesWithStep) {
    const double fine_dt = 1e-4;
    const std::size_t fine_steps = 10000;
    const std::size_t paths = 3000;
    const std::array<std::size_t, 3> factors{100, 50, 25};
    std::array<double, 3> bias{};
    for (std::size_t p = 0; p < paths; ++p) {
        const NoiseStream dW = brownian_increments(derive_seed(9, p), fine_steps, fine_dt);
        auto run = [&](std::size_t factor) {
            const double h = fine_dt * static_cast<double>(factor);
            double x = 0.1;
            for (std::size_t k = 0; k < fine_steps; k += factor) {
                double db = 0.0;
                for (std::size_t j = 0; j < factor; ++j) db += dW.increments[k + j];
                x += x * (1.0 - x) * h + 0.5 * x * db;
            }
            return x;
        };
        const double ref = run(1);
        for (std::size_t i = 0; i < factors.size(); ++i) bias[i] += (run(factors[i]) - ref) / paths;
    }
    EXPECT_GT(bias[0] / bias[1], 1.5);
    EXPECT_LT(bias[0] / bias[1], 2.7);
    EXPECT_GT(bias[1] / bias[2], 1.5);
    EXPECT_LT(bias[1] / bias[2], 2.7);
}

TEST(Deterministic, ClosedFormLogistic) {
    const SystemSpec s = make_system("2", "1", "0");
    const Trajectory t = solve_deterministic(s, sim(1.0, 1e-3, 10.0, Scheme::RK4));
    EXPECT_NEAR(t.states[1000], 1.7615941559557646, 1e-8);
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        ASSERT_NEAR(t.states[i], oracle::logistic(2.0, 1.0, 1.0, t.times[i]), 1e-8);
    }
    for (double m : t.noise_integral) EXPECT_EQ(m, 0.0);
    EXPECT_EQ(t.scheme_used, Scheme::RK4);
}

TEST(Deterministic, ConstantTrajectories) {
    for (double x : solve_deterministic(make_system("0", "0", "0"), sim(0.7, 0.1, 5.0, Scheme::RK4)).states) {
        EXPECT_EQ(x, 0.7);
    }
    for (double x : solve_deterministic(make_system("3", "1.5", "0"), sim(2.0, 0.1, 5.0, Scheme::RK4)).states) {
        EXPECT_EQ(x, 2.0);
    }
}

TEST(Deterministic, DispatchAndBlowUp) {
    const SystemSpec s = make_system("2", "1", "0");
    const SimConfig c = sim(1.0, 1e-2, 3.0, Scheme::RK4);
    EXPECT_EQ(simulate(s, c).states, solve_deterministic(s, c).states);
    EXPECT_THROW((void)solve_deterministic(make_system("1", "0", "0"), sim(1.0, 0.1, 800.0, Scheme::RK4)),
                 BlowUpError);
}

TEST(MomentOde, FirstOrderIsDeterministic) {
    const SystemSpec s = builtin_example(1);
    const SimConfig c = sim(0.5, 1e-3, 20.0, Scheme::RK4);
    EXPECT_EQ(solve_moment_ode(s, 1.0, c).path.states, solve_deterministic(s, c).states);
}

TEST(MomentOde, FixedPoint) {
    const MomentSolution m = solve_moment_ode(make_system("1", "1", "1"), 2.0, sim(0.5, 1e-2, 60.0, Scheme::RK4));
    EXPECT_NEAR(m.path.states.back(), 1.5, 1e-9);
    EXPECT_NEAR(m.running_max, 1.5, 1e-9);
    EXPECT_NEAR(m.bound(2.0), 2.25, 1e-8);
}

TEST(MomentOde, RunningMaxIncludesStartAndRejectsBadOrder) {
    const MomentSolution m = solve_moment_ode(make_system("1", "1", "0"), 1.0, sim(3.0, 1e-2, 10.0, Scheme::RK4));
    EXPECT_EQ(m.running_max, 3.0);
    EXPECT_THROW((void)solve_moment_ode(make_system("1", "1", "0"), 0.0, sim(1.0, 0.1, 1.0)), ValidationError);
    EXPECT_THROW((void)solve_moment_ode(make_system("1", "1", "0"), -1.0, sim(1.0, 0.1, 1.0)), ValidationError);
}

TEST(MomentOde, ExampleOneFinite) {
    const MomentSolution m = solve_moment_ode(builtin_example(1), 2.0, sim(0.5, 1e-3, 200.0, Scheme::RK4));
    EXPECT_TRUE(std::isfinite(m.running_max));
    EXPECT_GT(m.running_max, 0.5);
    EXPECT_LT(m.running_max, 10.0);
}

TEST(CoupledPair, EqualStartsGiveEqualPaths) {
    const auto [x, y] = coupled_pair(builtin_example(1), sim(1.0, 1e-3, 20.0), 0.7, 0.7);
    EXPECT_EQ(x.states, y.states);
    EXPECT_EQ(x.noise_integral, y.noise_integral);
}

TEST(CoupledPair, ExampleOneConverges) {
    SimConfig c = sim(1.0, 1e-3, 200.0, Scheme::LogEM, 2024);
    c.record_stride = 1000;
    const auto [x, y] = coupled_pair(builtin_example(1), c, 0.2, 2.0);
    EXPECT_LT(std::abs(x.states.back() - y.states.back()), 1e-2);
    // Shared increments mean identical noise integrals.
    EXPECT_EQ(x.noise_integral, y.noise_integral);
}

TEST(CoupledPair, DeterministicLogisticConverges) {
    SimConfig c = sim(1.0, 1e-3, 50.0);
    const auto [x, y] = coupled_pair(make_system("1", "1", "0"), c, 0.5, 2.0);
    EXPECT_LT(std::abs(x.states.back() - y.states.back()), 1e-6);
    EXPECT_NEAR(x.states.back(), 1.0, 1e-6);
    EXPECT_THROW((void)coupled_pair(make_system("1", "1", "0"), c, 0.0, 1.0), ValidationError);
}

TEST(TrajectoryCsv, HeaderAndRoundTripPrecision) {
    SimConfig c = sim(0.5, 0.1, 0.3, Scheme::LogEM, 3);
    const Trajectory t = simulate_log_em(builtin_example(1), c);
    std::ostringstream out;
    write_trajectory_csv(out, t);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,x,M");
    std::size_t row = 0;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::string tt, xx, mm;
        std::getline(fields, tt, ',');
        std::getline(fields, xx, ',');
        std::getline(fields, mm, ',');
        EXPECT_EQ(std::stod(tt), t.times[row]);
        EXPECT_EQ(std::stod(xx), t.states[row]);
        EXPECT_EQ(std::stod(mm), t.noise_integral[row]);
        ++row;
    }
    EXPECT_EQ(row, t.times.size());
}
