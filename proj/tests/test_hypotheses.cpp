#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "stochlog/config.hpp"
#include "stochlog/error.hpp"
#include "stochlog/hypotheses.hpp"

using namespace stochlog;
using std::numbers::pi;

namespace {

ScanParams short_scan(double window = 2 * pi, double end = 100.0) {
    ScanParams p;
    p.window = window;
    p.scan_end = end;
    return p;
}

}  // namespace

TEST(ScanParamsTest, Validation) {
    EXPECT_NO_THROW(ScanParams{}.validate());
    ScanParams p;
    p.window = 0.0;
    EXPECT_THROW(p.validate(), ValidationError);
    p = {};
    p.scan_end = p.scan_start;
    EXPECT_THROW(p.validate(), ValidationError);
    p = {};
    p.scan_step = -0.1;
    EXPECT_THROW(p.validate(), ValidationError);
    p = {};
    p.margin = -1.0;
    EXPECT_THROW(p.validate(), ValidationError);
    p = {};
    p.quad.step = 0.0;
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(ScanWindow, MatchesDirectIntegrationAtExtremes) {
    const SystemSpec s = builtin_example(3);
    const ScanParams p = short_scan(5.0, 60.0);
    const WindowCheckResult r = scan_window(s.a, p);
    EXPECT_NEAR(r.inf_estimate, window_integral(s.a, r.argmin_t, p.window, p.quad), 1e-11);
    EXPECT_NEAR(r.sup_estimate, window_integral(s.a, r.argmax_t, p.window, p.quad), 1e-11);
    const oracle::ScanExtremes exact = oracle::scan_exact(oracle::example3_a(), 5.0, 0.0, 60.0, 0.1);
    EXPECT_NEAR(r.inf_estimate, exact.inf, 1e-9);
    EXPECT_NEAR(r.sup_estimate, exact.sup, 1e-9);
}

TEST(ScanWindow, GridIncludesEndpointAndArgs) {
    // Increasing integrand: min at scan_start, max at the last grid point.
    const CoeffExpr t = CoeffExpr::time();
    ScanParams p;
    p.window = 1.0;
    p.scan_start = 2.0;
    p.scan_end = 3.0;
    p.scan_step = 0.25;
    const WindowCheckResult r = scan_window(t, p);
    EXPECT_EQ(r.argmin_t, 2.0);
    EXPECT_EQ(r.argmax_t, 3.0);
    EXPECT_NEAR(r.inf_estimate, 2.5, 1e-12);
    EXPECT_NEAR(r.sup_estimate, 3.5, 1e-12);
}

TEST(CheckH1, ExampleOne) {
    const WindowCheckResult r = check_H1(builtin_example(1), ScanParams{});
    EXPECT_NEAR(r.inf_estimate, 2 * pi, 1e-8);
    EXPECT_NEAR(r.sup_estimate, 2 * pi, 1e-8);
    EXPECT_EQ(r.verdict, Verdict::Holds);
}

TEST(CheckH1, ZeroCompetitionIsMarginal) {
    const WindowCheckResult r = check_H1(make_system("1", "0", "0"), short_scan());
    EXPECT_EQ(r.inf_estimate, 0.0);
    EXPECT_EQ(r.verdict, Verdict::Marginal);
}

TEST(CheckH1, ExampleThreeWideWindow) {
    ScanParams p;
    p.window = 50.0;
    const WindowCheckResult r = check_H1(builtin_example(3), p);
    const oracle::ScanExtremes exact = oracle::scan_exact(oracle::example3_a(), 50.0, 0.0, 500.0, 0.1);
    EXPECT_NEAR(r.inf_estimate, exact.inf, 1e-8);
    EXPECT_GT(exact.inf, 0.0);
    EXPECT_EQ(r.verdict, Verdict::Holds);
}

TEST(CheckH1, MarginBoundaries) {
    // Constant c over a window of length 1 integrates to c.
    ScanParams p = short_scan(1.0, 10.0);
    EXPECT_EQ(check_H1(make_system("0", "5e-7", "0"), p).verdict, Verdict::Marginal);
    EXPECT_EQ(check_H1(make_system("0", "2e-6", "0"), p).verdict, Verdict::Holds);
    p.margin = 0.0;
    EXPECT_EQ(check_H1(make_system("0", "5e-7", "0"), p).verdict, Verdict::Holds);
}

TEST(CheckH2, ExampleOne) {
    const WindowCheckResult r = check_H2(builtin_example(1), ScanParams{});
    EXPECT_NEAR(r.inf_estimate, pi / 3, 1e-8);
    EXPECT_NEAR(r.sup_estimate, pi / 3, 1e-8);
    EXPECT_EQ(r.verdict, Verdict::Holds);
}

TEST(CheckH2, ExampleTwoIsNotHolds) {
    const WindowCheckResult r = check_H2(builtin_example(2), ScanParams{});
    EXPECT_NEAR(r.inf_estimate, 0.0, 1e-8);
    EXPECT_NEAR(r.sup_estimate, 0.0, 1e-8);
    EXPECT_EQ(r.verdict, Verdict::Marginal);
}

TEST(CheckH2, ZeroCoefficients) {
    const WindowCheckResult r = check_H2(make_system("0", "1", "0"), short_scan());
    EXPECT_EQ(r.inf_estimate, 0.0);
    EXPECT_NE(r.verdict, Verdict::Holds);
}

TEST(CheckH2, NegativeGrowthFails) {
    EXPECT_EQ(check_H2(make_system("-1", "1", "0"), short_scan()).verdict, Verdict::Fails);
}

TEST(CheckH3, Examples) {
    const WindowCheckResult ex2 = check_H3(builtin_example(2), ScanParams{});
    EXPECT_NEAR(ex2.sup_estimate, 0.0, 1e-8);
    EXPECT_EQ(ex2.verdict, Verdict::Holds);

    const WindowCheckResult ex1 = check_H3(builtin_example(1), ScanParams{});
    EXPECT_NEAR(ex1.sup_estimate, pi / 3, 1e-8);
    EXPECT_EQ(ex1.verdict, Verdict::Fails);

    const ScanParams p = short_scan(3.0);
    const WindowCheckResult neg = check_H3(make_system("-1", "1", "0"), p);
    EXPECT_NEAR(neg.sup_estimate, -3.0, 1e-12);
    EXPECT_EQ(neg.verdict, Verdict::Holds);
}

TEST(CheckH3, NeverMarginal) {
    const ScanParams p = short_scan(1.0, 10.0);
    EXPECT_EQ(check_H3(make_system("5e-7", "1", "0"), p).verdict, Verdict::Holds);
    EXPECT_EQ(check_H3(make_system("2e-6", "1", "0"), p).verdict, Verdict::Fails);
}

TEST(AverageCriteria, Examples) {
    const AverageCriteria ex3 = check_avg_criteria(builtin_example(3), 1e4);
    EXPECT_NEAR(ex3.avg_rs, 1.0 / 6.0, 0.01);
    EXPECT_NEAR(ex3.avg_a, 2.0, 0.01);
    const AverageCriteria ex4 = check_avg_criteria(builtin_example(4), 1e4);
    EXPECT_NEAR(ex4.avg_rs, -1.0 / 6.0, 0.01);
    EXPECT_NEAR(ex4.avg_a, 2.0, 0.01);
    const AverageCriteria zero = check_avg_criteria(make_system("0", "0", "0"), 50.0);
    EXPECT_EQ(zero.avg_rs, 0.0);
    EXPECT_EQ(zero.avg_a, 0.0);
    EXPECT_THROW(check_avg_criteria(builtin_example(1), -1.0), ValidationError);
}

TEST(Classify, ExampleOnePermanentByWindows) {
    const HypothesisReport r = classify(builtin_example(1), ScanParams{}, 1e4);
    EXPECT_EQ(r.classification, Classification::Permanent);
    EXPECT_EQ(r.decided_by, DecidedBy::Windows);
    EXPECT_NEAR(r.avg_rs, oracle::example1_growth().integral(0, 1e4) / 1e4, 1e-9);
    EXPECT_NEAR(r.avg_a, oracle::example1_a().integral(0, 1e4) / 1e4, 1e-9);
}

TEST(Classify, ExampleTwoExtinctByWindows) {
    const HypothesisReport r = classify(builtin_example(2), ScanParams{}, 1e4);
    EXPECT_EQ(r.classification, Classification::Extinct);
    EXPECT_EQ(r.decided_by, DecidedBy::Windows);
    EXPECT_EQ(r.h3.verdict, Verdict::Holds);
}

TEST(Classify, AveragesRouteForThreeAndFour) {
    const ScanParams p;
    const HypothesisReport ex3 = classify(builtin_example(3), p, 1e4, ClassifyRoute::Averages);
    const HypothesisReport ex4 = classify(builtin_example(4), p, 1e4, ClassifyRoute::Averages);
    EXPECT_EQ(ex3.classification, Classification::Permanent);
    EXPECT_EQ(ex4.classification, Classification::Extinct);
    EXPECT_EQ(ex4.decided_by, DecidedBy::Averages);
}

TEST(Classify, MixedSignIsIndeterminate) {
    // r - sigma^2/2 = sin(t/20): window integrals change sign.
    const SystemSpec s = make_system("sin(0.05*t) + (cos(t)+1)/2", "1", "sqrt(cos(t)+1)");
    const HypothesisReport r = classify(s, short_scan(2 * pi, 200.0), 1000.0);
    EXPECT_EQ(r.h2.verdict, Verdict::Fails);
    EXPECT_EQ(r.h3.verdict, Verdict::Fails);
    EXPECT_EQ(r.classification, Classification::Indeterminate);
    EXPECT_EQ(r.decided_by, DecidedBy::Undecided);
}

TEST(Classify, MarginalH2FallsBackToAverages) {
    // Growth max(0, sin(t/10)) vanishes on stretches longer than the window: inf = 0, average 1/pi.
    const SystemSpec s =
        make_system("(sin(0.1*t) + abs(sin(0.1*t)))/2 + (cos(t)+1)/2", "1", "sqrt(cos(t)+1)");
    const HypothesisReport r = classify(s, short_scan(2 * pi, 200.0), 2000.0 * pi);
    EXPECT_EQ(r.h2.verdict, Verdict::Marginal);
    EXPECT_EQ(r.h3.verdict, Verdict::Fails);
    EXPECT_NEAR(r.avg_rs, 1.0 / pi, 1e-3);
    EXPECT_EQ(r.classification, Classification::Permanent);
    EXPECT_EQ(r.decided_by, DecidedBy::Averages);
}

TEST(Classify, WindowsRouteDoesNotUseAveragesWithoutMarginal) {
    const SystemSpec s = make_system("sin(0.05*t) + 0.01 + (cos(t)+1)/2", "1", "sqrt(cos(t)+1)");
    const HypothesisReport windows = classify(s, short_scan(2 * pi, 200.0), 1000.0, ClassifyRoute::Windows);
    EXPECT_EQ(windows.classification, Classification::Indeterminate);
    const HypothesisReport averages = classify(s, short_scan(2 * pi, 200.0), 1000.0, ClassifyRoute::Averages);
    EXPECT_EQ(averages.classification, Classification::Permanent);
    EXPECT_EQ(averages.decided_by, DecidedBy::Averages);
}

TEST(Classify, NoCompetitionNeverDecidedByWindows) {
    const HypothesisReport r = classify(make_system("1", "0", "0"), short_scan(), 100.0, ClassifyRoute::Averages);
    EXPECT_EQ(r.h1.verdict, Verdict::Marginal);
    EXPECT_EQ(r.classification, Classification::Indeterminate);
}

TEST(Classify, DeterministicReports) {
    const ScanParams p = short_scan();
    const HypothesisReport a = classify(builtin_example(3), p, 500.0, ClassifyRoute::Averages);
    const HypothesisReport b = classify(builtin_example(3), p, 500.0, ClassifyRoute::Averages);
    EXPECT_EQ(a.h1.inf_estimate, b.h1.inf_estimate);
    EXPECT_EQ(a.h2.sup_estimate, b.h2.sup_estimate);
    EXPECT_EQ(a.avg_rs, b.avg_rs);
    EXPECT_EQ(a.classification, b.classification);
}

TEST(Names, RoundTrip) {
    EXPECT_EQ(to_string(Verdict::Marginal), "Marginal");
    EXPECT_EQ(to_string(Classification::Extinct), "Extinct");
    EXPECT_EQ(parse_route(to_string(ClassifyRoute::Averages)), ClassifyRoute::Averages);
    EXPECT_EQ(parse_route("windows"), ClassifyRoute::Windows);
    EXPECT_THROW(parse_route("both"), Error);
}
