#pragma once

#include <numbers>
#include <string_view>

#include "stochlog/coeff.hpp"

namespace stochlog {

/// Finite-grid proxy for liminf/limsup over t of a sliding-window integral.
struct ScanParams {
    double window = 2.0 * std::numbers::pi;
    double scan_start = 0.0;
    double scan_end = 500.0;
    double scan_step = 0.1;
    QuadratureParams quad;
    /// Estimates within +/- margin of zero are undecidable for strict inequalities.
    double margin = 1e-6;

    void validate() const;

    friend bool operator==(const ScanParams&, const ScanParams&) = default;
};

enum class Verdict { Holds, Fails, Marginal };

struct WindowCheckResult {
    double inf_estimate = 0.0;
    double sup_estimate = 0.0;
    double argmin_t = 0.0;
    double argmax_t = 0.0;
    Verdict verdict = Verdict::Fails;
};

enum class Classification { Permanent, Extinct, Indeterminate };

/// Which criterion produced the classification.
enum class DecidedBy { Windows, Averages, Undecided };

/// How classify() may use the long-run averages.
enum class ClassifyRoute {
    /// Window hypotheses decide; averages only break ties when H1 or H2 is Marginal.
    Windows,
    /// Averages decide whenever the window hypotheses are inconclusive.
    Averages,
};

struct HypothesisReport {
    WindowCheckResult h1;
    WindowCheckResult h2;
    WindowCheckResult h3;
    double avg_rs = 0.0;
    double avg_a = 0.0;
    Classification classification = Classification::Indeterminate;
    DecidedBy decided_by = DecidedBy::Undecided;
};

/// min/max over the scan grid of window_integral(integrand, t, p.window). Windows are
/// slid by adding and removing scan_step-wide strips, so values agree with direct
/// integration up to rounding.
WindowCheckResult scan_window(const CoeffExpr& integrand, const ScanParams& p);

/// liminf of the window integral of a(t) is positive.
WindowCheckResult check_H1(const SystemSpec& spec, const ScanParams& p);

/// liminf of the window integral of r - sigma^2/2 is positive.
WindowCheckResult check_H2(const SystemSpec& spec, const ScanParams& p);

/// limsup of the window integral of r - sigma^2/2 is nonpositive.
/// The inequality is non-strict, so a sup within the margin counts as Holds.
WindowCheckResult check_H3(const SystemSpec& spec, const ScanParams& p);

struct AverageCriteria {
    double avg_rs = 0.0;
    double avg_a = 0.0;
};

/// Long-run averages of r - sigma^2/2 and of a over [0, horizon].
AverageCriteria check_avg_criteria(const SystemSpec& spec, double horizon, const QuadratureParams& q = {});

/// Classifies the system as permanent, extinct or indeterminate.
///
/// Window rules come first: H1 and H2 give Permanent, H1 and H3 (without H2)
/// give Extinct. When those are inconclusive the long-run averages decide if
/// `route` is Averages or either of H1/H2 came out Marginal: positive average
/// growth with positive average competition is Permanent, negative average
/// growth with positive average competition is Extinct.
HypothesisReport classify(const SystemSpec& spec, const ScanParams& p, double horizon,
                          ClassifyRoute route = ClassifyRoute::Windows);

std::string_view to_string(Verdict v);
std::string_view to_string(Classification c);
std::string_view to_string(DecidedBy d);
std::string_view to_string(ClassifyRoute r);
ClassifyRoute parse_route(std::string_view text);

}  // namespace stochlog
