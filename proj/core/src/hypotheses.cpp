#include "stochlog/hypotheses.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "compensated_sum.hpp"
#include "stochlog/error.hpp"

namespace stochlog {

void ScanParams::validate() const {
    if (!(window > 0.0)) throw ValidationError("scan window must be > 0");
    if (!(scan_start < scan_end)) throw ValidationError("scan_start must be < scan_end");
    if (!(scan_step > 0.0)) throw ValidationError("scan_step must be > 0");
    if (!(margin >= 0.0)) throw ValidationError("margin must be >= 0");
    quad.validate();
}

WindowCheckResult scan_window(const CoeffExpr& integrand, const ScanParams& p) {
    p.validate();
    WindowCheckResult out;
    const auto n = static_cast<std::int64_t>(std::floor((p.scan_end - p.scan_start) / p.scan_step + 1e-9));

    // Consecutive windows share most of their support, so slide instead of
    // re-integrating: I(s_k) = I(s_0) + (integral over [s_0 + w, s_k + w]) - (integral over [s_0, s_k]).
    const double first_window = window_integral(integrand, p.scan_start, p.window, p.quad);
    detail::CompensatedSum lead;
    detail::CompensatedSum trail;
    double prev = p.scan_start;
    for (std::int64_t i = 0; i <= n; ++i) {
        const double t = p.scan_start + static_cast<double>(i) * p.scan_step;
        if (i > 0) {
            const double width = t - prev;
            lead.add(window_integral(integrand, prev + p.window, width, p.quad));
            trail.add(window_integral(integrand, prev, width, p.quad));
            prev = t;
        }
        const double v = first_window + (lead.value() - trail.value());
        if (i == 0 || v < out.inf_estimate) {
            out.inf_estimate = v;
            out.argmin_t = t;
        }
        if (i == 0 || v > out.sup_estimate) {
            out.sup_estimate = v;
            out.argmax_t = t;
        }
    }
    return out;
}

namespace {

Verdict strict_positive(double estimate, double margin) {
    if (std::abs(estimate) <= margin) return Verdict::Marginal;
    return estimate > margin ? Verdict::Holds : Verdict::Fails;
}

WindowCheckResult with_liminf_verdict(WindowCheckResult r, double margin) {
    r.verdict = strict_positive(r.inf_estimate, margin);
    return r;
}

WindowCheckResult with_limsup_verdict(WindowCheckResult r, double margin) {
    r.verdict = r.sup_estimate <= margin ? Verdict::Holds : Verdict::Fails;
    return r;
}

}  // namespace

WindowCheckResult check_H1(const SystemSpec& spec, const ScanParams& p) {
    return with_liminf_verdict(scan_window(spec.a, p), p.margin);
}

WindowCheckResult check_H2(const SystemSpec& spec, const ScanParams& p) {
    return with_liminf_verdict(scan_window(spec.log_growth_rate(), p), p.margin);
}

WindowCheckResult check_H3(const SystemSpec& spec, const ScanParams& p) {
    return with_limsup_verdict(scan_window(spec.log_growth_rate(), p), p.margin);
}

AverageCriteria check_avg_criteria(const SystemSpec& spec, double horizon, const QuadratureParams& q) {
    return {long_run_average(spec.log_growth_rate(), horizon, q), long_run_average(spec.a, horizon, q)};
}

HypothesisReport classify(const SystemSpec& spec, const ScanParams& p, double horizon, ClassifyRoute route) {
    HypothesisReport report;
    report.h1 = check_H1(spec, p);
    // H2 and H3 share the same scan.
    const WindowCheckResult growth = scan_window(spec.log_growth_rate(), p);
    report.h2 = with_liminf_verdict(growth, p.margin);
    report.h3 = with_limsup_verdict(growth, p.margin);

    const AverageCriteria avg = check_avg_criteria(spec, horizon, p.quad);
    report.avg_rs = avg.avg_rs;
    report.avg_a = avg.avg_a;

    const bool h1 = report.h1.verdict == Verdict::Holds;
    const bool h2 = report.h2.verdict == Verdict::Holds;
    const bool h3 = report.h3.verdict == Verdict::Holds;
    if (h1 && h2) {
        report.classification = Classification::Permanent;
        report.decided_by = DecidedBy::Windows;
        return report;
    }
    if (h1 && h3) {
        report.classification = Classification::Extinct;
        report.decided_by = DecidedBy::Windows;
        return report;
    }

    const bool marginal = report.h1.verdict == Verdict::Marginal || report.h2.verdict == Verdict::Marginal;
    if (route == ClassifyRoute::Averages || marginal) {
        if (report.avg_a > p.margin && report.avg_rs > p.margin) {
            report.classification = Classification::Permanent;
            report.decided_by = DecidedBy::Averages;
        } else if (report.avg_a > p.margin && report.avg_rs < -p.margin) {
            report.classification = Classification::Extinct;
            report.decided_by = DecidedBy::Averages;
        }
    }
    return report;
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "Holds";
        case Verdict::Fails: return "Fails";
        case Verdict::Marginal: return "Marginal";
    }
    return "";
}

std::string_view to_string(Classification c) {
    switch (c) {
        case Classification::Permanent: return "Permanent";
        case Classification::Extinct: return "Extinct";
        case Classification::Indeterminate: return "Indeterminate";
    }
    return "";
}

std::string_view to_string(DecidedBy d) {
    switch (d) {
        case DecidedBy::Windows: return "windows";
        case DecidedBy::Averages: return "averages";
        case DecidedBy::Undecided: return "undecided";
    }
    return "";
}

std::string_view to_string(ClassifyRoute r) {
    return r == ClassifyRoute::Windows ? "windows" : "averages";
}

ClassifyRoute parse_route(std::string_view text) {
    if (text == "windows") return ClassifyRoute::Windows;
    if (text == "averages") return ClassifyRoute::Averages;
    throw ValidationError("unknown route '" + std::string(text) + "' (expected windows or averages)");
}

}  // namespace stochlog
