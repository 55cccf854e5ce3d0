#include "stochlog/serialize.hpp"

#include <cmath>
#include <string>

#include "json.hpp"

namespace stochlog {

namespace {

using Json = nlohmann::ordered_json;

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json window_json(const WindowCheckResult& r) {
    Json j;
    j["inf"] = number(r.inf_estimate);
    j["sup"] = number(r.sup_estimate);
    j["verdict"] = std::string(to_string(r.verdict));
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string report_to_json(const HypothesisReport& report) {
    Json j;
    j["h1"] = window_json(report.h1);
    j["h2"] = window_json(report.h2);
    j["h3"] = window_json(report.h3);
    j["avg_rs"] = number(report.avg_rs);
    j["avg_a"] = number(report.avg_a);
    j["classification"] = std::string(to_string(report.classification));
    return dump(j);
}

std::string ensemble_to_json(const EnsembleStats& stats) {
    Json j;
    j["n_paths"] = stats.n_paths;
    j["n_failed"] = stats.n_failed;
    j["failure_rate_exceeded"] = stats.failure_rate_exceeded();
    j["t_end"] = number(stats.t_end);
    j["lln_stat"] = number(stats.lln_stat);
    j["eps_ext"] = number(stats.eps_ext);
    j["p_list"] = Json::array();
    for (double p : stats.p_list) j["p_list"].push_back(number(p));
    j["probes"] = Json::array();
    for (const ProbeStats& probe : stats.probes) {
        Json pj;
        pj["t"] = number(probe.time);
        Json means = Json::array();
        for (double m : probe.mean_xp) means.push_back(number(m));
        pj["mean_xp"] = means;
        Json quantiles;
        for (std::size_t q = 0; q < kQuantileLevels.size(); ++q) {
            quantiles["q" + std::to_string(static_cast<int>(std::lround(kQuantileLevels[q] * 100)))] =
                number(probe.quantiles[q]);
        }
        pj["quantiles"] = quantiles;
        pj["extinct_fraction"] = number(probe.extinct_fraction(stats.eps_ext));
        if (stats.lower_level) pj["tail_above_m"] = number(probe.tail_above(*stats.lower_level));
        if (stats.upper_level) pj["tail_below_M"] = number(probe.tail_below(*stats.upper_level));
        j["probes"].push_back(pj);
    }
    if (stats.lower_level) j["m"] = number(*stats.lower_level);
    if (stats.upper_level) j["M"] = number(*stats.upper_level);
    return dump(j);
}

std::string moment_bound_to_json(const MomentBoundResult& result) {
    Json j;
    j["verdict"] = std::string(to_string(result.verdict));
    j["advisory"] = !result.h1_holds;
    j["p"] = number(result.p);
    j["slack"] = number(result.slack);
    j["running_max"] = number(result.running_max);
    j["bound"] = number(result.bound);
    j["n_failed"] = result.n_failed;
    j["probes"] = Json::array();
    for (const MomentProbe& probe : result.probes) {
        Json pj;
        pj["t"] = number(probe.time);
        pj["mean_xp"] = number(probe.mean_xp);
        pj["limit"] = number(probe.limit);
        pj["counted"] = probe.counted;
        j["probes"].push_back(pj);
    }
    return dump(j);
}

std::string attractivity_to_json(const AttractivityResult& result, double tol) {
    Json j;
    j["n_pairs"] = result.n_pairs;
    j["n_failed"] = result.n_failed;
    j["tol"] = number(tol);
    j["fraction_below"] = number(result.fraction_below(tol));
    Json gaps = Json::array();
    for (double g : result.final_gaps) gaps.push_back(number(g));
    j["final_gaps"] = gaps;
    return dump(j);
}

std::string lln_to_json(const LlnResult& result) {
    Json j;
    j["verdict"] = std::string(to_string(result.verdict));
    j["max_ratio"] = number(result.max_ratio);
    j["bound"] = number(result.bound);
    j["sigma_sup"] = number(result.sigma_sup);
    j["fraction_within"] = number(result.fraction_within);
    j["n_failed"] = result.n_failed;
    return dump(j);
}

}  // namespace stochlog
