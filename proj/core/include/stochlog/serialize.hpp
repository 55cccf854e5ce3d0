#pragma once

#include <string>

#include "stochlog/hypotheses.hpp"
#include "stochlog/montecarlo.hpp"

namespace stochlog {

// JSON documents with a fixed key order. Non-finite numbers become null.

/// {"h1": {inf, sup, verdict}, "h2": ..., "h3": ..., "avg_rs", "avg_a", "classification"}
std::string report_to_json(const HypothesisReport& report);

std::string ensemble_to_json(const EnsembleStats& stats);

std::string moment_bound_to_json(const MomentBoundResult& result);

std::string attractivity_to_json(const AttractivityResult& result, double tol);

std::string lln_to_json(const LlnResult& result);

}  // namespace stochlog
