#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stochlog/coeff.hpp"
#include "stochlog/hypotheses.hpp"
#include "stochlog/montecarlo.hpp"
#include "stochlog/sde.hpp"

namespace stochlog {

/// Everything a CLI run needs.
struct RunConfig {
    SystemSpec spec;
    /// Set when `spec` came from a built-in example.
    std::optional<int> example_id;
    ScanParams scan;
    double avg_horizon = 10000.0;
    ClassifyRoute route = ClassifyRoute::Windows;
    SimConfig sim;
    EnsembleConfig ensemble;
    std::vector<double> p_list{1.0, 2.0};
    std::string output_dir = ".";

    void validate() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// The four worked examples, ids 1-4.
///
///  1: r = sin t + 2/3,                 a = cos t + 1,                    sigma = sqrt(cos t + 1)
///  2: r = sin t + 1/2,                 a = cos t + 1,                    sigma = sqrt(cos t + 1)
///  3: r = sin(sqrt2 t)+cos(sqrt3 t)+2/3, a = sin(sqrt6 t)+cos(sqrt2 t)+2, sigma = sqrt(cos t + 1)
///  4: as 3 with the constant in r replaced by 1/3
SystemSpec builtin_example(int id);

/// RunConfig defaults for an example: window 2 pi, and the averages route for
/// examples 3 and 4, whose window constants are hard to find by hand.
RunConfig builtin_run_config(int id);

/// Parses the sectioned `key = value` format. Throws ConfigError (with line)
/// for syntax problems and ValidationError for values that break a contract.
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::filesystem::path& path);

/// Serialises in the format parse_config reads; parse_config(write_config(c)) == c.
std::string write_config(const RunConfig& cfg);

}  // namespace stochlog
