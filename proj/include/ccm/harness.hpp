#ifndef CCM_HARNESS_HPP
#define CCM_HARNESS_HPP

#include <string>

#include <json.hpp>

#include "ccm/stats.hpp"

namespace ccm {

// Experiment kinds: tamper, oracle-check, reduce-l1, gauss-l2, sphere,
// mcdiarmid, cointoss, lowerbound.  `params` holds the kind-specific knobs.
struct ExperimentConfig {
    std::string kind;
    nlohmann::json params = nlohmann::json::object();
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::string output_path;  // empty: in-memory result only

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

struct TrialRecord {
    std::size_t index = 0;
    bool success = false;
    double budget = 0.0;
    bool aborted = false;
    std::uint64_t queries = 0;
    double displacement = 0.0;
    double wall_ms = 0.0;
    nlohmann::json extra = nlohmann::json::object();
};

struct ExperimentResult {
    std::vector<TrialRecord> records;
    nlohmann::json summary;
    std::string jsonl;  // one line per trial plus a summary line
};

// Runs all trials with per-trial derived randomness; identical (config, seed)
// give byte-identical output.  Wall-time fields are emitted only when
// include_wall is set and carry no determinism guarantee.
ExperimentResult run_experiment(const ExperimentConfig& config, bool include_wall = true);

WilsonInterval summarize(std::size_t successes, std::size_t trials);

struct SweepPoint {
    std::size_t n = 0;
    double x = 0.0;  // sqrt(n * ln(1/(eps*delta)))
    double mean_budget = 0.0;
    double residual = 0.0;
};

struct SweepReport {
    double slope = 0.0;  // least squares through the origin
    std::vector<SweepPoint> points;
    nlohmann::json to_json() const;
};

SweepReport scaling_sweep(const ExperimentConfig& base, const std::vector<std::size_t>& ns,
                          bool include_wall = true);

}  // namespace ccm

#endif
