#ifndef CCM_ADVERSARIAL_HPP
#define CCM_ADVERSARIAL_HPP

#include <array>

#include "ccm/core.hpp"
#include "ccm/stats.hpp"
#include "ccm/tamper.hpp"

namespace ccm {

struct CoinTossProtocol {
    RandomProcess messages;  // one block per party, in speaking order
    std::function<int(const Trajectory&)> output;  // transcript -> {0, 1}
};

// Majority of n one-bit messages; ties (even n) count as 1.
CoinTossProtocol majority_protocol(std::size_t n);

struct CoinTossAttack {
    TamperTranscript transcript;
    std::vector<std::size_t> corrupted;  // parties whose message was replaced
    int output_bit = 0;
};

// Strong adaptive corruption: the attacker sees each party's honest message
// before deciding whether to corrupt that party (one tampering run with
// f = indicator of the target output).
CoinTossAttack strong_adaptive_cointoss_attack(const CoinTossProtocol& protocol,
                                               const OracleFactory& oracle,
                                               const TamperParams& params, int target_bit,
                                               RngStream rng);

using BiasAttacker = std::function<int(RngStream)>;  // trial randomness -> output bit

WilsonInterval measure_bias(const CoinTossProtocol& protocol, const BiasAttacker* attacker,
                            std::size_t trials, RngStream rng);

struct HalfSpace {
    std::vector<double> a;  // coefficients in {-1, +1}

    bool contains(const Trajectory& z) const;  // sum a_i z_i <= 0
    double margin(const Trajectory& z) const;  // sum a_i z_i
    MembershipOracle membership() const;
};

HalfSpace random_halfspace(std::size_t n, RngStream& rng);

struct QueryAttackResult {
    bool success = false;
    Trajectory hit;  // empty when no S-member was found
    std::uint64_t queries = 0;
};

// Queries x, then m points each obtained by flipping a uniformly random
// size-r subset of coordinates (sign flips over {-1,+1}).
QueryAttackResult iid_query_attack(const Trajectory& x, const MembershipOracle& S, std::size_t m,
                                   std::size_t r, RngStream& rng);

using QueryListGenerator =
    std::function<std::vector<Trajectory>(const Trajectory& x, RngStream& rng)>;

// Generates the entire query list before touching the membership oracle
// (verified via the query counter), then queries in order.
QueryAttackResult nonadaptive_attack(const Trajectory& x, const MembershipOracle& S,
                                     const QueryListGenerator& gen, RngStream rng);

struct LowerboundOptions {
    double eps = 0.5;
    double delta = 0.1;
    double cap_factor = 3.0;   // budget cap = cap_factor * sqrt(n ln(1/(eps delta)))
    std::size_t m_eval = 64;   // Monte-Carlo oracle knobs for the MUCIO arm
    std::size_t m_max = 4;
};

struct LowerboundTrial {
    bool iid_success = false;
    bool mucio_success = false;
    double mucio_budget = 0.0;
    std::uint64_t mucio_queries = 0;
    double frac_outside_ball = 0.0;  // membership queries beyond the output radius
    double start_margin = 0.0;       // sum a_i x_i of the honest start
};

struct LowerboundReport {
    std::size_t trials = 0;
    std::size_t iid_successes = 0;
    std::size_t mucio_successes = 0;
    double min_frac_outside_ball = 1.0;
    double mean_mucio_budget = 0.0;
    // Trials bucketed by positive starting margin: [0,10), [10,20), [20,40), [40,inf).
    std::array<std::size_t, 4> margin_bucket_trials{};
    std::array<std::size_t, 4> margin_bucket_iid_hits{};
    std::vector<LowerboundTrial> per_trial;
};

LowerboundTrial lowerbound_trial(std::size_t n, double radius_exp, std::size_t m, RngStream rng,
                                 const LowerboundOptions& opts = {});

LowerboundReport lowerbound_experiment(std::size_t n, double radius_exp, std::size_t m,
                                       std::size_t trials, RngStream rng,
                                       const LowerboundOptions& opts = {});

}  // namespace ccm

#endif
