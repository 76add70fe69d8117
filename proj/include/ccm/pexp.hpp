#ifndef CCM_PEXP_HPP
#define CCM_PEXP_HPP

#include <memory>
#include <utility>

#include "ccm/core.hpp"

namespace ccm {

enum class OracleMode { Exact, ThresholdAnalytic, MonteCarlo };
// Cubic: conservative 1/gamma^3 sizing; Hoeffding: two-sided tail bound at
// additive accuracy gamma * e^{-tau} * eps_root / 2.
enum class SizingMode { Cubic, Hoeffding };

struct OracleBudget {
    std::size_t m_eval = 1;  // completions per partial-expectation estimate
    std::size_t m_max = 1;   // candidate blocks per maximizing-block call
};

// Sample counts for the Monte-Carlo oracle at accuracy gamma above the abort
// threshold e^{-tau} * eps_root.
OracleBudget oracle_sample_counts(double gamma, double tau, double eps_root, SizingMode sizing);

// One tampering run's view of the partial-expectation oracle.  Estimates are
// cached per prefix, so within a run a prefix has exactly one value.
class RunOracle {
  public:
    virtual ~RunOracle() = default;
    // Estimate of the partial expectation of the set indicator given a prefix
    // of any length; on a full trajectory this is the exact indicator value.
    virtual double eval(const Trajectory& prefix) = 0;
    // Maximizing next-block value and the estimate f*, clamped so that
    // f* >= eval(prefix) always holds.
    virtual std::pair<double, double> max_block(const Trajectory& prefix) = 0;
    virtual OracleMode mode() const = 0;
};

class OracleFactory {
  public:
    virtual ~OracleFactory() = default;
    virtual std::unique_ptr<RunOracle> make_run(RngStream rng) const = 0;
    virtual OracleMode mode() const = 0;
};

// Threshold sets {x : sum_i w_i x_i >= t} (or <= t) over independent binary
// blocks; each block takes values[i].first or values[i].second, the latter
// with probability p_hi[i].  w_i * (hi - lo) must be an integer so the
// remaining-sum distribution lives on an integer lattice.
struct ThresholdSpec {
    std::size_t n = 0;
    std::vector<double> weights;
    std::vector<std::pair<double, double>> values;  // (lo, hi) per block
    std::vector<double> p_hi;
    double t = 0.0;
    bool ge = true;  // false: set is {sum <= t}

    static ThresholdSpec fair_sum_ge(std::size_t n, double t);
    static ThresholdSpec fair_sum_le(std::size_t n, double t);
    // {z in {-1,1}^n : sum a_i z_i <= 0}
    static ThresholdSpec halfspace_le0(const std::vector<double>& coeffs);

    RandomProcess process() const;
    MembershipOracle membership() const;
    bool in_set(const Trajectory& x) const;
};

// Exact measure / partial expectation for a threshold set, via suffix DP
// convolution (absolute error well below 1e-12).
double threshold_partial_expectation(const ThresholdSpec& spec, const Trajectory& prefix);
double threshold_measure(const ThresholdSpec& spec);

// Exact partial expectation by recursive enumeration of completions.
double exact_partial_expectation(const RandomProcess& p, const MembershipOracle& f,
                                 const Trajectory& prefix, std::size_t cap = (1u << 20));

// Monte-Carlo partial expectation: mean of the indicator over m_eval
// completions; costs exactly m_eval membership queries.
double mc_partial_expectation(const RandomProcess& p, const MembershipOracle& f,
                              const Trajectory& prefix, std::size_t m_eval, RngStream& rng);

// Samples m_max candidate next blocks, evaluates the supplied estimator on
// each extension, and returns the argmax candidate (first sampled wins ties)
// with its estimate clamped up to the prefix estimate.
std::pair<double, double> approx_max_block(
    const RandomProcess& p, const std::function<double(const Trajectory&)>& eval,
    const Trajectory& prefix, std::size_t m_max, RngStream& rng);

struct Condition1Audit {
    std::size_t checked = 0;  // sampled prefixes above the abort threshold
    std::size_t ok = 0;       // |ln f_tilde - ln f_hat| <= gamma held
};

// Compares fresh Monte-Carlo estimates against exact enumeration on sampled
// prefixes with exact partial expectation >= e^{-tau} * measure.
Condition1Audit audit_condition1(const RandomProcess& p, const MembershipOracle& f,
                                 OracleBudget budget, double gamma, double tau,
                                 std::size_t prefixes, RngStream rng);

struct Condition3Audit {
    std::vector<double> violation_rate;  // per sampled prefix
    std::vector<double> bound;           // 2 * gamma * f_tilde(prefix)
};

// Estimates Pr over honest next blocks of f_tilde(prefix, u) > f_star(prefix).
Condition3Audit audit_condition3(const RandomProcess& p, const MembershipOracle& f,
                                 OracleBudget budget, double gamma, std::size_t prefixes,
                                 std::size_t draws, RngStream rng);

// Factories.  The membership oracle must outlive the factory and its runs.
std::shared_ptr<OracleFactory> make_exact_oracle(RandomProcess p, const MembershipOracle* f,
                                                 std::size_t cap = (1u << 20));
std::shared_ptr<OracleFactory> make_threshold_oracle(ThresholdSpec spec);
std::shared_ptr<OracleFactory> make_mc_oracle(RandomProcess p, const MembershipOracle* f,
                                              OracleBudget budget);

}  // namespace ccm

#endif
