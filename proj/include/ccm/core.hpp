#ifndef CCM_CORE_HPP
#define CCM_CORE_HPP

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccm/rng.hpp"

namespace ccm {

// A trajectory is the realized block sequence.  Finite-domain blocks hold one
// of the domain's listed values; real blocks hold doubles (treated as discrete
// at representable-value granularity for distance accounting).
using Trajectory = std::vector<double>;

struct ContractViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct BlockDomain {
    enum class Kind { Finite, Real };
    Kind kind = Kind::Finite;
    std::vector<double> values;  // ordered, non-empty, duplicate-free (finite only)

    static BlockDomain finite(std::vector<double> vals);
    static BlockDomain real() {
        BlockDomain d;
        d.kind = Kind::Real;
        return d;
    }
    bool contains(double v) const;
};

// (value, conditional probability) pairs for one block given a prefix.
using SupportList = std::vector<std::pair<double, double>>;

struct RandomProcess {
    std::size_t n = 0;
    std::vector<BlockDomain> domains;  // size n
    // Samples block prefix.size() given the prefix.
    std::function<double(const Trajectory& prefix, RngStream& rng)> sampler;
    // Optional: lists the positive-probability values of the next block.
    std::function<SupportList(const Trajectory& prefix)> support_enumerator;
    bool is_product = false;

    bool finite() const {
        for (const auto& d : domains)
            if (d.kind != BlockDomain::Kind::Finite) return false;
        return true;
    }
};

class MembershipOracle {
  public:
    explicit MembershipOracle(std::function<bool(const Trajectory&)> test)
        : test_(std::move(test)) {}

    bool test(const Trajectory& x) const {
        counter_.fetch_add(1, std::memory_order_relaxed);
        return test_(x);
    }
    std::uint64_t query_count() const { return counter_.load(std::memory_order_relaxed); }

  private:
    std::function<bool(const Trajectory&)> test_;
    mutable std::atomic<std::uint64_t> counter_{0};
};

struct WeightVector {
    std::vector<double> alpha;

    // Validates sum of squares == n (relative tolerance 1e-9) and alpha >= 0.
    static WeightVector make(std::vector<double> alpha);
    static WeightVector uniform(std::size_t n);
    std::size_t size() const { return alpha.size(); }
    double operator[](std::size_t i) const { return alpha[i]; }
    double l2_norm() const;
};

enum class StepCase : std::uint8_t { Abort = 0, Case1 = 1, Case2 = 2, Case3 = 3 };

struct TamperTranscript {
    Trajectory u;  // honest blocks
    Trajectory v;  // final blocks
    std::vector<bool> tampered;
    std::vector<StepCase> case_taken;
    double budget_used = 0.0;  // weighted Hamming units
    bool aborted = false;
    bool success = false;
    // Estimates recorded per step for invariant audits; NaN once the engine
    // has permanently stopped consulting the oracle.
    std::vector<double> f_prev, f_star, f_ext, f_next;
    std::uint64_t membership_queries = 0;
};

double weighted_hamming(const Trajectory& u, const Trajectory& v, const WeightVector& alpha);

Trajectory sample_trajectory(const RandomProcess& p, RngStream& rng);

struct SupportEntry {
    Trajectory point;
    double probability;
};

// Every trajectory over the cartesian product of the block domains with its
// exact probability (entries of probability zero included for non-product
// processes).  Requires finite domains and total size <= cap.
std::vector<SupportEntry> enumerate_support(const RandomProcess& p,
                                            std::size_t cap = (1u << 20));

// JSON serialization of a trajectory: finite-domain values by index into the
// ordered value list, reals as exactly round-tripping decimal strings.
std::string trajectory_to_json(const RandomProcess& p, const Trajectory& t);
Trajectory trajectory_from_json(const RandomProcess& p, const std::string& json);

// Common process constructors.
RandomProcess fair_bits(std::size_t n);                       // {0,1} uniform
RandomProcess biased_bits(std::size_t n, double p_one);       // {0,1}
RandomProcess signed_bits(std::size_t n);                     // {-1,+1} uniform
RandomProcess iid_finite(std::size_t n, std::vector<double> values, std::vector<double> probs);
RandomProcess gaussian_iid(std::size_t n, double sigma);
// Gaussian truncated to |x| <= c per coordinate.
RandomProcess truncated_gaussian_iid(std::size_t n, double sigma, double c);

}  // namespace ccm

#endif
