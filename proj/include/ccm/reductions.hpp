#ifndef CCM_REDUCTIONS_HPP
#define CCM_REDUCTIONS_HPP

#include "ccm/core.hpp"
#include "ccm/tamper.hpp"

namespace ccm {

struct MetricProbabilitySpace {
    std::function<double(const Trajectory&, const Trajectory&)> metric;
    std::function<Trajectory(RngStream&)> sampler;
};

// A pair of randomized mappings between two metric probability spaces with
// probability-embedding closeness alpha, Lipschitz factor w, additive slack b.
struct CCReduction {
    std::function<Trajectory(const Trajectory&, RngStream&)> f;  // space1 -> space2
    std::function<Trajectory(const Trajectory&, RngStream&)> g;  // space2 -> space1
    double alpha = 0.0;
    double b = 0.0;
    double w = 1.0;
};

// Gaussian (dimension n, per-coordinate standard deviation 1/2) <-> boolean
// cube of dimension n^2.  Coordinate i is quantized to the count lattice
// (2a - n) / (2 sqrt n), a in [0, n]; block i of the cube image has exactly a
// ones at random positions.  Any coordinate of magnitude >= sqrt(n)/2 maps
// the whole vector to all-zeros.  The reverse map draws the coordinate from
// the Gaussian conditioned on the full width-1/sqrt(n) cell centered at the
// block count's lattice point.
class GaussCube {
  public:
    explicit GaussCube(std::size_t n);

    std::size_t dim_gauss() const { return n_; }
    std::size_t dim_cube() const { return n_ * n_; }
    double sigma() const { return 0.5; }
    double lipschitz_w() const;          // 1 / sqrt(n)
    double roundtrip_slack() const;      // sqrt(n) / 2

    Trajectory to_cube(const Trajectory& x, RngStream& rng) const;
    Trajectory to_gauss(const Trajectory& y, RngStream& rng) const;
    // Quantized count for one coordinate, before clamping logic.
    long long count_of(double x) const;

    CCReduction reduction() const;

  private:
    std::size_t n_;
    std::vector<double> cell_cdf_;  // CDF at cell boundaries, size n + 2
};

// Free-function forms; dimensions are inferred (n from the input for f, a
// perfect square for g).
Trajectory gauss_to_cube(const Trajectory& x, RngStream& rng);
Trajectory cube_to_gauss(const Trajectory& y, RngStream& rng);

using InnerAttack =
    std::function<Trajectory(const MembershipOracle& set2, const Trajectory& x2, RngStream& rng)>;

// Lifts an attack across a reduction: push x1 through red.f, run the inner attack
// against S' = {y : Pr[g(y) in S] >= 1/2} (approximated by an m_g-vote
// majority with early stopping), then pull the result back with up to
// out_draws g-draws, returning the first draw in S (else the last).
Trajectory lift_attack(const CCReduction& red, const InnerAttack& inner,
                       const MembershipOracle& S, const Trajectory& x1, std::size_t m_g,
                       std::size_t out_draws, RngStream rng);

std::size_t default_majority_votes(std::size_t n, double delta);

struct AttackResult {
    Trajectory y;
    bool success = false;
    double displacement = 0.0;  // metric of the target space
    double budget = 0.0;        // inner tampering budget (Hamming units)
    std::uint64_t queries = 0;
    bool aborted = false;
};

struct GaussAttackOptions {
    double sigma = 1.0;       // isotropic standard deviation of the reference Gaussian
    std::size_t m_eval = 48;  // Monte-Carlo oracle knobs for the inner attack
    std::size_t m_max = 4;
};

// Gaussian l1 concentration via the cube embedding with MUCIO inside
// (worst-case parameters on the n^2-dimensional cube).
AttackResult gaussian_l1_attack(const MembershipOracle& S, double eps, double delta,
                                const Trajectory& x, RngStream rng,
                                const GaussAttackOptions& opts = {});

// Gaussian l2 concentration by tampering the n real coordinates directly
// inside the clamp window C = sigma * sqrt(2 ln(4n / min(eps, delta))).
AttackResult gaussian_l2_attack(const MembershipOracle& S, double eps, double delta,
                                const Trajectory& x, RngStream rng,
                                const GaussAttackOptions& opts = {});

// Unit-sphere concentration via the radial lift r = ||z||, z standard normal.
AttackResult sphere_attack(const MembershipOracle& S_sphere, double eps, double delta,
                           const Trajectory& x_unit, RngStream rng,
                           const GaussAttackOptions& opts = {});

// Band half-width coefficient c such that ||z|| falls in
// [sqrt n - c n^{1/4}, sqrt n + c n^{1/4}] with probability >= 1 - q.
double radial_band_constant(std::size_t n, double q);

double l1_distance(const Trajectory& a, const Trajectory& b);
double l2_distance(const Trajectory& a, const Trajectory& b);

}  // namespace ccm

#endif
