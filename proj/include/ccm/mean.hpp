#ifndef CCM_MEAN_HPP
#define CCM_MEAN_HPP

#include <atomic>

#include "ccm/core.hpp"
#include "ccm/tamper.hpp"

namespace ccm {

// A real-valued function with declared per-coordinate Lipschitz weights:
// changing coordinate i moves the value by at most weights[i].
class RealFunctionOracle {
  public:
    RealFunctionOracle(std::function<double(const Trajectory&)> eval,
                       std::vector<double> lipschitz_weights)
        : eval_(std::move(eval)), weights_(std::move(lipschitz_weights)) {}

    double eval(const Trajectory& x) const {
        counter_.fetch_add(1, std::memory_order_relaxed);
        return eval_(x);
    }
    const std::vector<double>& weights() const { return weights_; }
    double weight_l2() const;
    std::uint64_t query_count() const { return counter_.load(std::memory_order_relaxed); }

  private:
    std::function<double(const Trajectory&)> eval_;
    std::vector<double> weights_;
    mutable std::atomic<std::uint64_t> counter_{0};
};

double estimate_mean(const RealFunctionOracle& f, const RandomProcess& mu, std::size_t samples,
                     RngStream& rng);

// Sample count sized so the mean estimate is within eps/10 of the truth with
// comfortable margin at the stated failure tolerance.
std::size_t mean_sample_count(std::size_t n, double eps, double delta);

struct McdiarmidOptions {
    std::size_t m_eval = 200;  // Monte-Carlo oracle knobs (ignored with a custom factory)
    std::size_t m_max = 4;
    const OracleFactory* oracle = nullptr;  // optional analytic oracle for the target set
    // Builds an oracle once the set threshold is known (wins over `oracle`).
    std::function<std::shared_ptr<OracleFactory>(double threshold)> oracle_builder;
    std::optional<double> eta_override;  // skip mean estimation (testing hook)
};

struct McdiarmidResult {
    Trajectory y;
    double eta_hat = 0.0;     // estimated mean
    double threshold = 0.0;   // f-threshold of the (shrunken) target set
    double mucio_eps = 0.0;   // measure lower bound fed to the tampering engine
    double budget = 0.0;
    bool aborted = false;
};

// Maps x to a nearby point y with f(y) <= eta + eps * ||weights||_2, with
// probability >= 1 - delta over x and internal randomness.
McdiarmidResult mcdiarmid_map(const Trajectory& x, const RealFunctionOracle& f,
                              const RandomProcess& mu, double eps, double delta, RngStream rng,
                              const McdiarmidOptions& opts = {});

struct RefineResult {
    Trajectory y;
    bool in_band = false;
    bool improved = false;  // false means the band was unreachable on the revert path
    std::size_t reverts = 0;
};

// Coordinate-revert walk from y back toward x (unit Lipschitz weights only):
// reverts differing coordinates one at a time and returns the first point
// whose value lies in [band_lo, band_hi].
RefineResult refine_to_band(const Trajectory& x, const Trajectory& y,
                            const RealFunctionOracle& f, double band_lo, double band_hi);

}  // namespace ccm

#endif
