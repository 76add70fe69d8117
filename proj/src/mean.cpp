#include "ccm/mean.hpp"

#include <cmath>

namespace ccm {

double RealFunctionOracle::weight_l2() const {
    double ss = 0.0;
    for (double w : weights_) ss += w * w;
    return std::sqrt(ss);
}

double estimate_mean(const RealFunctionOracle& f, const RandomProcess& mu, std::size_t samples,
                     RngStream& rng) {
    if (samples < 1) throw std::invalid_argument("estimate_mean: samples must be >= 1");
    double acc = 0.0;
    for (std::size_t s = 0; s < samples; ++s) acc += f.eval(sample_trajectory(mu, rng));
    return acc / static_cast<double>(samples);
}

std::size_t mean_sample_count(std::size_t n, double eps, double delta) {
    double nn = static_cast<double>(n);
    return static_cast<std::size_t>(
        std::ceil(nn / (eps * eps) * 2.0 * std::log(20.0 / delta)));
}

McdiarmidResult mcdiarmid_map(const Trajectory& x, const RealFunctionOracle& f,
                              const RandomProcess& mu, double eps, double delta, RngStream rng,
                              const McdiarmidOptions& opts) {
    if (!mu.is_product) throw std::invalid_argument("mcdiarmid_map: product measure required");
    if (x.size() != mu.n) throw DimensionError("mcdiarmid_map: point length mismatch");
    if (f.weights().size() != mu.n)
        throw DimensionError("mcdiarmid_map: weight vector length mismatch");
    McdiarmidResult res;
    double a = f.weight_l2();
    if (a == 0.0) {  // constant function as declared, nothing to move
        res.y = x;
        res.eta_hat = f.eval(x);
        res.threshold = res.eta_hat;
        return res;
    }
    RngStream est_rng = rng.child("mean");
    res.eta_hat = opts.eta_override
                      ? *opts.eta_override
                      : estimate_mean(f, mu, mean_sample_count(mu.n, eps, delta), est_rng);
    // Shrink the target by the estimation slack so answers computed with the
    // estimate are sound for the true set.
    res.threshold = res.eta_hat + eps * a - a * eps / 10.0;
    res.mucio_eps = 1.0 - std::exp(-2.0 * eps * eps);

    double threshold = res.threshold;
    MembershipOracle S([&f, threshold](const Trajectory& z) { return f.eval(z) <= threshold; });
    TamperParams tp = average_case_params(mu.n, res.mucio_eps, delta);
    std::shared_ptr<OracleFactory> owned;
    const OracleFactory* oracle = opts.oracle;
    if (opts.oracle_builder) {
        owned = opts.oracle_builder(threshold);
        oracle = owned.get();
    } else if (!oracle) {
        owned = make_mc_oracle(mu, &S, {opts.m_eval, opts.m_max});
        oracle = owned.get();
    }
    TamperTranscript tr = run_tampering(mu, S, *oracle, tp, rng.child("tamper"), &x);
    res.y = tr.v;
    res.budget = tr.budget_used;
    res.aborted = tr.aborted;
    return res;
}

RefineResult refine_to_band(const Trajectory& x, const Trajectory& y,
                            const RealFunctionOracle& f, double band_lo, double band_hi) {
    if (x.size() != y.size()) throw DimensionError("refine_to_band: length mismatch");
    for (double w : f.weights())
        if (w != 1.0)
            throw std::invalid_argument("refine_to_band: unit Lipschitz weights required");
    if (band_hi < band_lo) throw std::invalid_argument("refine_to_band: empty band");
    RefineResult res;
    res.y = y;
    double fy = f.eval(y);
    if (fy >= band_lo && fy <= band_hi) {
        res.in_band = true;
        res.improved = true;
        return res;
    }
    Trajectory z = y;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (z[i] == x[i]) continue;
        z[i] = x[i];
        ++res.reverts;
        double fz = f.eval(z);
        if (fz >= band_lo && fz <= band_hi) {
            res.y = z;
            res.in_band = true;
            res.improved = true;
            return res;
        }
    }
    res.reverts = 0;  // band unreachable along the revert path, keep y
    return res;
}

}  // namespace ccm
