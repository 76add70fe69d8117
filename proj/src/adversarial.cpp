#include "ccm/adversarial.hpp"

#include <cmath>
#include <numeric>

namespace ccm {

CoinTossProtocol majority_protocol(std::size_t n) {
    CoinTossProtocol proto;
    proto.messages = fair_bits(n);
    proto.output = [n](const Trajectory& m) {
        double s = 0.0;
        for (double b : m) s += b;
        return s >= static_cast<double>(n) / 2.0 ? 1 : 0;
    };
    return proto;
}

CoinTossAttack strong_adaptive_cointoss_attack(const CoinTossProtocol& protocol,
                                               const OracleFactory& oracle,
                                               const TamperParams& params, int target_bit,
                                               RngStream rng) {
    MembershipOracle f(
        [&protocol, target_bit](const Trajectory& m) { return protocol.output(m) == target_bit; });
    CoinTossAttack atk;
    atk.transcript = run_tampering(protocol.messages, f, oracle, params, rng);
    for (std::size_t i = 0; i < atk.transcript.tampered.size(); ++i)
        if (atk.transcript.tampered[i]) atk.corrupted.push_back(i);
    atk.output_bit = protocol.output(atk.transcript.v);
    return atk;
}

WilsonInterval measure_bias(const CoinTossProtocol& protocol, const BiasAttacker* attacker,
                            std::size_t trials, RngStream rng) {
    if (trials < 1) throw std::invalid_argument("measure_bias: trials must be >= 1");
    std::size_t ones = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        RngStream trial_rng = rng.child(t);
        int bit;
        if (attacker) {
            bit = (*attacker)(trial_rng);
        } else {
            bit = protocol.output(sample_trajectory(protocol.messages, trial_rng));
        }
        if (bit == 1) ++ones;
    }
    return wilson_interval(ones, trials);
}

bool HalfSpace::contains(const Trajectory& z) const { return margin(z) <= 1e-9; }

double HalfSpace::margin(const Trajectory& z) const {
    if (z.size() != a.size()) throw DimensionError("HalfSpace: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * z[i];
    return s;
}

MembershipOracle HalfSpace::membership() const {
    HalfSpace copy = *this;
    return MembershipOracle([copy](const Trajectory& z) { return copy.contains(z); });
}

HalfSpace random_halfspace(std::size_t n, RngStream& rng) {
    HalfSpace hs;
    hs.a.resize(n);
    for (std::size_t i = 0; i < n; ++i) hs.a[i] = (rng.next_u64() & 1u) ? 1.0 : -1.0;
    return hs;
}

QueryAttackResult iid_query_attack(const Trajectory& x, const MembershipOracle& S, std::size_t m,
                                   std::size_t r, RngStream& rng) {
    if (r > x.size()) throw std::invalid_argument("iid_query_attack: radius exceeds dimension");
    QueryAttackResult res;
    res.queries = 1;
    if (S.test(x)) {
        res.success = true;
        res.hit = x;
        return res;
    }
    std::vector<std::size_t> idx(x.size());
    Trajectory z;
    for (std::size_t q = 0; q < m; ++q) {
        std::iota(idx.begin(), idx.end(), 0);
        z = x;
        for (std::size_t j = 0; j < r; ++j) {
            std::size_t k = j + static_cast<std::size_t>(rng.uniform_below(idx.size() - j));
            std::swap(idx[j], idx[k]);
            z[idx[j]] = -z[idx[j]];
        }
        ++res.queries;
        if (S.test(z)) {
            res.success = true;
            res.hit = z;
            return res;
        }
    }
    return res;
}

QueryAttackResult nonadaptive_attack(const Trajectory& x, const MembershipOracle& S,
                                     const QueryListGenerator& gen, RngStream rng) {
    std::uint64_t before = S.query_count();
    std::vector<Trajectory> list = gen(x, rng);
    if (S.query_count() != before)
        throw ContractViolation("nonadaptive_attack: list generator queried the oracle");
    QueryAttackResult res;
    for (const auto& z : list) {
        ++res.queries;
        if (S.test(z)) {
            res.success = true;
            res.hit = z;
            return res;
        }
    }
    return res;
}

static std::size_t unweighted_hd(const Trajectory& a, const Trajectory& b) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) ++d;
    return d;
}

LowerboundTrial lowerbound_trial(std::size_t n, double radius_exp, std::size_t m, RngStream rng,
                                 const LowerboundOptions& opts) {
    LowerboundTrial trial;
    RngStream hs_rng = rng.child("halfspace");
    RngStream x_rng = rng.child("start");
    RngStream iid_rng = rng.child("iid");

    HalfSpace hs = random_halfspace(n, hs_rng);
    RandomProcess proc = signed_bits(n);
    Trajectory x = sample_trajectory(proc, x_rng);
    trial.start_margin = hs.margin(x);

    auto r = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), radius_exp)));
    MembershipOracle S_iid = hs.membership();
    trial.iid_success = iid_query_attack(x, S_iid, m, r, iid_rng).success;

    std::vector<std::uint32_t> dists;
    dists.reserve(4096);
    MembershipOracle S_rec([&hs, &x, &dists](const Trajectory& z) {
        dists.push_back(static_cast<std::uint32_t>(unweighted_hd(x, z)));
        return hs.contains(z);
    });
    TamperParams tp;
    tp.eps = opts.eps;
    tp.delta = opts.delta;
    tp.lambda = std::sqrt(2.0 * std::log(1.0 / opts.eps) / static_cast<double>(n));
    tp.k_cap = opts.cap_factor *
               std::sqrt(static_cast<double>(n) * std::log(1.0 / (opts.eps * opts.delta)));
    tp.mode = TamperMode::Multiplicative;
    tp.alpha = WeightVector::uniform(n);
    auto oracle = make_mc_oracle(proc, &S_rec, {opts.m_eval, opts.m_max});
    TamperTranscript tr = run_tampering(proc, S_rec, *oracle, tp, rng.child("mucio"), &x);

    trial.mucio_success = tr.success;
    trial.mucio_budget = tr.budget_used;
    trial.mucio_queries = tr.membership_queries;
    auto radius = static_cast<std::uint32_t>(unweighted_hd(x, tr.v));
    std::size_t outside = 0;
    for (auto d : dists)
        if (d > radius) ++outside;
    trial.frac_outside_ball =
        dists.empty() ? 0.0 : static_cast<double>(outside) / static_cast<double>(dists.size());
    return trial;
}

LowerboundReport lowerbound_experiment(std::size_t n, double radius_exp, std::size_t m,
                                       std::size_t trials, RngStream rng,
                                       const LowerboundOptions& opts) {
    LowerboundReport rep;
    rep.trials = trials;
    double budget_sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        LowerboundTrial trial = lowerbound_trial(n, radius_exp, m, rng.child(t), opts);
        if (trial.iid_success) ++rep.iid_successes;
        if (trial.mucio_success) ++rep.mucio_successes;
        rep.min_frac_outside_ball = std::min(rep.min_frac_outside_ball, trial.frac_outside_ball);
        budget_sum += trial.mucio_budget;
        if (trial.start_margin > 0.0) {
            double mg = trial.start_margin;
            std::size_t bucket = mg < 10.0 ? 0 : mg < 20.0 ? 1 : mg < 40.0 ? 2 : 3;
            ++rep.margin_bucket_trials[bucket];
            if (trial.iid_success) ++rep.margin_bucket_iid_hits[bucket];
        }
        rep.per_trial.push_back(trial);
    }
    if (trials > 0) rep.mean_mucio_budget = budget_sum / static_cast<double>(trials);
    return rep;
}

}  // namespace ccm
