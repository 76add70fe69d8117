#include "ccm/tamper.hpp"

#include <cmath>
#include <limits>

namespace ccm {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kBudgetTol = 1e-12;
}  // namespace

void TamperParams::validate(std::size_t n) const {
    if (!(lambda > 0.0)) throw std::invalid_argument("TamperParams: lambda must be positive");
    if (!(tau >= 0.0)) throw std::invalid_argument("TamperParams: tau must be non-negative");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("TamperParams: eps in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("TamperParams: delta in (0,1)");
    if (k_cap && !(*k_cap > 0.0)) throw std::invalid_argument("TamperParams: k_cap must be positive");
    if (alpha.size() != n) throw DimensionError("TamperParams: weight vector length mismatch");
}

StepDecision additive_step(RunOracle& oracle, const Trajectory& prefix, double u, double lambda) {
    StepDecision d;
    d.f_prev = oracle.eval(prefix);
    auto [m, fstar] = oracle.max_block(prefix);
    d.f_star = fstar;
    Trajectory ext = prefix;
    ext.push_back(u);
    d.f_ext = oracle.eval(ext);
    if (d.f_star >= d.f_prev + lambda) {
        d.step_case = StepCase::Case1;
        d.value = m;
    } else if (d.f_ext <= d.f_prev - lambda) {
        d.step_case = StepCase::Case2;
        d.value = m;
    } else {
        d.step_case = StepCase::Case3;
        d.value = u;
    }
    return d;
}

StepDecision mucio_step(RunOracle& oracle, const Trajectory& prefix, double u, double lambda,
                        double alpha_i) {
    StepDecision d;
    d.f_prev = oracle.eval(prefix);
    auto [m, fstar] = oracle.max_block(prefix);
    d.f_star = fstar;
    Trajectory ext = prefix;
    ext.push_back(u);
    d.f_ext = oracle.eval(ext);
    double up = std::exp(lambda * alpha_i), down = std::exp(-lambda * alpha_i);
    if (d.f_star >= up * d.f_prev) {
        d.step_case = StepCase::Case1;
        d.value = m;
    } else if (d.f_ext <= down * d.f_prev) {
        d.step_case = StepCase::Case2;
        d.value = m;
    } else {
        d.step_case = StepCase::Case3;
        d.value = u;
    }
    return d;
}

StepDecision mucio_abort_step(RunOracle& oracle, const Trajectory& prefix, double u,
                              double lambda, double alpha_i, double tau, double eps_root,
                              bool already_aborted, bool abort_first) {
    if (already_aborted) {
        StepDecision d;
        d.step_case = StepCase::Abort;
        d.value = u;
        d.f_prev = d.f_star = d.f_ext = kNaN;
        return d;
    }
    double floor_est = std::exp(-tau) * eps_root;
    if (abort_first) {
        Trajectory ext = prefix;
        ext.push_back(u);
        double f_ext = oracle.eval(ext);
        if (f_ext <= floor_est) {
            StepDecision d;
            d.step_case = StepCase::Abort;
            d.value = u;
            d.f_prev = oracle.eval(prefix);
            d.f_star = kNaN;
            d.f_ext = f_ext;
            return d;
        }
        return mucio_step(oracle, prefix, u, lambda, alpha_i);
    }
    StepDecision d = mucio_step(oracle, prefix, u, lambda, alpha_i);
    if (d.step_case == StepCase::Case3 && d.f_ext <= floor_est) {
        d.step_case = StepCase::Abort;
        d.value = u;
    }
    return d;
}

TamperTranscript run_tampering(const RandomProcess& p, const MembershipOracle& f,
                               const OracleFactory& oracle, const TamperParams& params,
                               RngStream rng, const Trajectory* external_u) {
    params.validate(p.n);
    if (external_u) {
        if (!p.is_product)
            throw std::invalid_argument(
                "run_tampering: external honest trajectory requires a product process");
        if (external_u->size() != p.n)
            throw DimensionError("run_tampering: external trajectory length mismatch");
    }
    std::uint64_t queries_before = f.query_count();
    RngStream sample_rng = rng.child("sample");
    auto run = oracle.make_run(rng.child("oracle"));

    TamperTranscript tr;
    tr.u.reserve(p.n);
    tr.v.reserve(p.n);
    tr.tampered.reserve(p.n);
    tr.case_taken.reserve(p.n);
    tr.f_prev.reserve(p.n);
    tr.f_star.reserve(p.n);
    tr.f_ext.reserve(p.n);
    tr.f_next.reserve(p.n);

    bool multiplicative = params.mode != TamperMode::Additive;
    // Degenerate root estimate: no guarantee claimed, return an honest pass.
    bool degenerate = multiplicative && run->eval({}) == 0.0;
    double eps_root = multiplicative ? run->eval({}) : 0.0;
    bool stopped = false;  // budget cap exhausted, tampering ceased permanently

    for (std::size_t i = 0; i < p.n; ++i) {
        double u_i = external_u ? (*external_u)[i] : p.sampler(tr.v, sample_rng);
        if (!p.domains[i].contains(u_i))
            throw ContractViolation("run_tampering: honest block outside domain");
        tr.u.push_back(u_i);

        if (degenerate || stopped || tr.aborted) {
            tr.v.push_back(u_i);
            tr.tampered.push_back(false);
            tr.case_taken.push_back(tr.aborted ? StepCase::Abort : StepCase::Case3);
            tr.f_prev.push_back(kNaN);
            tr.f_star.push_back(kNaN);
            tr.f_ext.push_back(kNaN);
            tr.f_next.push_back(kNaN);
            continue;
        }
        if (params.k_cap && tr.budget_used + params.alpha[i] > *params.k_cap + kBudgetTol) {
            stopped = true;
            tr.v.push_back(u_i);
            tr.tampered.push_back(false);
            tr.case_taken.push_back(StepCase::Case3);
            tr.f_prev.push_back(kNaN);
            tr.f_star.push_back(kNaN);
            tr.f_ext.push_back(kNaN);
            tr.f_next.push_back(kNaN);
            continue;
        }

        StepDecision d;
        switch (params.mode) {
            case TamperMode::Additive:
                d = additive_step(*run, tr.v, u_i, params.lambda);
                break;
            case TamperMode::Multiplicative:
                d = mucio_step(*run, tr.v, u_i, params.lambda, params.alpha[i]);
                break;
            case TamperMode::MultiplicativeAbort:
                d = mucio_abort_step(*run, tr.v, u_i, params.lambda, params.alpha[i], params.tau,
                                     eps_root, false, params.abort_first);
                break;
        }
        if (d.step_case == StepCase::Abort) tr.aborted = true;
        bool tampers = (d.step_case == StepCase::Case1 || d.step_case == StepCase::Case2) &&
                       d.value != u_i;
        if (tampers && params.audit_validity && p.support_enumerator) {
            bool ok = false;
            for (const auto& [sv, sp] : p.support_enumerator(tr.v))
                if (sv == d.value && sp > 0.0) ok = true;
            if (!ok) throw ContractViolation("run_tampering: tampered value outside support");
        }
        tr.v.push_back(d.value);
        tr.tampered.push_back(tampers);
        if (tampers) tr.budget_used += params.alpha[i];
        tr.case_taken.push_back(d.step_case);
        tr.f_prev.push_back(d.f_prev);
        tr.f_star.push_back(d.f_star);
        tr.f_ext.push_back(d.f_ext);
        tr.f_next.push_back(tr.aborted ? kNaN : run->eval(tr.v));
    }
    tr.success = f.test(tr.v);
    tr.membership_queries = f.query_count() - queries_before;
    return tr;
}

TamperParams average_case_params(std::size_t n, double eps, double delta) {
    if (!(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("average_case_params: eps, delta must be in (0,1)");
    double nn = static_cast<double>(n);
    TamperParams tp;
    tp.eps = eps;
    tp.delta = delta;
    tp.lambda = std::sqrt(2.0 * std::log(1.0 / eps) / nn);
    double radicand = 4.0 * std::log(delta / (2.0 * nn)) * std::log(eps);
    if (!(radicand > 0.0))
        throw std::invalid_argument("average_case_params: degenerate eps/delta (radicand <= 0)");
    tp.tau = std::log(1.0 / eps) + std::sqrt(radicand);
    tp.gamma = delta / (24.0 * nn * nn);
    tp.mode = TamperMode::MultiplicativeAbort;
    tp.alpha = WeightVector::uniform(n);
    return tp;
}

TamperParams worst_case_params(std::size_t n, double eps, double delta) {
    if (!(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("worst_case_params: eps, delta must be in (0,1)");
    double nn = static_cast<double>(n);
    double radicand = 2.0 * nn * std::log(delta / 8.0) * std::log(eps / 2.0);
    if (!(radicand > 0.0))
        throw std::invalid_argument("worst_case_params: degenerate eps/delta (radicand <= 0)");
    TamperParams tp;
    tp.eps = eps;
    tp.delta = delta;
    tp.k_cap = std::sqrt(radicand);
    tp.lambda = *tp.k_cap / (2.0 * nn);
    double tau_radicand = 4.0 * std::log(delta / (2.0 * nn)) * std::log(eps);
    if (!(tau_radicand > 0.0))
        throw std::invalid_argument("worst_case_params: degenerate eps/delta (radicand <= 0)");
    tp.tau = std::log(1.0 / eps) + std::sqrt(tau_radicand);
    tp.gamma = std::min(delta / (24.0 * nn * nn), eps / (4.0 * nn));
    tp.mode = TamperMode::MultiplicativeAbort;
    tp.alpha = WeightVector::uniform(n);
    return tp;
}

Trajectory find_close_point(const RandomProcess& mu, const MembershipOracle& S,
                            const OracleFactory& oracle, const TamperParams& params,
                            const Trajectory& x, RngStream rng) {
    if (!mu.is_product)
        throw std::invalid_argument("find_close_point: product measure required");
    TamperTranscript tr = run_tampering(mu, S, oracle, params, rng, &x);
    return tr.v;
}

}  // namespace ccm
