#include "ccm/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "ccm/adversarial.hpp"
#include "ccm/core.hpp"
#include "ccm/mean.hpp"
#include "ccm/pexp.hpp"
#include "ccm/reductions.hpp"
#include "ccm/tamper.hpp"

namespace ccm {

using nlohmann::json;

json ExperimentConfig::to_json() const {
    return json{{"kind", kind},     {"params", params},   {"trials", trials},
                {"seed", seed},     {"workers", workers}, {"output_path", output_path}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    if (!j.contains("kind") || !j.at("kind").is_string())
        throw std::invalid_argument("ExperimentConfig: missing string field 'kind'");
    c.kind = j.at("kind").get<std::string>();
    c.params = j.value("params", json::object());
    c.trials = j.value("trials", std::size_t{0});
    c.seed = j.value("seed", std::uint64_t{0});
    c.workers = std::max<std::size_t>(1, j.value("workers", std::size_t{1}));
    c.output_path = j.value("output_path", std::string{});
    return c;
}

WilsonInterval summarize(std::size_t successes, std::size_t trials) {
    return wilson_interval(successes, trials);
}

namespace {

using TrialFn = std::function<TrialRecord(std::size_t, RngStream)>;
using AggregateFn = std::function<void(const std::vector<TrialRecord>&, json&)>;

struct Plan {
    TrialFn trial;
    json setup = json::object();
    AggregateFn aggregate;
};

double pnum(const json& p, const char* key, double dflt) {
    return p.contains(key) ? p.at(key).get<double>() : dflt;
}
std::size_t pint(const json& p, const char* key, std::size_t dflt) {
    return p.contains(key) ? p.at(key).get<std::size_t>() : dflt;
}
std::string pstr(const json& p, const char* key, const std::string& dflt) {
    return p.contains(key) ? p.at(key).get<std::string>() : dflt;
}
bool pbool(const json& p, const char* key, bool dflt) {
    return p.contains(key) ? p.at(key).get<bool>() : dflt;
}

std::size_t unweighted_hd(const Trajectory& a, const Trajectory& b) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) ++d;
    return d;
}

// Smallest integer threshold whose fair-binomial upper tail is <= eps.
long long pick_threshold(std::size_t n, double eps) {
    auto t = static_cast<long long>(n / 2);
    while (t <= static_cast<long long>(n) &&
           binomial_tail_ge(n, 0.5, t) > eps)
        ++t;
    return t;
}

// ---------------------------------------------------------------------------

Plan plan_tamper(const json& params) {
    struct TamperCtx {
        ThresholdSpec spec;
        RandomProcess proc;
        TamperParams tp;
        std::shared_ptr<OracleFactory> shared_factory;
        std::string oracle_kind;
        OracleBudget budget;
    };
    auto ctx = std::make_shared<TamperCtx>();

    std::size_t n = pint(params, "n", 0);
    if (n == 0) throw std::invalid_argument("tamper: field 'n' required and positive");
    double delta = pnum(params, "delta", 0.1);
    double eps_target = pnum(params, "eps", 0.02);
    long long t = params.contains("threshold_t")
                      ? params.at("threshold_t").get<long long>()
                      : pick_threshold(n, eps_target);
    double eps_actual = binomial_tail_ge(n, 0.5, t);
    ctx->spec = ThresholdSpec::fair_sum_ge(n, static_cast<double>(t));
    ctx->proc = ctx->spec.process();

    std::string mode = pstr(params, "mode", "mucio-abort");
    std::string cap = params.contains("cap") && params.at("cap").is_string()
                          ? params.at("cap").get<std::string>()
                          : "";
    if (mode == "additive") {
        ctx->tp.mode = TamperMode::Additive;
        ctx->tp.eps = eps_actual;
        ctx->tp.delta = delta;
        ctx->tp.lambda = 1.0 / std::sqrt(static_cast<double>(n));
        ctx->tp.alpha = WeightVector::uniform(n);
    } else if (mode == "mucio" || mode == "mucio-abort") {
        ctx->tp = (cap == "worst") ? worst_case_params(n, eps_actual, delta)
                                   : average_case_params(n, eps_actual, delta);
        if (mode == "mucio") ctx->tp.mode = TamperMode::Multiplicative;
    } else {
        throw std::invalid_argument("tamper: unknown mode '" + mode + "'");
    }
    if (params.contains("cap") && params.at("cap").is_number())
        ctx->tp.k_cap = params.at("cap").get<double>();
    if (params.contains("lambda")) ctx->tp.lambda = params.at("lambda").get<double>();
    ctx->tp.abort_first = pbool(params, "abort_first", false);
    ctx->tp.audit_validity = pbool(params, "audit", false);
    if (pstr(params, "weights", "uniform") == "halfhalf") {
        std::vector<double> a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = i < n / 2 ? std::sqrt(1.5) : std::sqrt(0.5);
        ctx->tp.alpha = WeightVector::make(std::move(a));
    }

    ctx->oracle_kind = pstr(params, "oracle", "threshold");
    if (ctx->oracle_kind == "threshold") {
        ctx->shared_factory = make_threshold_oracle(ctx->spec);
    } else if (ctx->oracle_kind == "mc") {
        if (params.contains("sizing")) {
            auto sizing = pstr(params, "sizing", "cubic") == "cubic" ? SizingMode::Cubic
                                                                     : SizingMode::Hoeffding;
            ctx->budget = oracle_sample_counts(ctx->tp.gamma > 0 ? ctx->tp.gamma : 0.1,
                                               ctx->tp.tau, eps_actual, sizing);
        } else {
            ctx->budget = {pint(params, "m_eval", 800), pint(params, "m_max", 4)};
        }
    } else if (ctx->oracle_kind != "exact") {
        throw std::invalid_argument("tamper: unknown oracle '" + ctx->oracle_kind + "'");
    }

    Plan plan;
    plan.setup = json{{"eps_actual", eps_actual},
                      {"threshold_t", t},
                      {"lambda", ctx->tp.lambda},
                      {"tau", ctx->tp.tau},
                      {"gamma", ctx->tp.gamma},
                      {"k_cap", ctx->tp.k_cap ? json(*ctx->tp.k_cap) : json()},
                      {"mode", mode},
                      {"oracle", ctx->oracle_kind}};
    plan.trial = [ctx](std::size_t idx, RngStream rng) {
        MembershipOracle f = ctx->spec.membership();
        std::shared_ptr<OracleFactory> local;
        const OracleFactory* fac = ctx->shared_factory.get();
        if (ctx->oracle_kind == "mc") {
            local = make_mc_oracle(ctx->proc, &f, ctx->budget);
            fac = local.get();
        } else if (ctx->oracle_kind == "exact") {
            local = make_exact_oracle(ctx->proc, &f);
            fac = local.get();
        }
        TamperTranscript tr = run_tampering(ctx->proc, f, *fac, ctx->tp, rng);
        TrialRecord rec;
        rec.index = idx;
        rec.success = tr.success;
        rec.budget = tr.budget_used;
        rec.aborted = tr.aborted;
        rec.queries = tr.membership_queries;
        rec.displacement = static_cast<double>(unweighted_hd(tr.u, tr.v));
        return rec;
    };
    return plan;
}

Plan plan_oracle_check(const json& params) {
    std::size_t n = pint(params, "n", 8);
    if (n > 12) throw std::invalid_argument("oracle-check: n must be <= 12");
    double gamma = pnum(params, "gamma", 0.25);
    double tau = pnum(params, "tau", 0.5);
    double mu_lo = pnum(params, "mu_lo", 0.3), mu_hi = pnum(params, "mu_hi", 0.7);
    std::size_t prefixes = pint(params, "prefixes", 60);
    std::size_t draws = pint(params, "draws", 400);
    OracleBudget budget = oracle_sample_counts(gamma, tau, mu_lo, SizingMode::Hoeffding);
    budget.m_eval = pint(params, "m_eval", budget.m_eval);
    budget.m_max = pint(params, "m_max", 8);

    Plan plan;
    plan.setup = json{{"gamma", gamma}, {"tau", tau},
                      {"m_eval", budget.m_eval}, {"m_max", budget.m_max}};
    plan.trial = [=](std::size_t idx, RngStream rng) {
        RngStream set_rng = rng.child("set");
        double p_in = mu_lo + set_rng.uniform() * (mu_hi - mu_lo);
        std::vector<char> mask(1u << n);
        for (auto& b : mask) b = set_rng.bernoulli(p_in) ? 1 : 0;
        MembershipOracle f([mask, n](const Trajectory& x) {
            std::size_t bits = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (x[i] != 0.0) bits |= (1u << i);
            return mask[bits] != 0;
        });
        RandomProcess proc = fair_bits(n);
        Condition1Audit a1 =
            audit_condition1(proc, f, budget, gamma, tau, prefixes, rng.child("c1"));
        bool ok1 = static_cast<double>(a1.ok) >=
                   (1.0 - 2.0 * gamma) * static_cast<double>(a1.checked);
        Condition3Audit a3 =
            audit_condition3(proc, f, budget, gamma, 8, draws, rng.child("c3"));
        bool ok3 = true;
        double worst_excess = 0.0;
        for (std::size_t i = 0; i < a3.violation_rate.size(); ++i) {
            double slack = 3.0 * std::sqrt(a3.bound[i] / static_cast<double>(draws)) +
                           3.0 / static_cast<double>(draws);
            worst_excess = std::max(worst_excess,
                                    a3.violation_rate[i] - (a3.bound[i] + slack));
            if (a3.violation_rate[i] > a3.bound[i] + slack) ok3 = false;
        }
        TrialRecord rec;
        rec.index = idx;
        rec.success = ok1 && ok3;
        rec.budget = a1.checked ? static_cast<double>(a1.ok) / static_cast<double>(a1.checked)
                                : 1.0;
        rec.queries = f.query_count();
        rec.extra = json{{"cond1_fraction_ok", rec.budget},
                         {"cond1_checked", a1.checked},
                         {"cond3_worst_excess", worst_excess},
                         {"set_density", p_in}};
        return rec;
    };
    return plan;
}

MembershipOracle make_gauss_set(const std::string& set, std::size_t n) {
    if (set == "halfspace")
        return MembershipOracle([](const Trajectory& z) {
            double s = 0.0;
            for (double v : z) s += v;
            return s <= 0.0;
        });
    if (set == "dictator")
        return MembershipOracle([](const Trajectory& z) { return z[0] >= 0.0; });
    if (set == "hemisphere")
        return MembershipOracle([](const Trajectory& z) { return z[0] <= 0.0; });
    if (set == "all")
        return MembershipOracle([](const Trajectory&) { return true; });
    throw std::invalid_argument("unknown set '" + set + "'");
    (void)n;
}

Plan plan_reduce_l1(const json& params) {
    std::size_t n = pint(params, "n", 16);
    double eps = pnum(params, "eps", 0.25);
    double delta = pnum(params, "delta", 0.2);
    std::string set = pstr(params, "set", "halfspace");
    GaussAttackOptions opts;
    opts.sigma = pnum(params, "sigma", 0.5);
    opts.m_eval = pint(params, "m_eval", 48);
    opts.m_max = pint(params, "m_max", 4);
    double scale = opts.sigma / 0.5;
    double w_scaled = scale / std::sqrt(static_cast<double>(n));
    double b_scaled = scale * std::sqrt(static_cast<double>(n)) / 2.0;
    double clamp = opts.sigma * std::sqrt(static_cast<double>(n));

    Plan plan;
    plan.setup = json{{"sigma", opts.sigma}, {"w", w_scaled}, {"b", b_scaled}, {"set", set}};
    plan.trial = [=](std::size_t idx, RngStream rng) {
        MembershipOracle S = make_gauss_set(set, n);
        RngStream x_rng = rng.child("x");
        Trajectory x(n);
        bool clamped = false;
        for (auto& v : x) {
            v = opts.sigma * x_rng.normal();
            if (std::fabs(v) >= clamp) clamped = true;
        }
        AttackResult res = gaussian_l1_attack(S, eps, delta, x, rng.child("attack"), opts);
        TrialRecord rec;
        rec.index = idx;
        rec.success = res.success;
        rec.budget = res.budget;
        rec.aborted = res.aborted;
        rec.queries = res.queries;
        rec.displacement = res.displacement;
        rec.extra = json{{"clamped", clamped},
                         {"distance_bound", w_scaled * res.budget + 2.0 * b_scaled}};
        return rec;
    };
    return plan;
}

Plan plan_gauss_l2(const json& params) {
    std::size_t n = pint(params, "n", 256);
    double eps = pnum(params, "eps", 0.4);
    double delta = pnum(params, "delta", 0.2);
    std::string set = pstr(params, "set", "halfspace");
    GaussAttackOptions opts;
    opts.sigma = pnum(params, "sigma", 1.0);
    opts.m_eval = pint(params, "m_eval", 48);
    opts.m_max = pint(params, "m_max", 2);

    Plan plan;
    plan.setup = json{{"sigma", opts.sigma}, {"set", set}};
    plan.trial = [=](std::size_t idx, RngStream rng) {
        MembershipOracle S = make_gauss_set(set, n);
        RngStream x_rng = rng.child("x");
        Trajectory x(n);
        for (auto& v : x) v = opts.sigma * x_rng.normal();
        AttackResult res = gaussian_l2_attack(S, eps, delta, x, rng.child("attack"), opts);
        TrialRecord rec;
        rec.index = idx;
        rec.success = res.success;
        rec.budget = res.budget;
        rec.aborted = res.aborted;
        rec.queries = res.queries;
        rec.displacement = res.displacement;
        return rec;
    };
    return plan;
}

Plan plan_sphere(const json& params) {
    std::size_t n = pint(params, "n", 256);
    double eps = pnum(params, "eps", 0.5);
    double delta = pnum(params, "delta", 0.2);
    std::string set = pstr(params, "set", "hemisphere");
    GaussAttackOptions opts;
    opts.m_eval = pint(params, "m_eval", 48);
    opts.m_max = pint(params, "m_max", 2);

    Plan plan;
    plan.setup = json{{"set", set}};
    plan.trial = [=](std::size_t idx, RngStream rng) {
        MembershipOracle S = make_gauss_set(set, n);
        RngStream x_rng = rng.child("x");
        Trajectory x(n);
        double norm = 0.0;
        for (auto& v : x) {
            v = x_rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : x) v /= norm;
        AttackResult res = sphere_attack(S, eps, delta, x, rng.child("attack"), opts);
        TrialRecord rec;
        rec.index = idx;
        rec.success = res.success;
        rec.budget = res.budget;
        rec.aborted = res.aborted;
        rec.queries = res.queries;
        rec.displacement = res.displacement;
        return rec;
    };
    return plan;
}

Plan plan_mcdiarmid(const json& params) {
    std::size_t n = pint(params, "n", 400);
    double eps = pnum(params, "eps", 0.5);
    double delta = pnum(params, "delta", 0.1);
    std::string oracle = pstr(params, "oracle", "analytic");
    bool band_check = pbool(params, "band_check", true);
    std::size_t m_eval = pint(params, "m_eval", 200);
    std::size_t m_max = pint(params, "m_max", 4);
    double a_norm = std::sqrt(static_cast<double>(n));

    Plan plan;
    plan.setup = json{{"eta_true", static_cast<double>(n) / 2.0},
                      {"bound", static_cast<double>(n) / 2.0 + eps * a_norm},
                      {"oracle", oracle}};
    plan.trial = [=](std::size_t idx, RngStream rng) {
        RealFunctionOracle f(
            [](const Trajectory& z) {
                double s = 0.0;
                for (double v : z) s += v;
                return s;
            },
            std::vector<double>(n, 1.0));
        RandomProcess mu = fair_bits(n);
        RngStream x_rng = rng.child("x");
        Trajectory x = sample_trajectory(mu, x_rng);
        McdiarmidOptions opts;
        opts.m_eval = m_eval;
        opts.m_max = m_max;
        if (oracle == "analytic")
            opts.oracle_builder = [n](double thr) {
                return make_threshold_oracle(ThresholdSpec::fair_sum_le(n, thr));
            };
        McdiarmidResult res = mcdiarmid_map(x, f, mu, eps, delta, rng.child("map"), opts);
        double f_x = 0.0, f_y = 0.0;
        for (double v : x) f_x += v;
        for (double v : res.y) f_y += v;
        TrialRecord rec;
        rec.index = idx;
        rec.success = f_y <= static_cast<double>(n) / 2.0 + eps * a_norm;
        rec.budget = res.budget;
        rec.aborted = res.aborted;
        rec.displacement = static_cast<double>(unweighted_hd(x, res.y));
        rec.extra = json{{"f_x", f_x}, {"f_y", f_y}, {"eta_hat", res.eta_hat},
                         {"mucio_eps", res.mucio_eps}};
        if (band_check) {
            double lo = res.eta_hat - 1.0, hi = res.eta_hat + 1.0;
            bool applicable = (f_y <= hi && hi <= f_x) || (f_y >= lo && lo >= f_x) ||
                              (f_y >= lo && f_y <= hi);
            rec.extra["refine_applicable"] = applicable;
            if (applicable) {
                RefineResult ref = refine_to_band(x, res.y, f, lo, hi);
                rec.extra["refine_in_band"] = ref.in_band;
                double f_r = 0.0;
                for (double v : ref.y) f_r += v;
                rec.extra["f_refined"] = f_r;
            }
        }
        rec.queries = f.query_count();
        return rec;
    };
    return plan;
}

Plan plan_cointoss(const json& params) {
    std::size_t n = pint(params, "n", 200);
    double eps = pnum(params, "eps", 0.5);
    double delta = pnum(params, "delta", 0.1);
    struct CoinCtx {
        CoinTossProtocol proto;
        std::shared_ptr<OracleFactory> factory;
        TamperParams tp;
    };
    auto ctx = std::make_shared<CoinCtx>();
    ctx->proto = majority_protocol(n);
    ThresholdSpec spec = ThresholdSpec::fair_sum_ge(n, static_cast<double>(n) / 2.0);
    double measure = threshold_measure(spec);
    ctx->factory = make_threshold_oracle(spec);
    ctx->tp.mode = TamperMode::Multiplicative;
    ctx->tp.eps = measure;
    ctx->tp.delta = delta;
    ctx->tp.lambda = std::sqrt(2.0 * std::log(1.0 / measure) / static_cast<double>(n));
    double default_cap =
        3.0 * std::sqrt(static_cast<double>(n) * std::log(1.0 / (eps * delta)));
    ctx->tp.k_cap = pnum(params, "cap", default_cap);
    ctx->tp.alpha = WeightVector::uniform(n);

    Plan plan;
    plan.setup = json{{"honest_measure", measure}, {"cap", *ctx->tp.k_cap}};
    plan.trial = [ctx](std::size_t idx, RngStream rng) {
        CoinTossAttack atk =
            strong_adaptive_cointoss_attack(ctx->proto, *ctx->factory, ctx->tp, 1, rng);
        TrialRecord rec;
        rec.index = idx;
        rec.success = atk.output_bit == 1;
        rec.budget = static_cast<double>(atk.corrupted.size());
        rec.aborted = atk.transcript.aborted;
        rec.queries = atk.transcript.membership_queries;
        rec.displacement = rec.budget;
        return rec;
    };
    return plan;
}

Plan plan_lowerbound(const json& params) {
    std::size_t n = pint(params, "n", 400);
    double radius_exp = pnum(params, "radius_exp", 0.5);
    std::size_t m = pint(params, "queries", 1000);
    LowerboundOptions opts;
    opts.eps = pnum(params, "eps", 0.5);
    opts.delta = pnum(params, "delta", 0.1);
    opts.cap_factor = pnum(params, "cap_factor", 3.0);
    opts.m_eval = pint(params, "m_eval", 64);
    opts.m_max = pint(params, "m_max", 4);

    Plan plan;
    plan.setup = json{
        {"radius", std::llround(std::pow(static_cast<double>(n), radius_exp))},
        {"cap", opts.cap_factor *
                    std::sqrt(static_cast<double>(n) * std::log(1.0 / (opts.eps * opts.delta)))}};
    plan.trial = [=](std::size_t idx, RngStream rng) {
        LowerboundTrial t = lowerbound_trial(n, radius_exp, m, rng, opts);
        TrialRecord rec;
        rec.index = idx;
        rec.success = t.mucio_success;
        rec.budget = t.mucio_budget;
        rec.queries = t.mucio_queries;
        rec.displacement = t.mucio_budget;
        rec.extra = json{{"iid_success", t.iid_success},
                         {"frac_outside_ball", t.frac_outside_ball},
                         {"start_margin", t.start_margin}};
        return rec;
    };
    plan.aggregate = [](const std::vector<TrialRecord>& recs, json& summary) {
        std::size_t iid = 0;
        double min_frac = 1.0;
        std::array<std::size_t, 4> bt{}, bh{};
        for (const auto& r : recs) {
            if (r.extra.value("iid_success", false)) ++iid;
            min_frac = std::min(min_frac, r.extra.value("frac_outside_ball", 1.0));
            double mg = r.extra.value("start_margin", 0.0);
            if (mg > 0.0) {
                std::size_t b = mg < 10.0 ? 0 : mg < 20.0 ? 1 : mg < 40.0 ? 2 : 3;
                ++bt[b];
                if (r.extra.value("iid_success", false)) ++bh[b];
            }
        }
        summary["iid_successes"] = iid;
        summary["min_frac_outside_ball"] = recs.empty() ? 1.0 : min_frac;
        summary["margin_bucket_trials"] = bt;
        summary["margin_bucket_iid_hits"] = bh;
    };
    return plan;
}

Plan build_plan(const ExperimentConfig& config) {
    const json& p = config.params;
    if (config.kind == "tamper") return plan_tamper(p);
    if (config.kind == "oracle-check") return plan_oracle_check(p);
    if (config.kind == "reduce-l1") return plan_reduce_l1(p);
    if (config.kind == "gauss-l2") return plan_gauss_l2(p);
    if (config.kind == "sphere") return plan_sphere(p);
    if (config.kind == "mcdiarmid") return plan_mcdiarmid(p);
    if (config.kind == "cointoss") return plan_cointoss(p);
    if (config.kind == "lowerbound") return plan_lowerbound(p);
    throw std::invalid_argument("run_experiment: unknown kind '" + config.kind + "'");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, bool include_wall) {
    Plan plan = build_plan(config);
    std::vector<TrialRecord> records(config.trials);
    RngStream root(config.seed);

    auto run_one = [&](std::size_t i) {
        auto t0 = std::chrono::steady_clock::now();
        records[i] = plan.trial(i, root.child("trial").child(i));
        auto t1 = std::chrono::steady_clock::now();
        records[i].index = i;
        records[i].wall_ms =
            std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0)
                .count();
    };

    std::size_t workers = std::max<std::size_t>(1, config.workers);
    if (workers <= 1 || config.trials <= 1) {
        for (std::size_t i = 0; i < config.trials; ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::exception_ptr error;
        std::mutex error_mu;
        for (std::size_t w = 0; w < std::min(workers, config.trials); ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= config.trials) return;
                    try {
                        run_one(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mu);
                        if (!error) error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    std::size_t successes = 0, aborted = 0;
    std::uint64_t total_queries = 0;
    std::vector<double> budgets, displacements;
    for (const auto& r : records) {
        if (r.success) ++successes;
        if (r.aborted) ++aborted;
        total_queries += r.queries;
        budgets.push_back(r.budget);
        displacements.push_back(r.displacement);
    }
    json summary = plan.setup;
    summary["kind"] = config.kind;
    summary["trials"] = config.trials;
    summary["successes"] = successes;
    summary["aborted"] = aborted;
    summary["total_queries"] = total_queries;
    if (config.trials > 0) {
        WilsonInterval wi = wilson_interval(successes, config.trials);
        summary["success_rate"] = wi.rate;
        summary["success_wilson_lo"] = wi.lo;
        summary["success_wilson_hi"] = wi.hi;
        summary["budget_mean"] = mean_of(budgets);
        summary["budget_sd"] = stddev_of(budgets);
        summary["budget_median"] = quantile_of(budgets, 0.5);
        summary["budget_max"] = quantile_of(budgets, 1.0);
        summary["displacement_mean"] = mean_of(displacements);
        summary["displacement_median"] = quantile_of(displacements, 0.5);
        summary["displacement_max"] = quantile_of(displacements, 1.0);
    }
    summary["config"] = config.to_json();
    if (plan.aggregate) plan.aggregate(records, summary);

    ExperimentResult result;
    result.records = std::move(records);
    std::string out;
    for (const auto& r : result.records) {
        json line{{"trial", r.index},
                  {"success", r.success},
                  {"budget", r.budget},
                  {"aborted", r.aborted},
                  {"queries", r.queries},
                  {"displacement", r.displacement}};
        for (auto it = r.extra.begin(); it != r.extra.end(); ++it) line[it.key()] = it.value();
        if (include_wall) line["wall_ms"] = r.wall_ms;
        out += line.dump();
        out += '\n';
    }
    out += json{{"summary", summary}}.dump();
    out += '\n';
    result.summary = std::move(summary);
    result.jsonl = std::move(out);

    if (!config.output_path.empty()) {
        std::ofstream file(config.output_path);
        if (!file) throw std::runtime_error("run_experiment: cannot write " + config.output_path);
        file << result.jsonl;
    }
    return result;
}

nlohmann::json SweepReport::to_json() const {
    json pts = json::array();
    for (const auto& p : points)
        pts.push_back(json{{"n", p.n},
                           {"x", p.x},
                           {"mean_budget", p.mean_budget},
                           {"residual", p.residual}});
    return json{{"slope", slope}, {"points", pts}};
}

SweepReport scaling_sweep(const ExperimentConfig& base, const std::vector<std::size_t>& ns,
                          bool include_wall) {
    std::vector<std::size_t> distinct = ns;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3)
        throw std::invalid_argument("scaling_sweep: at least 3 distinct n values required");
    SweepReport report;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t n : distinct) {
        ExperimentConfig cfg = base;
        cfg.params["n"] = n;
        cfg.output_path.clear();
        ExperimentResult res = run_experiment(cfg, include_wall);
        double eps = res.summary.value("eps_actual", cfg.params.value("eps", 0.02));
        double delta = cfg.params.value("delta", 0.1);
        SweepPoint pt;
        pt.n = n;
        pt.x = std::sqrt(static_cast<double>(n) * std::log(1.0 / (eps * delta)));
        pt.mean_budget = res.summary.value("budget_mean", 0.0);
        report.points.push_back(pt);
        sxy += pt.x * pt.mean_budget;
        sxx += pt.x * pt.x;
    }
    report.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    for (auto& pt : report.points) pt.residual = pt.mean_budget - report.slope * pt.x;
    return report;
}

}  // namespace ccm
