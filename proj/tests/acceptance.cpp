// Acceptance battery: one line of output per criterion, nonzero exit when any
// criterion fails.  All statistical knobs are fixed here so reruns with the
// same build are byte-reproducible (wall times aside).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "ccm/adversarial.hpp"
#include "ccm/harness.hpp"
#include "ccm/mean.hpp"
#include "ccm/pexp.hpp"
#include "ccm/reductions.hpp"
#include "ccm/stats.hpp"
#include "ccm/tamper.hpp"

using namespace ccm;
using nlohmann::json;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

double now_s() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

ExperimentConfig make_cfg(const char* kind, json params, std::size_t trials,
                          std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.params = std::move(params);
    cfg.trials = trials;
    cfg.seed = seed;
    return cfg;
}

// --- criterion 1: sure success with the exact oracle on tiny instances -----

Verdict criterion1() {
    RngStream inst_rng(101);
    std::size_t total = 0, wins = 0;
    for (int inst = 0; inst < 200; ++inst) {
        std::size_t n = 2 + inst_rng.uniform_below(9);  // 2..10
        std::vector<char> mask;
        double measure = 0.0;
        do {
            mask.assign(std::size_t{1} << n, 0);
            std::size_t members = 0;
            for (auto& b : mask) members += (b = inst_rng.bernoulli(0.5) ? 1 : 0);
            measure = static_cast<double>(members) / static_cast<double>(mask.size());
        } while (measure == 0.0);
        MembershipOracle f([&mask, n](const Trajectory& x) {
            std::size_t bits = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (x[i] != 0.0) bits |= (std::size_t{1} << i);
            return mask[bits] != 0;
        });
        RandomProcess p = fair_bits(n);
        auto factory = make_exact_oracle(p, &f);
        TamperParams tp;
        tp.mode = TamperMode::Multiplicative;
        tp.eps = std::min(measure, 1.0 - 1e-12);
        tp.delta = 0.1;
        tp.lambda = std::sqrt(2.0 * std::log(1.0 / tp.eps) / static_cast<double>(n));
        tp.alpha = WeightVector::uniform(n);
        for (int trial = 0; trial < 50; ++trial) {
            TamperTranscript tr =
                run_tampering(p, f, *factory, tp, inst_rng.child("run").child(trial));
            ++total;
            wins += tr.success;
        }
    }
    Verdict v;
    v.pass = total == 10000 && wins == total;
    v.detail = fmt("successes=%zu/%zu", wins, total);
    return v;
}

// --- criterion 2: average budget constant at n=1024 ------------------------

Verdict criterion2() {
    ExperimentConfig cfg = make_cfg(
        "tamper", json{{"n", 1024}, {"eps", 0.02}, {"oracle", "threshold"}, {"mode", "mucio"}},
        2000, 202);
    ExperimentResult res = run_experiment(cfg, false);
    double eps = res.summary.at("eps_actual").get<double>();
    double mean = res.summary.at("budget_mean").get<double>();
    double sd = res.summary.at("budget_sd").get<double>();
    double se = sd / std::sqrt(2000.0);
    double bound = std::sqrt(2.0 * 1024.0 * std::log(1.0 / eps)) + 3.0 * se;
    Verdict v;
    v.pass = eps >= 0.01 && eps <= 0.05 && mean <= bound;
    v.detail = fmt("eps=%.4f mean_budget=%.2f bound=%.2f", eps, mean, bound);
    return v;
}

// --- criteria 3 and 4: end to end with monte carlo oracles -----------------

Verdict criterion34(bool weighted, std::uint64_t seed) {
    json params{{"n", 200},      {"threshold_t", 115}, {"delta", 0.1}, {"oracle", "mc"},
                {"m_eval", 800}, {"m_max", 4},         {"mode", "mucio-abort"}};
    if (weighted) params["weights"] = "halfhalf";
    ExperimentConfig cfg = make_cfg("tamper", params, 500, seed);
    ExperimentResult res = run_experiment(cfg, false);
    double eps = res.summary.at("eps_actual").get<double>();
    double lo = res.summary.at("success_wilson_lo").get<double>();
    double hd = weighted ? res.summary.at("budget_mean").get<double>()
                         : res.summary.at("displacement_mean").get<double>();
    double bound = 3.0 * std::sqrt(200.0 * std::log(1.0 / (eps * 0.1)));
    Verdict v;
    v.pass = lo >= 0.87 && hd <= bound;
    v.detail = fmt("rate=%.3f wilson_lo=%.3f mean_%s=%.1f bound=%.1f",
                   res.summary.at("success_rate").get<double>(), lo,
                   weighted ? "hd_alpha" : "hd", hd, bound);
    return v;
}

// --- criterion 5: abort rarity ---------------------------------------------

Verdict criterion5() {
    ExperimentConfig cfg = make_cfg(
        "tamper",
        json{{"n", 200}, {"threshold_t", 115}, {"delta", 0.1}, {"oracle", "threshold"}},
        500, 205);
    ExperimentResult res = run_experiment(cfg, false);
    std::size_t aborted = res.summary.at("aborted").get<std::size_t>();
    Verdict v;
    v.pass = static_cast<double>(aborted) / 500.0 <= 0.1;
    v.detail = fmt("aborts=%zu/500 (delta=0.1)", aborted);
    return v;
}

// --- criterion 6: worst case cap -------------------------------------------

Verdict criterion6() {
    ExperimentConfig cfg = make_cfg(
        "tamper",
        json{{"n", 200}, {"threshold_t", 115}, {"delta", 0.1}, {"oracle", "threshold"},
             {"cap", "worst"}},
        500, 206);
    ExperimentResult res = run_experiment(cfg, false);
    double k_cap = res.summary.at("k_cap").get<double>();
    std::size_t over = 0, failures = 0;
    for (const auto& r : res.records) {
        if (r.budget > k_cap + 1e-9) ++over;
        if (!r.success) ++failures;
    }
    double rate = static_cast<double>(failures) / 500.0;
    double slack = 3.0 * std::sqrt(0.1 * 0.9 / 500.0);
    Verdict v;
    v.pass = over == 0 && rate <= 0.1 + slack;
    v.detail = fmt("cap=%.2f over_cap=%zu failure_rate=%.3f allowed=%.3f", k_cap, over, rate,
                   0.1 + slack);
    return v;
}

// --- criterion 7: additive falls well short of multiplicative --------------

Verdict criterion7() {
    double cap = 3.0 * std::sqrt(200.0 * std::log(1.0 / (0.0097 * 0.1)));
    json base{{"n", 200}, {"threshold_t", 117}, {"delta", 0.1}, {"oracle", "threshold"},
              {"cap", cap}};
    json mult = base;
    mult["mode"] = "mucio";
    json add = base;
    add["mode"] = "additive";
    ExperimentResult rm = run_experiment(make_cfg("tamper", mult, 500, 207), false);
    ExperimentResult ra = run_experiment(make_cfg("tamper", add, 500, 207), false);
    double pm = rm.summary.at("success_rate").get<double>();
    double pa = ra.summary.at("success_rate").get<double>();
    Verdict v;
    v.pass = pm - pa >= 0.2;
    v.detail = fmt("multiplicative=%.3f additive=%.3f gap=%.3f (need >= 0.2)", pm, pa, pm - pa);
    return v;
}

// --- criterion 8: reduction properties at n=16 -----------------------------

Verdict criterion8() {
    std::size_t n = 16, m = 10000;
    GaussCube red(n);
    RngStream rng(208);

    // probability embedding: quantized counts against the gaussian cell masses
    std::vector<std::size_t> observed(n + 1, 0);
    RngStream chi_rng = rng.child("chi");
    for (std::size_t i = 0; i < m; ++i)
        ++observed[static_cast<std::size_t>(red.count_of(0.5 * chi_rng.normal()))];
    std::vector<double> expected(n + 1);
    for (std::size_t a = 0; a <= n; ++a) {
        double lo = a == 0 ? -1e30 : (2.0 * a - n - 1.0) / (2.0 * std::sqrt(double(n)));
        double hi = a == n ? 1e30 : (2.0 * a - n + 1.0) / (2.0 * std::sqrt(double(n)));
        expected[a] = normal_cdf(hi / 0.5) - normal_cdf(lo / 0.5);
    }
    std::vector<std::size_t> obs_m;
    std::vector<double> exp_m;
    std::size_t co = 0;
    double ce = 0.0;
    for (std::size_t a = 0; a <= n; ++a) {
        co += observed[a];
        ce += expected[a];
        if (ce * m >= 20.0 || a == n) {
            obs_m.push_back(co);
            exp_m.push_back(ce);
            co = 0;
            ce = 0.0;
        }
    }
    exp_m.back() += 1.0 - std::accumulate(exp_m.begin(), exp_m.end(), 0.0);
    double chi_p = chi2_test(obs_m, exp_m);

    // pushforward through the round trip stays gaussian (KS on coordinate 0)
    RngStream ks_rng = rng.child("ks");
    std::vector<double> cdfs;
    cdfs.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        Trajectory x(n);
        for (auto& c : x) c = 0.5 * ks_rng.normal();
        Trajectory back = red.to_gauss(red.to_cube(x, ks_rng), ks_rng);
        cdfs.push_back(normal_cdf(back[0] / 0.5));
    }
    std::sort(cdfs.begin(), cdfs.end());
    double ks_p = ks_pvalue(ks_statistic_sorted(cdfs), m);

    // lipschitz inequality on sampled cube pairs
    double w = red.lipschitz_w();
    double b = red.roundtrip_slack();
    RngStream lip_rng = rng.child("lip");
    std::size_t lip_bad = 0;
    for (std::size_t i = 0; i < m; ++i) {
        Trajectory y1(n * n), y2(n * n);
        for (auto& c : y1) c = lip_rng.bernoulli(0.5) ? 1.0 : 0.0;
        for (auto& c : y2) c = lip_rng.bernoulli(0.5) ? 1.0 : 0.0;
        std::size_t hd = 0;
        for (std::size_t j = 0; j < n * n; ++j) hd += y1[j] != y2[j];
        double d = l1_distance(red.to_gauss(y1, lip_rng), red.to_gauss(y2, lip_rng));
        if (d > w * static_cast<double>(hd) + 2.0 * b + 1e-9) ++lip_bad;
    }

    // inverse inequality on sampled gaussian points
    RngStream inv_rng = rng.child("inv");
    std::size_t inv_bad = 0;
    for (std::size_t i = 0; i < m; ++i) {
        Trajectory x(n);
        for (auto& c : x) c = 0.5 * inv_rng.normal();
        Trajectory back = red.to_gauss(red.to_cube(x, inv_rng), inv_rng);
        if (l1_distance(x, back) > b + 1e-9) ++inv_bad;
    }

    Verdict v;
    v.pass = chi_p > 1e-3 && ks_p > 1e-3 && lip_bad == 0 && inv_bad == 0;
    v.detail = fmt("chi2_p=%.4f ks_p=%.4f lipschitz_violations=%zu inverse_violations=%zu",
                   chi_p, ks_p, lip_bad, inv_bad);
    return v;
}

// --- criterion 9: gaussian l1 attack ---------------------------------------

Verdict criterion9() {
    ExperimentConfig cfg = make_cfg(
        "reduce-l1", json{{"n", 16}, {"eps", 0.25}, {"delta", 0.2}, {"set", "halfspace"}},
        200, 209);
    ExperimentResult res = run_experiment(cfg, false);
    double k_cap = *worst_case_params(256, 0.125, 0.1).k_cap;
    double hard = 0.25 * k_cap + 2.0 * 2.0;  // w k_cap + 2 (sqrt n / 2)
    std::size_t wins = 0, over = 0, clamped = 0;
    for (const auto& r : res.records) {
        wins += r.success;
        clamped += r.extra.value("clamped", false);
        if (r.displacement > hard + 1e-9) ++over;
    }
    Verdict v;
    v.pass = wins >= 160 && over == 0;
    v.detail = fmt("successes=%zu/200 displacement_cap=%.2f over=%zu clamped_starts=%zu", wins,
                   hard, over, clamped);
    return v;
}

// --- criterion 10: gaussian l2 and sphere attacks --------------------------

Verdict criterion10() {
    ExperimentResult l2 = run_experiment(
        make_cfg("gauss-l2", json{{"n", 256}, {"eps", 0.4}, {"delta", 0.2}}, 200, 210), false);
    ExperimentResult sp = run_experiment(
        make_cfg("sphere", json{{"n", 256}, {"eps", 0.5}, {"delta", 0.2}}, 200, 211), false);
    double root_ln = std::sqrt(std::log(256.0));
    double quarter = std::pow(256.0, 0.25);
    double l2_bound = 4.0 * quarter * root_ln;
    double sp_bound = 4.0 / quarter * root_ln;
    std::size_t l2_wins = l2.summary.at("successes").get<std::size_t>();
    std::size_t sp_wins = sp.summary.at("successes").get<std::size_t>();
    double l2_med = l2.summary.at("displacement_median").get<double>();
    double sp_med = sp.summary.at("displacement_median").get<double>();
    Verdict v;
    v.pass = l2_wins >= 160 && sp_wins >= 160 && l2_med <= l2_bound && sp_med <= sp_bound;
    v.detail = fmt("l2=%zu/200 med=%.2f (<=%.2f)  sphere=%zu/200 med=%.3f (<=%.3f)", l2_wins,
                   l2_med, l2_bound, sp_wins, sp_med, sp_bound);
    return v;
}

// --- criterion 11: mean concentration at n=400 -----------------------------

Verdict criterion11() {
    ExperimentConfig cfg = make_cfg(
        "mcdiarmid", json{{"n", 400}, {"eps", 0.5}, {"delta", 0.1}, {"oracle", "analytic"}},
        2000, 212);
    ExperimentResult res = run_experiment(cfg, false);
    std::size_t above = 0, applicable = 0, landed = 0;
    for (const auto& r : res.records) {
        if (!r.success) ++above;  // success records f(y) <= eta + eps sqrt(n)
        if (r.extra.value("refine_applicable", false)) {
            ++applicable;
            landed += r.extra.value("refine_in_band", false);
        }
    }
    double freq = static_cast<double>(above) / 2000.0;
    double allowed = 0.1 + 2.0 * std::sqrt(0.1 * 0.9 / 2000.0);
    Verdict v;
    v.pass = freq <= allowed && landed == applicable;
    v.detail = fmt("above_band=%.4f allowed=%.4f refine=%zu/%zu", freq, allowed, landed,
                   applicable);
    return v;
}

// --- criterion 12: lower bound separation ----------------------------------

Verdict criterion12() {
    ExperimentConfig cfg = make_cfg(
        "lowerbound", json{{"n", 400}, {"queries", 1000}, {"m_eval", 64}, {"m_max", 4}}, 200,
        213);
    ExperimentResult res = run_experiment(cfg, false);
    std::size_t iid = res.summary.at("iid_successes").get<std::size_t>();
    std::size_t mucio = res.summary.at("successes").get<std::size_t>();
    double min_frac = res.summary.at("min_frac_outside_ball").get<double>();
    double iid_rate = static_cast<double>(iid) / 200.0;
    double mucio_rate = static_cast<double>(mucio) / 200.0;
    Verdict v;
    v.pass = iid_rate <= 0.6 && mucio_rate >= 0.9 && min_frac >= 0.9;
    v.detail = fmt("iid=%.3f (<=0.6) mucio=%.3f (>=0.9) min_frac_outside=%.3f (>=0.9)",
                   iid_rate, mucio_rate, min_frac);
    return v;
}

// --- criterion 13: coin tossing --------------------------------------------

Verdict criterion13() {
    ExperimentConfig cfg =
        make_cfg("cointoss", json{{"n", 200}, {"eps", 0.5}, {"delta", 0.1}}, 1000, 214);
    ExperimentResult res = run_experiment(cfg, false);
    double cap = res.summary.at("cap").get<double>();
    double rate = res.summary.at("success_rate").get<double>();
    double max_corrupted = res.summary.at("budget_max").get<double>();
    Verdict v;
    v.pass = rate >= 0.9 && max_corrupted <= cap + 1e-9;
    v.detail = fmt("pr_b1=%.3f (>=0.9) max_corrupted=%.0f cap=%.1f", rate, max_corrupted, cap);
    return v;
}

// --- criterion 14: oracle condition audits ---------------------------------

Verdict criterion14() {
    ExperimentConfig cfg = make_cfg("oracle-check", json::object(), 20, 215);
    ExperimentResult res = run_experiment(cfg, false);
    std::size_t wins = res.summary.at("successes").get<std::size_t>();
    Verdict v;
    v.pass = wins == 20;
    v.detail = fmt("audited_instances_ok=%zu/20", wins);
    return v;
}

// --- criterion 15: byte-identical reruns -----------------------------------

Verdict criterion15() {
    std::vector<ExperimentConfig> configs = {
        make_cfg("tamper", json{{"n", 64}, {"oracle", "threshold"}}, 30, 301),
        make_cfg("tamper",
                 json{{"n", 40}, {"oracle", "mc"}, {"m_eval", 64}, {"m_max", 2}}, 10, 302),
        make_cfg("mcdiarmid", json{{"n", 50}}, 5, 303),
        make_cfg("sphere", json{{"n", 32}, {"m_eval", 24}, {"m_max", 2}}, 5, 304),
        make_cfg("lowerbound",
                 json{{"n", 64}, {"queries", 100}, {"m_eval", 24}, {"m_max", 2}}, 5, 305),
        make_cfg("cointoss", json{{"n", 60}}, 10, 306),
    };
    std::size_t identical = 0;
    for (const auto& cfg : configs) {
        ExperimentResult a = run_experiment(cfg, false);
        ExperimentResult b = run_experiment(cfg, false);
        identical += a.jsonl == b.jsonl;
    }
    Verdict v;
    v.pass = identical == configs.size();
    v.detail = fmt("identical_reruns=%zu/%zu", identical, configs.size());
    return v;
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        Verdict (*fn)();
    };
    const Entry entries[] = {
        {1, "sure success, exact oracle", criterion1},
        {2, "average budget constant", criterion2},
        {3, "monte carlo end to end", [] { return criterion34(false, 203); }},
        {4, "weighted budgets", [] { return criterion34(true, 204); }},
        {5, "abort rarity", criterion5},
        {6, "worst-case cap", criterion6},
        {7, "additive separation", criterion7},
        {8, "reduction properties", criterion8},
        {9, "gaussian l1 attack", criterion9},
        {10, "gaussian l2 and sphere", criterion10},
        {11, "mean concentration", criterion11},
        {12, "lower bound separation", criterion12},
        {13, "coin tossing", criterion13},
        {14, "oracle condition audits", criterion14},
        {15, "determinism", criterion15},
    };
    int failures = 0;
    for (const Entry& e : entries) {
        double t0 = now_s();
        Verdict v = e.fn();
        double dt = now_s() - t0;
        failures += !v.pass;
        std::printf("criterion %2d %-4s %-28s %s  [%.1fs]\n", e.id, v.pass ? "PASS" : "FAIL",
                    e.name, v.detail.c_str(), dt);
        std::fflush(stdout);
    }
    std::printf("%d/15 criteria passed\n", 15 - failures);
    return failures == 0 ? 0 : 1;
}
