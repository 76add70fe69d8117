#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ccm/stats.hpp"
#include "ccm/tamper.hpp"

using namespace ccm;

namespace {

MembershipOracle all_ones(std::size_t n) {
    return MembershipOracle([n](const Trajectory& x) {
        for (std::size_t i = 0; i < n; ++i)
            if (x[i] != 1.0) return false;
        return true;
    });
}

struct Setup {
    RandomProcess p;
    MembershipOracle f;
    std::shared_ptr<OracleFactory> factory;
    Setup(std::size_t n) : p(fair_bits(n)), f(all_ones(n)), factory(make_exact_oracle(p, &f)) {}
};

}  // namespace

TEST_CASE("multiplicative step cases on the all-ones set") {
    Setup s(3);
    auto run = s.factory->make_run(RngStream(1));
    // prefix estimate 1/8, best extension 1/4
    StepDecision d1 = mucio_step(*run, {}, 0.0, 0.5, 1.0);
    CHECK(d1.step_case == StepCase::Case1);  // 0.25 >= e^0.5 * 0.125
    CHECK(d1.value == doctest::Approx(1.0));
    CHECK(d1.f_prev == doctest::Approx(0.125));
    CHECK(d1.f_star == doctest::Approx(0.25));

    StepDecision d3 = mucio_step(*run, {}, 1.0, 1.0, 1.0);
    CHECK(d3.step_case == StepCase::Case3);  // no boost, honest block is fine
    CHECK(d3.value == doctest::Approx(1.0));

    StepDecision d2 = mucio_step(*run, {}, 0.0, 1.0, 1.0);
    CHECK(d2.step_case == StepCase::Case2);  // extension by 0 kills the estimate
    CHECK(d2.value == doctest::Approx(1.0));
    CHECK(d2.f_ext == doctest::Approx(0.0));
}

TEST_CASE("block weight scales the multiplicative thresholds") {
    Setup s(3);
    auto run = s.factory->make_run(RngStream(1));
    // e^{lambda * alpha} * 0.125 crosses 0.25 between alpha = 1 and alpha = 2
    CHECK(mucio_step(*run, {}, 0.0, 0.5, 1.0).step_case == StepCase::Case1);
    CHECK(mucio_step(*run, {}, 1.0, 0.5, 2.0).step_case == StepCase::Case3);
}

TEST_CASE("additive step and its failure mode") {
    Setup s(3);
    auto run = s.factory->make_run(RngStream(1));
    CHECK(additive_step(*run, {}, 0.0, 0.1).step_case == StepCase::Case1);
    // with a larger margin neither boost nor drop triggers, so a hopeless
    // honest block is kept
    StepDecision kept = additive_step(*run, {}, 0.0, 0.2);
    CHECK(kept.step_case == StepCase::Case3);
    CHECK(kept.value == doctest::Approx(0.0));
}

TEST_CASE("abort ordering flag") {
    Setup s(3);
    auto run = s.factory->make_run(RngStream(1));
    // u = 0 is both a Case-2 drop and below the abort floor e^0 * 0.125
    StepDecision rescue = mucio_abort_step(*run, {}, 0.0, 1.0, 1.0, 0.0, 0.125, false, false);
    CHECK(rescue.step_case == StepCase::Case2);
    StepDecision abort = mucio_abort_step(*run, {}, 0.0, 1.0, 1.0, 0.0, 0.125, false, true);
    CHECK(abort.step_case == StepCase::Abort);
    // once aborted the engine keeps honest blocks
    StepDecision after = mucio_abort_step(*run, {}, 0.0, 1.0, 1.0, 0.0, 0.125, true, false);
    CHECK(after.step_case == StepCase::Abort);
    CHECK(after.value == doctest::Approx(0.0));
}

TEST_CASE("average case parameter instantiation") {
    TamperParams tp = average_case_params(100, std::exp(-2.0), 0.1);
    CHECK(tp.lambda == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(tp.tau == doctest::Approx(9.79789841408162).epsilon(1e-10));
    CHECK(tp.gamma == doctest::Approx(4.1666666666666667e-07).epsilon(1e-10));
    CHECK(tp.mode == TamperMode::MultiplicativeAbort);
    CHECK_FALSE(tp.k_cap.has_value());
    CHECK(tp.alpha.size() == 100);
}

TEST_CASE("worst case parameter instantiation") {
    TamperParams tp = worst_case_params(100, std::exp(-2.0), 0.1);
    REQUIRE(tp.k_cap.has_value());
    CHECK(*tp.k_cap == doctest::Approx(48.58280081738917).epsilon(1e-10));
    CHECK(tp.lambda == doctest::Approx(0.24291400408694586).epsilon(1e-10));
    CHECK(tp.gamma <= 0.1 / (24.0 * 100.0 * 100.0) + 1e-18);
}

TEST_CASE("whole-space target is never touched") {
    RandomProcess p = fair_bits(20);
    MembershipOracle f([](const Trajectory&) { return true; });
    auto factory = make_exact_oracle(p, &f);
    TamperParams tp = average_case_params(20, 0.5, 0.1);
    TamperTranscript tr = run_tampering(p, f, *factory, tp, RngStream(4));
    CHECK(tr.success);
    CHECK(tr.budget_used == doctest::Approx(0.0));
    CHECK(tr.u == tr.v);
    for (StepCase c : tr.case_taken) CHECK(c == StepCase::Case3);
}

TEST_CASE("uncapped multiplicative runs always land in the target") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Setup s(8);
        TamperParams tp = average_case_params(8, 1.0 / 256.0, 0.2);
        tp.mode = TamperMode::Multiplicative;  // no abort, no cap
        TamperTranscript tr = run_tampering(s.p, s.f, *s.factory, tp, RngStream(seed));
        CHECK(tr.success);
        CHECK(s.f.test(tr.v));
        CHECK(tr.membership_queries >= 1);
    }
}

TEST_CASE("dictator target costs at most one flip") {
    RandomProcess p = fair_bits(10);
    MembershipOracle f([](const Trajectory& x) { return x[0] == 1.0; });
    auto factory = make_exact_oracle(p, &f);
    TamperParams tp = average_case_params(10, 0.5, 0.1);
    tp.mode = TamperMode::Multiplicative;
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
        TamperTranscript tr = run_tampering(p, f, *factory, tp, RngStream(seed));
        CHECK(tr.success);
        CHECK(tr.budget_used <= 1.0 + 1e-12);
    }
}

TEST_CASE("recorded estimates satisfy the per-step floor") {
    ThresholdSpec spec = ThresholdSpec::fair_sum_ge(12, 8.0);
    RandomProcess p = spec.process();
    MembershipOracle f = spec.membership();
    auto factory = make_threshold_oracle(spec);
    TamperParams tp = average_case_params(12, threshold_measure(spec), 0.1);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        TamperTranscript tr = run_tampering(p, f, *factory, tp, RngStream(seed));
        for (std::size_t i = 0; i < tr.case_taken.size(); ++i) {
            if (tr.case_taken[i] == StepCase::Abort) break;
            REQUIRE(std::isfinite(tr.f_next[i]));
            CHECK(tr.f_next[i] >=
                  std::exp(-tp.lambda * tp.alpha[i]) * tr.f_prev[i] - 1e-12);
            CHECK(tr.f_star[i] >= tr.f_prev[i] - 1e-12);
        }
    }
}

TEST_CASE("hard cap is never exceeded and stops the oracle") {
    ThresholdSpec spec = ThresholdSpec::fair_sum_ge(30, 25.0);  // demanding target
    RandomProcess p = spec.process();
    MembershipOracle f = spec.membership();
    auto factory = make_threshold_oracle(spec);
    TamperParams tp = worst_case_params(30, threshold_measure(spec), 0.1);
    tp.k_cap = 2.0;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        TamperTranscript tr = run_tampering(p, f, *factory, tp, RngStream(seed));
        CHECK(tr.budget_used <= 2.0 + 1e-9);
        bool capped = false;
        for (std::size_t i = 0; i < tr.f_prev.size(); ++i) {
            if (std::isnan(tr.f_prev[i])) capped = true;
            // after the stop the engine only passes honest blocks through
            if (capped) {
                CHECK(std::isnan(tr.f_prev[i]));
                CHECK(tr.v[i] == tr.u[i]);
            }
        }
    }
}

TEST_CASE("untouched blocks keep their honest marginal") {
    RandomProcess p = fair_bits(6);
    MembershipOracle f([](const Trajectory& x) { return x[0] == 1.0; });
    auto factory = make_exact_oracle(p, &f);
    TamperParams tp = average_case_params(6, 0.5, 0.1);
    tp.mode = TamperMode::Multiplicative;
    std::size_t ones = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        TamperTranscript tr = run_tampering(p, f, *factory, tp, RngStream(seed));
        for (std::size_t i = 1; i < 6; ++i) {  // block 0 is the attacked one
            ones += tr.v[i] == 1.0;
            ++total;
        }
    }
    CHECK(chi2_test({total - ones, ones}, {0.5, 0.5}) > 1e-4);
}

TEST_CASE("validity audit accepts in-support tampering") {
    Setup s(6);
    TamperParams tp = average_case_params(6, 1.0 / 64.0, 0.1);
    tp.audit_validity = true;
    TamperTranscript tr = run_tampering(s.p, s.f, *s.factory, tp, RngStream(11));
    CHECK(tr.v.size() == 6);
}

TEST_CASE("an empty target degenerates to an honest pass-through") {
    RandomProcess p = fair_bits(5);
    MembershipOracle f([](const Trajectory&) { return false; });
    auto factory = make_exact_oracle(p, &f);
    TamperParams tp;
    tp.mode = TamperMode::Multiplicative;
    tp.eps = 0.5;
    tp.delta = 0.1;
    tp.lambda = 0.3;
    tp.alpha = WeightVector::uniform(5);
    TamperTranscript tr = run_tampering(p, f, *factory, tp, RngStream(2));
    CHECK(tr.u == tr.v);
    CHECK(tr.budget_used == doctest::Approx(0.0));
}

TEST_CASE("find_close_point maps a given start into the set") {
    RandomProcess p = fair_bits(8);
    MembershipOracle f = all_ones(8);
    auto factory = make_exact_oracle(p, &f);
    TamperParams tp = average_case_params(8, 1.0 / 256.0, 0.1);
    tp.mode = TamperMode::Multiplicative;
    Trajectory x(8, 0.0);
    Trajectory y = find_close_point(p, f, *factory, tp, x, RngStream(3));
    CHECK(f.test(y));
    CHECK(weighted_hamming(x, y, tp.alpha) == doctest::Approx(8.0));
}

TEST_CASE("parameter validation") {
    TamperParams tp = average_case_params(10, 0.1, 0.1);
    CHECK_NOTHROW(tp.validate(10));
    CHECK_THROWS(tp.validate(9));  // weight length mismatch
    tp.lambda = -0.1;
    CHECK_THROWS(tp.validate(10));
}
