/*
 * Copyright 2026 The urnsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "urnsim/sequences.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"

#include "urnsim/logspace.hpp"

using namespace urnsim;

TEST_CASE("sigma exact values") {
    GrowthSequence c1 = GrowthSequence::constant(1, 2, 32);
    CHECK(c1.sigma(17) == 1);

    GrowthSequence fact = GrowthSequence::factorial(2, 16);
    CHECK(fact.sigma(5) == 120);

    // tau_n = floor(2^n e^{2^n}) at alpha = base = 2:
    // tau_2 = floor(4 e^4) = 218, tau_3 = floor(8 e^8) = 23847
    GrowthSequence dx = GrowthSequence::doubly_exponential_tau(2.0, 1.0, 2.0, 16);
    CHECK(dx.tau(2) == 218);
    CHECK(dx.tau(3) == 23847);
    CHECK(dx.sigma(3) == 23629);
    CHECK(dx.tau(4) == 142177768);
    CHECK(dx.tau(5) == BigInt("2526814725845782"));
}

TEST_CASE("doubly exponential tau tables for b = 1 and b = 0.5") {
    GrowthSequence b1 = GrowthSequence::doubly_exponential_tau(1.0, 1.0, 2.0, 16);
    const long expect_b1[] = {2, 7, 54, 2980, 8886110};
    for (int n = 0; n < 5; ++n) CHECK(b1.tau(n) == expect_b1[n]);

    GrowthSequence bh = GrowthSequence::doubly_exponential_tau(0.5, 1.0, 2.0, 16);
    const long expect_bh[] = {2, 3, 13, 372, 555381};
    for (int n = 0; n < 5; ++n) CHECK(bh.tau(n) == expect_bh[n]);
}

TEST_CASE("tau prefix sums") {
    GrowthSequence c1 = GrowthSequence::constant(1, 2, 32);
    CHECK(c1.tau(10) == 12);
    CHECK(c1.tau(0) == 2);

    GrowthSequence g = GrowthSequence::geometric(1, 2, 1, 8);
    CHECK(g.tau(3) == 15);  // 1 + 2 + 4 + 8
    CHECK(g.tau(0) == 1);
}

TEST_CASE("tau strictly increases and increments equal sigma") {
    std::vector<GrowthSequence> fams;
    fams.push_back(GrowthSequence::constant(3, 5, 10000));
    fams.push_back(GrowthSequence::polynomial(2, 2, 2, 2000));
    fams.push_back(GrowthSequence::geometric(1, 2, 2, 2000));
    fams.push_back(GrowthSequence::factorial(2, 500));
    fams.push_back(GrowthSequence::doubly_exponential_tau(2.0, 1.0, 2.0, 64));
    fams.push_back(GrowthSequence::doubly_exponential_sigma(1.0, 2.0, 2, 64));
    for (const auto& seq : fams) {
        for (std::size_t n = 1; n <= seq.exact_through(); ++n) {
            CHECK(seq.tau(n) > seq.tau(n - 1));
            CHECK(seq.tau(n) - seq.tau(n - 1) == seq.sigma(n));
            CHECK(seq.sigma(n) >= 1);
        }
    }
}

TEST_CASE("construction rejects invalid parameters") {
    CHECK_THROWS_AS(GrowthSequence::constant(0, 2, 8), std::invalid_argument);
    CHECK_THROWS_AS(GrowthSequence::geometric(1, 1, 2, 8), std::invalid_argument);
    CHECK_THROWS_AS(GrowthSequence::constant(1, 0, 8), std::invalid_argument);
    // floor(0.5 e^{0.075}) = 0 < tau_0 = 1: sigma_1 would be nonpositive
    CHECK_THROWS_AS(GrowthSequence::doubly_exponential_tau(0.5, 0.05, 1.5, 8),
                    std::invalid_argument);
    CHECK_THROWS_AS(GrowthSequence::custom({BigInt(1), BigInt(0)}, 2, std::nullopt),
                    std::invalid_argument);
    CHECK_THROWS_AS(GrowthSequence::doubly_exponential_sigma(0.0, 2.0, 2, 8),
                    std::invalid_argument);
}

TEST_CASE("exact-to-log switch respects the bit budget") {
    GrowthSequence dx = GrowthSequence::doubly_exponential_tau(1.0, 1.0, 2.0, 64);
    // log2 tau_n = 2^n log2(e): budget 1e6 bits is crossed between n=19 and 20
    CHECK(dx.exact_through() >= 18);
    CHECK(dx.exact_through() <= 20);
    std::size_t m = dx.exact_through();
    CHECK_THROWS_AS(dx.sigma(m + 1), std::out_of_range);
    CHECK_THROWS_AS(dx.tau(m + 1), std::out_of_range);
    // log continuation joins the exact values
    CHECK(dx.log_tau(m) == doctest::Approx(std::pow(2.0, double(m))).epsilon(1e-9));
    CHECK(dx.log_tau(40) == doctest::Approx(std::pow(2.0, 40.0)).epsilon(1e-12));
    CHECK(std::isfinite(dx.log_sigma(40)));

    GrowthSequence small = GrowthSequence::constant(1, 2, 1000, 8);
    CHECK(small.exact_through() >= 250);  // tau <= 255 with 8-bit budget
    CHECK(small.exact_through() <= 254);
    CHECK(small.log_tau(1000) == doctest::Approx(std::log(1002.0)).epsilon(1e-12));
}

TEST_CASE("series terms avoid catastrophic cancellation at huge indices") {
    GrowthSequence dx = GrowthSequence::doubly_exponential_tau(2.0, 1.0, 2.0, 2000);
    // log t_i = (1 - i) ln 2 + o(1) for the sigma series at alpha = 2
    double lt = dx.log_series_term(SeriesKind::SigmaOverTauAlpha, 2.0, 1000);
    CHECK(lt == doctest::Approx(-999.0 * std::log(2.0)).epsilon(1e-6));
    double lt_tau = dx.log_series_term(SeriesKind::TauOverTauAlpha, 2.0, 1000);
    CHECK(lt_tau == doctest::Approx(-999.0 * std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("theta estimation") {
    GrowthSequence c1 = GrowthSequence::constant(1, 2, 64);
    Estimate t = estimate_theta(c1, 2.0, 30);
    CHECK(t.confidence == Confidence::Analytic);
    CHECK(t.value == 0.0);

    GrowthSequence g = GrowthSequence::geometric(1, 2, 2, 64);
    CHECK(estimate_theta(g, 2.0, 30).value == 0.0);
    CHECK(estimate_theta(g, 2.0, 30).confidence == Confidence::Analytic);

    GrowthSequence dx = GrowthSequence::doubly_exponential_tau(1.0, 1.0, 2.0, 64);
    CHECK(estimate_theta(dx, 2.0, 20).value == 1.0);
    Estimate numeric = estimate_theta(dx, 2.0, 20, /*force_numeric=*/true);
    CHECK(std::abs(numeric.value - 1.0) < 1e-3);
    CHECK(numeric.confidence == Confidence::NumericStable);

    CHECK_THROWS_AS(estimate_theta(c1, 1.0, 30), std::domain_error);
    CHECK_THROWS_AS(estimate_theta(c1, 2.0, 4), std::invalid_argument);
}

TEST_CASE("bounded-rho families have numerically vanishing theta by n = 30") {
    std::vector<GrowthSequence> fams;
    fams.push_back(GrowthSequence::constant(2, 3, 64));
    fams.push_back(GrowthSequence::polynomial(1, 2, 2, 64));
    fams.push_back(GrowthSequence::geometric(1, 2, 2, 64));
    for (const auto& seq : fams) {
        Estimate t = estimate_theta(seq, 2.0, 30, true);
        CHECK(std::abs(t.value) < 1e-3);
        auto a = seq.analytic(2.0);
        REQUIRE(a.has_value());
        CHECK(a->rho_class.kind == RhoClass::Kind::Bounded);
        CHECK(a->theta == 0.0);
    }
}

TEST_CASE("lambda estimation") {
    GrowthSequence fact = GrowthSequence::factorial(2, 512);
    CHECK(estimate_lambda(fact, 2.0, 400).value == 0.0);  // analytic
    Estimate num = estimate_lambda(fact, 2.0, 400, true);
    // running max over [200, 400] of the decreasing (n+1)/n^2 is at n = 200
    CHECK(num.value == doctest::Approx(201.0 / 40000.0).epsilon(1e-9));
    CHECK(num.confidence == Confidence::NumericStable);

    GrowthSequence c5 = GrowthSequence::constant(5, 7, 64);
    Estimate c5l = estimate_lambda(c5, 2.0, 40, true);
    CHECK(c5l.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c5l.confidence == Confidence::NumericStable);

    GrowthSequence ds = GrowthSequence::doubly_exponential_sigma(1.0, 2.0, 2, 64);
    CHECK(ds.analytic(2.0)->lambda == 1.0);
    Estimate dsl = estimate_lambda(ds, 2.0, 16, true);
    CHECK(std::abs(dsl.value - 1.0) < 1e-3);

    CHECK_THROWS_AS(estimate_lambda(fact, 2.0, 3), std::invalid_argument);
}

TEST_CASE("lambda log-space evaluation matches exact rationals") {
    std::vector<GrowthSequence> fams;
    fams.push_back(GrowthSequence::constant(5, 7, 64));
    fams.push_back(GrowthSequence::polynomial(3, 2, 2, 64));
    fams.push_back(GrowthSequence::geometric(2, 3, 2, 40));
    fams.push_back(GrowthSequence::factorial(2, 40));
    for (const auto& seq : fams) {
        for (unsigned a = 2; a <= 3; ++a) {
            for (std::size_t n = 2; n <= 30; ++n) {
                if (n + 1 > seq.exact_through()) break;
                BigInt num = seq.sigma(n + 1), den = seq.sigma(n);
                BigInt p1, p2;
                mpz_pow_ui(p1.get_mpz_t(), seq.sigma(n - 1).get_mpz_t(), a);
                mpz_pow_ui(p2.get_mpz_t(), den.get_mpz_t(), a + 1);
                mpq_class exact(num * p1, p2);
                exact.canonicalize();
                double direct = exact.get_d();
                double logspace =
                    std::exp(seq.log_sigma(n + 1) + double(a) * seq.log_sigma(n - 1) -
                             double(a + 1) * seq.log_sigma(n));
                CHECK(logspace == doctest::Approx(direct).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("series tail: constant family converges to pi^2/6 - 1") {
    GrowthSequence c1 = GrowthSequence::constant(1, 2, 200001);
    SeriesTail st = series_tail(c1, 2.0, SeriesKind::SigmaOverTauAlpha, 0, 100000);
    CHECK(st.verdict == SeriesVerdict::Converges);
    const double full = 0.64493406684822644;  // sum_{k>=2} k^{-2}
    CHECK(st.partial_sum < full);
    REQUIRE(st.tail_bound.has_value());
    CHECK(st.partial_sum + *st.tail_bound >= full);
    // the bound must dominate the next 100k terms computed directly
    KahanSum rest;
    for (std::size_t i = 100001; i <= 200000; ++i)
        rest.add(std::exp(c1.log_series_term(SeriesKind::SigmaOverTauAlpha, 2.0, i)));
    CHECK(*st.tail_bound >= rest.value());
}

TEST_CASE("series tail: doubly exponential verdicts and ratios") {
    GrowthSequence b1 = GrowthSequence::doubly_exponential_tau(1.0, 1.0, 2.0, 256);
    SeriesTail s1 = series_tail(b1, 2.0, SeriesKind::TauOverTauAlpha, 0, 128);
    CHECK(s1.verdict == SeriesVerdict::Diverges);
    // terms stay near 1
    CHECK(std::exp(b1.log_series_term(SeriesKind::TauOverTauAlpha, 2.0, 50)) ==
          doctest::Approx(1.0).epsilon(1e-6));

    GrowthSequence b2 = GrowthSequence::doubly_exponential_tau(2.0, 1.0, 2.0, 256);
    SeriesTail s2 = series_tail(b2, 2.0, SeriesKind::TauOverTauAlpha, 0, 128);
    CHECK(s2.verdict == SeriesVerdict::Converges);
    double ratio = std::exp(b2.log_series_term(SeriesKind::TauOverTauAlpha, 2.0, 11) -
                            b2.log_series_term(SeriesKind::TauOverTauAlpha, 2.0, 10));
    CHECK(ratio == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("series tail heuristic for custom sequences") {
    // geometric growth without metadata: last-quarter ratios ~ 1/3
    std::vector<BigInt> vals;
    BigInt v = 1;
    for (int i = 0; i < 60; ++i) {
        v *= 3;
        vals.push_back(v);
    }
    GrowthSequence g = GrowthSequence::custom(vals, 2, std::nullopt);
    SeriesTail st = series_tail(g, 2.0, SeriesKind::SigmaOverTauAlpha, 0, 59);
    CHECK(st.verdict == SeriesVerdict::Converges);
    // tau ratio terms at alpha=1 stay near 3: divergence is visible
    SeriesTail st2 = series_tail(g, 1.0, SeriesKind::TauOverTauAlpha, 0, 59);
    CHECK(st2.verdict == SeriesVerdict::Diverges);

    // slowly vanishing terms with ratio -> 1: undecidable from finite data
    std::vector<BigInt> ones(2000, BigInt(1));
    GrowthSequence c = GrowthSequence::custom(ones, 2, std::nullopt);
    SeriesTail st3 = series_tail(c, 2.0, SeriesKind::SigmaOverTauAlpha, 0, 1999);
    CHECK(st3.verdict == SeriesVerdict::Unknown);
}

TEST_CASE("series identity discrepancy is floating noise only") {
    GrowthSequence c1 = GrowthSequence::constant(1, 2, 1001);
    CHECK(check_identity_1101(c1, 1000) < 1e-9);

    GrowthSequence fact = GrowthSequence::factorial(2, 20);
    CHECK(check_identity_1101(fact, 15) < 1e-9);

    GrowthSequence g3 = GrowthSequence::geometric(1, 3, 2, 40);
    CHECK(check_identity_1101(g3, 30) < 1e-9);

    CHECK_THROWS_AS(check_identity_1101(c1, 0), std::invalid_argument);
}

TEST_CASE("analytic asymptotics per family") {
    GrowthSequence c1 = GrowthSequence::constant(1, 2, 16);
    auto a = c1.analytic(2.0);
    REQUIRE(a);
    CHECK(a->theta == 0.0);
    CHECK(a->rho_class.kind == RhoClass::Kind::Bounded);
    CHECK(a->rho_class.bound == doctest::Approx(0.5));
    CHECK(a->series_sigma_tau_alpha == SeriesVerdict::Converges);
    CHECK(a->series_tau_tau_alpha == SeriesVerdict::Diverges);  // alpha = 2 boundary
    CHECK(c1.analytic(2.5)->series_tau_tau_alpha == SeriesVerdict::Converges);
    CHECK(c1.analytic(1.0)->series_sigma_tau_alpha == SeriesVerdict::Diverges);

    GrowthSequence g = GrowthSequence::geometric(1, 2, 2, 16);
    CHECK(g.analytic(2.0)->lambda == doctest::Approx(0.5));
    CHECK(g.analytic(3.0)->lambda == doctest::Approx(0.25));

    GrowthSequence pol = GrowthSequence::polynomial(1, 1, 2, 16);
    CHECK(pol.analytic(2.0)->series_tau_tau_alpha == SeriesVerdict::Converges);
    CHECK(pol.analytic(1.4)->series_tau_tau_alpha == SeriesVerdict::Diverges);

    GrowthSequence ds = GrowthSequence::doubly_exponential_sigma(0.7, 2.0, 2, 16);
    auto da = ds.analytic(2.0);
    CHECK(da->theta == doctest::Approx(0.7));
    CHECK(da->lambda == 1.0);
    CHECK(da->series_tau_tau_alpha == SeriesVerdict::Diverges);
    CHECK(ds.analytic(3.0)->theta == 0.0);   // base below alpha
    CHECK(ds.analytic(3.0)->lambda == 0.0);
    CHECK(std::isinf(ds.analytic(1.5)->theta));  // base above alpha

    GrowthSequence dx = GrowthSequence::doubly_exponential_tau(3.0, 1.0, 2.0, 16);
    CHECK(dx.analytic(2.0)->lambda == doctest::Approx(1.0 / 3.0));
    CHECK(dx.analytic(2.0)->series_tau_tau_alpha == SeriesVerdict::Converges);

    // inconsistent custom metadata is rejected
    AnalyticAsymptotics bad;
    bad.alpha = 2.0;
    bad.theta = 1.0;
    bad.rho_class = RhoClass::bounded(3.0);
    CHECK_THROWS_AS(GrowthSequence::custom({}, 2, bad), std::invalid_argument);
}

TEST_CASE("certified sigma tails dominate true remainders") {
    GrowthSequence c1 = GrowthSequence::constant(1, 2, 1000001);
    auto bound = c1.certified_sigma_tail(2.0, 998);
    REQUIRE(bound);
    KahanSum oracle;
    for (std::size_t i = 998; i <= 1000000; ++i)
        oracle.add(std::exp(c1.log_series_term(SeriesKind::SigmaOverTauAlpha, 2.0, i)));
    CHECK(*bound >= oracle.value());
    CHECK(*bound <= 3.0 * oracle.value());

    GrowthSequence b2 = GrowthSequence::doubly_exponential_tau(2.0, 1.0, 2.0, 256);
    auto bb = b2.certified_sigma_tail(2.0, 30);
    REQUIRE(bb);
    KahanSum o2;
    for (std::size_t i = 30; i <= 255; ++i)
        o2.add(std::exp(b2.log_series_term(SeriesKind::SigmaOverTauAlpha, 2.0, i)));
    CHECK(*bb >= o2.value());

    GrowthSequence fact = GrowthSequence::factorial(2, 256);
    auto fb = fact.certified_sigma_tail(2.0, 10);
    REQUIRE(fb);
    KahanSum o3;
    for (std::size_t i = 10; i <= 255; ++i)
        o3.add(std::exp(fact.log_series_term(SeriesKind::SigmaOverTauAlpha, 2.0, i)));
    CHECK(*fb >= o3.value());

    // no certified tail when the series may diverge
    GrowthSequence b1 = GrowthSequence::doubly_exponential_tau(1.0, 1.0, 2.0, 256);
    CHECK(!b1.certified_sigma_tail(2.0, 30));
    GrowthSequence sup = GrowthSequence::doubly_exponential_tau(1.0, 1.0, 3.0, 256);
    CHECK(!sup.certified_sigma_tail(2.0, 30));
}

TEST_CASE("custom sequences carry metadata only for the matching alpha") {
    AnalyticAsymptotics a;
    a.alpha = 2.0;
    a.theta = kPosInf;
    a.lambda = kPosInf;
    a.rho_class = RhoClass::tends_to_infinity();
    a.series_sigma_tau_alpha = SeriesVerdict::Diverges;
    a.series_tau_tau_alpha = SeriesVerdict::Diverges;
    a.condition_S = a.condition_R = true;
    GrowthSequence cu = GrowthSequence::custom({}, 2, a);
    CHECK(cu.analytic(2.0).has_value());
    CHECK(!cu.analytic(2.5).has_value());
}
