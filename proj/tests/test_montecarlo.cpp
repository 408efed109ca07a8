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

#include "urnsim/montecarlo.hpp"

#include <cmath>

#include "doctest.h"

#include "urnsim/io.hpp"

using namespace urnsim;

namespace {

ModelParams make_params(std::shared_ptr<const GrowthSequence> seq, double alpha, long t0,
                        Kernel kernel = Kernel::IndependentBinomial) {
    ModelParams p;
    p.alpha = alpha;
    p.t0 = t0;
    p.seq = std::move(seq);
    p.kernel = kernel;
    return p;
}

ProcessState exact_state(const ModelParams& params, std::size_t n, long t) {
    ProcessState s;
    s.n = n;
    s.mode = CountMode::Exact;
    s.t = t;
    s.u = params.seq->tau(n) - s.t;
    s.log_t = log_bigint(s.t);
    s.log_u = log_bigint(s.u);
    double lt = params.seq->log_tau(n);
    s.log_theta = s.log_t - lt;
    s.log_one_minus_theta = s.log_u - lt;
    return s;
}

}  // namespace

TEST_CASE("certificate fires for a frozen loser at count one") {
    auto seq = std::make_shared<GrowthSequence>(GrowthSequence::constant(1, 2, 200002));
    ModelParams p = make_params(seq, 2.0, 1);
    // tau_998 = 1000, loser frozen at L = 1
    ProcessState s = exact_state(p, 998, 1);
    auto cert = monopoly_certificate(s, p, 1e-2, 200000);
    REQUIRE(cert.has_value());
    CHECK(cert->epsilon_bound < 1e-2);
    // union bound dominated by 2 sum_{i>=n} tau_i^{-2} ~ 2/999
    CHECK(cert->epsilon_bound <= 2.0 * 0.0010005001667 * 1.001);
    CHECK(cert->epsilon_bound >= 0.00095);
    CHECK(cert->at_step == 998);
    CHECK(cert->loser_count == "1");

    // tighter confidence requirement: not granted
    CHECK(!monopoly_certificate(s, p, 1e-4, 200000).has_value());
}

TEST_CASE("certificate bound decreases while the loser stays frozen") {
    auto seq = std::make_shared<GrowthSequence>(GrowthSequence::constant(1, 2, 200002));
    ModelParams p = make_params(seq, 2.0, 1);
    double prev = 1.0;
    for (std::size_t n : {998, 1998, 4998, 9998}) {
        auto cert = monopoly_certificate(exact_state(p, n, 1), p, 1e-2, 200000);
        REQUIRE(cert.has_value());
        CHECK(cert->epsilon_bound < prev);
        prev = cert->epsilon_bound;
    }
}

TEST_CASE("no certificate without a certified series tail") {
    auto seq = std::make_shared<GrowthSequence>(
        GrowthSequence::doubly_exponential_tau(1.0, 1.0, 3.0, 128));
    ModelParams p = make_params(seq, 2.0, 1);
    for (std::size_t n : {2, 5, 8, 11}) {
        auto cert = monopoly_certificate(exact_state(p, n, 1), p, 1e-2, 100);
        CHECK(!cert.has_value());
    }
}

TEST_CASE("replication runs are deterministic and thread invariant") {
    auto seq = std::make_shared<GrowthSequence>(GrowthSequence::constant(1, 2, 100502));
    ModelParams p = make_params(seq, 2.0, 1);
    RunOptions o;
    o.horizon = 500;
    o.reps = 50;
    o.master_seed = 99;
    o.threads = 1;
    RunResult a = run_replications(p, o);
    o.threads = 4;
    RunResult b = run_replications(p, o);
    CHECK(records_csv(a.records) == records_csv(b.records));
    RunResult c = run_replications(p, o);
    CHECK(records_csv(b.records) == records_csv(c.records));
}

TEST_CASE("winner split is symmetric for a symmetric start") {
    auto seq = std::make_shared<GrowthSequence>(GrowthSequence::constant(1, 2, 102002));
    ModelParams p = make_params(seq, 2.0, 1);
    RunOptions o;
    o.horizon = 2000;
    o.reps = 400;
    o.master_seed = 7;
    RunResult r = run_replications(p, o);
    double frac =
        static_cast<double>(r.summary.winners_bin1) / (o.reps - r.summary.undecided);
    CHECK(std::abs(frac - 0.5) <= 2.0 / std::sqrt(double(o.reps)));
}

TEST_CASE("certificates rarely lie: violations within the union bound budget") {
    auto seq = std::make_shared<GrowthSequence>(GrowthSequence::constant(1, 2, 120002));
    ModelParams p = make_params(seq, 2.0, 1);
    RunOptions o;
    o.horizon = 20000;
    o.reps = 300;
    o.master_seed = 2024;
    o.confidence_eps = 1e-3;
    RunResult r = run_replications(p, o);
    CHECK(r.summary.certificates > 150);  // monopoly is almost sure here
    CHECK(r.summary.certificate_violations <= 2);
}

TEST_CASE("dominance statistics") {
    auto seq = std::make_shared<GrowthSequence>(GrowthSequence::constant(1, 2, 110002));
    ModelParams p = make_params(seq, 2.0, 1);
    RunOptions o;
    o.horizon = 10000;
    o.reps = 200;
    o.master_seed = 5;
    RunResult r = run_replications(p, o);
    DominanceStats st = dominance_stats(r.records, {1e-1, 1e-2, 1e-3});
    CHECK(st.median_decreased);  // feedback pushes the minority share down
    CHECK(st.p_below.size() == 3);
    CHECK(st.p_below[0].second >= st.p_below[1].second);
    CHECK(st.p_below[1].second >= st.p_below[2].second);

    std::vector<TrajectoryRecord> one(r.records.begin(), r.records.begin() + 1);
    DominanceStats single = dominance_stats(one, {0.5});
    CHECK(single.p_below.size() == 1);
    CHECK((single.p_below[0].second == 0.0 || single.p_below[0].second == 1.0));

    CHECK_THROWS_AS(dominance_stats({}, {0.1}), std::invalid_argument);
}

TEST_CASE("kolmogorov-smirnov against references") {
    // point mass at 1/2 vs uniform: distance exactly 1/2
    std::vector<double> all_half(100, 0.5);
    KsResult ks = limit_distribution_test(all_half, ReferenceDist::Uniform01);
    CHECK(ks.ks_stat == doctest::Approx(0.5).epsilon(1e-12));

    // an exact uniform grid scores tiny distance
    std::vector<double> grid;
    for (int i = 0; i < 1000; ++i) grid.push_back((i + 0.5) / 1000.0);
    CHECK(limit_distribution_test(grid, ReferenceDist::Uniform01).ks_stat < 0.002);

    // balanced mass near 0 and 1 matches the two-point law
    std::vector<double> split;
    for (int i = 0; i < 500; ++i) split.push_back(1e-9);
    for (int i = 0; i < 500; ++i) split.push_back(1.0 - 1e-9);
    CHECK(limit_distribution_test(split, ReferenceDist::TwoPointHalfHalf).ks_stat < 0.01);

    // the uniform reference warns outside the classical configuration
    auto seq = std::make_shared<GrowthSequence>(GrowthSequence::constant(2, 4, 64));
    ModelParams p = make_params(seq, 1.0, 1);
    KsResult warned = limit_distribution_test(all_half, ReferenceDist::Uniform01, &p);
    CHECK(warned.warning.has_value());
}

TEST_CASE("deviation tracking") {
    CHECK(deviation_delta(std::log(10002.0)) ==
          doctest::Approx(0.0117877191747).epsilon(1e-7));

    DeviationTracker pinned;
    for (int n = 0; n < 100; ++n) pinned.observe(n, 0.5, std::log(100.0 + n));
    CHECK(pinned.stats().count == 0);

    DeviationTracker off;
    off.observe(3, 0.01, std::log(100.0));  // |0.01 - 0.5| = 0.49 > 1/log^2(100)
    CHECK(off.stats().count == 1);
    CHECK(off.stats().first_step == 3);
}

TEST_CASE("noise moments aggregate near the normalized law") {
    auto seq = std::make_shared<GrowthSequence>(GrowthSequence::constant(1, 2, 101002));
    ModelParams p = make_params(seq, 1.0, 1);
    RunOptions o;
    o.horizon = 1000;
    o.reps = 100;
    o.master_seed = 3;
    RunResult r = run_replications(p, o);
    CHECK(r.summary.noise_steps > 50000);
    CHECK(std::abs(r.summary.noise_mean) < 4.0 / std::sqrt(double(r.summary.noise_steps)));
    CHECK(std::abs(r.summary.noise_var - 1.0) < 0.05);
}

TEST_CASE("run budget truncates replications and flags partial results") {
    auto seq = std::make_shared<GrowthSequence>(GrowthSequence::constant(1, 2, 100102));
    ModelParams p = make_params(seq, 2.0, 1);
    RunOptions o;
    o.horizon = 100;
    o.reps = 50;
    o.master_seed = 4;
    o.max_total_steps = 1000;  // only 10 replications affordable
    RunResult r = run_replications(p, o);
    CHECK(r.summary.partial);
    CHECK(r.summary.reps_completed == 10);
    CHECK(r.records.size() == 10);
}

TEST_CASE("monopoly onset and certificates land together for alpha = 2") {
    auto seq = std::make_shared<GrowthSequence>(GrowthSequence::constant(1, 2, 120002));
    ModelParams p = make_params(seq, 2.0, 1);
    RunOptions o;
    o.horizon = 20000;
    o.reps = 50;
    o.master_seed = 11;
    RunResult r = run_replications(p, o);
    for (const auto& rec : r.records) {
        if (!rec.certificate) continue;
        REQUIRE(rec.monopoly_onset.has_value());
        if (!rec.certificate_violated) CHECK(*rec.monopoly_onset <= rec.certificate->at_step);
        CHECK(rec.certificate->epsilon_bound < o.confidence_eps);
        CHECK(rec.min_side <= 0.5);
    }
    nlohmann::json j = r.summary.to_json();
    CHECK(j.contains("certified_fraction"));
    CHECK(j.contains("p_below"));
    CHECK(j.contains("noise"));
}
