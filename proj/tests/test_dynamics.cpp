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

#include "urnsim/dynamics.hpp"

#include <cmath>

#include "doctest.h"

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

std::shared_ptr<const GrowthSequence> constant_seq(std::uint64_t sigma, long tau0,
                                                   std::size_t horizon) {
    return std::make_shared<GrowthSequence>(GrowthSequence::constant(sigma, tau0, horizon));
}

}  // namespace

TEST_CASE("psi fixed points and hand values") {
    for (double a : {1.0, 1.7, 2.0, 3.5}) {
        CHECK(psi(0.5, a) == 0.5);
        CHECK(psi(0.0, a) == 0.0);
        CHECK(psi(1.0, a) == 1.0);
    }
    CHECK(psi(1.0 / 3.0, 2.0) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(psi(0.25, 1.0) == 0.25);  // alpha = 1 short-circuits to the identity
    CHECK_THROWS_AS(psi(std::nan(""), 2.0), std::domain_error);
    CHECK_THROWS_AS(psi(-0.1, 2.0), std::domain_error);
}

TEST_CASE("psi bounds and symmetry on random points") {
    Rng rng(42, 0);
    for (int i = 0; i < 20000; ++i) {
        double x = rng.uniform();
        double a = 1.0 + 4.0 * rng.uniform();
        double v = psi(x, a);
        double lo = std::pow(x, a);
        double hi = std::pow(2.0, a - 1.0) * lo;
        CHECK(v >= lo * (1.0 - 1e-12));
        CHECK(v <= hi * (1.0 + 1e-12));
        CHECK(std::abs(v + psi(1.0 - x, a) - 1.0) <= 1e-14);
    }
}

TEST_CASE("log_psi stays accurate for extreme arguments") {
    // x = 1e-200: psi(x) = x^2 (1 + O(x)), so log psi = 2 log x to 1e-12 rel.
    double lx = std::log(1e-200);
    double l1mx = std::log1p(-1e-200);
    double lp = log_psi(lx, l1mx, 2.0);
    CHECK(std::abs(lp - 2.0 * lx) <= std::abs(2.0 * lx) * 1e-12);

    // the fixed point x = 1/2
    double lhalf = std::log(0.5);
    CHECK(log_psi(lhalf, lhalf, 3.0) == doctest::Approx(lhalf).epsilon(1e-15));

    // alpha log x <= log psi <= (alpha-1) log 2 + alpha log x at x = 0.3
    double l3 = std::log(0.3), l7 = std::log(0.7);
    double v = log_psi(l3, l7, 3.0);
    CHECK(v >= 3.0 * l3 - 1e-12);
    CHECK(v <= 2.0 * std::log(2.0) + 3.0 * l3 + 1e-12);

    // beyond double range: x ~ e^{-5e5}
    double tiny = -5.0e5;
    double v2 = log_psi(tiny, log1mexp(tiny), 2.5);
    CHECK(std::abs(v2 - 2.5 * tiny) <= std::abs(2.5 * tiny) * 1e-12);
}

TEST_CASE("binomial sampler branches") {
    Rng rng(7, 1);
    SamplerLimits limits;

    CHECK(sample_binomial(0, 0.3, rng).count == 0.0);

    // exact branch moments: size 1e6, p = 1/2
    double sum = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) sum += sample_binomial(1000000, 0.5, rng).count;
    double mean = sum / draws;
    double sd = std::sqrt(1000000 * 0.25);
    CHECK(std::abs(mean - 500000.0) <= 4.0 * sd / std::sqrt(double(draws)));

    // poisson branch: size 1e10 (> cutoff), mean 100
    double lsize = std::log(1e10);
    double lp = std::log(1e-8);
    double l1mp = std::log1p(-1e-8);
    double psum = 0.0, psq = 0.0;
    for (int i = 0; i < draws; ++i) {
        BinomialDraw d = sample_binomial_log(lsize, lp, l1mp, rng, limits);
        CHECK(d.is_integer);
        psum += d.count;
        psq += d.count * d.count;
    }
    double pmean = psum / draws;
    CHECK(std::abs(pmean - 100.0) <= 4.0 * 10.0 / std::sqrt(double(draws)));
    double pvar = psq / draws - pmean * pmean;
    CHECK(pvar == doctest::Approx(100.0).epsilon(0.15));

    // gaussian branch: size 1e10, p = 1e-3 -> mean 1e7
    double gsum = 0.0;
    for (int i = 0; i < draws; ++i) {
        BinomialDraw d = sample_binomial_log(std::log(1e10), std::log(1e-3),
                                             std::log1p(-1e-3), rng, limits);
        gsum += d.count;
    }
    double gmean = gsum / draws;
    double gsd = std::sqrt(1e10 * 1e-3);
    CHECK(std::abs(gmean - 1e7) <= 4.0 * gsd / std::sqrt(double(draws)));

    // astronomically small mean: log p = -250 ln 10 at size 1e100
    for (int i = 0; i < 50; ++i) {
        BinomialDraw d = sample_binomial_log(100.0 * std::log(10.0), -250.0 * std::log(10.0),
                                             -0.0, rng, limits);
        CHECK(d.count == 0.0);
    }

    CHECK_THROWS_AS(sample_binomial(10, 1.5, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_binomial_log(1.0, 0.5, -0.5, rng, limits), std::invalid_argument);
}

TEST_CASE("step: binomial support and mean") {
    auto seq = constant_seq(10, 20, 64);
    ModelParams p = make_params(seq, 2.0, 8);
    ProcessState s0 = initial_state(p);
    double prob = psi(0.4, 2.0);
    Rng rng(11, 0);
    double sum = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        StepResult r = step(s0, p, rng);
        CHECK(r.b1_exact >= 0);
        CHECK(r.b1_exact <= 10);
        sum += r.b1_exact.get_d();
    }
    double mean = sum / draws;
    double sd = std::sqrt(10.0 * prob * (1.0 - prob));
    CHECK(std::abs(mean - 10.0 * prob) <= 4.0 * sd / std::sqrt(double(draws)));
}

TEST_CASE("step: martingale property at alpha = 1") {
    auto seq = constant_seq(10, 20, 64);
    ModelParams p = make_params(seq, 1.0, 7);  // Theta_0 = 0.35
    ProcessState s0 = initial_state(p);
    Rng rng(13, 0);
    double sum = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        StepResult r = step(s0, p, rng);
        sum += r.next.theta();
    }
    double mean = sum / draws;
    // per-step sd of Theta_{n+1} around Theta_n
    double sd = std::sqrt(10.0 * 0.35 * 0.65) / 30.0;
    CHECK(std::abs(mean - 0.35) <= 4.0 * sd / std::sqrt(double(draws)));
}

TEST_CASE("bulk placement puts whole batches in one bin") {
    auto seq = constant_seq(8, 4, 64);
    ModelParams p = make_params(seq, 1.0, 1, Kernel::BulkPlacement);  // Theta_0 = 0.25
    ProcessState s0 = initial_state(p);
    Rng rng(17, 0);
    int full = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        StepResult r = step(s0, p, rng);
        bool is_zero = r.b1_exact == 0;
        bool is_sigma = r.b1_exact == 8;
        CHECK((is_zero || is_sigma));
        if (is_sigma) ++full;
    }
    double frac = double(full) / draws;
    CHECK(std::abs(frac - 0.25) <= 4.0 * std::sqrt(0.25 * 0.75 / draws));
}

TEST_CASE("kernels coincide for sigma = 1") {
    auto seq = constant_seq(1, 10, 64);
    ModelParams pi = make_params(seq, 2.0, 3);  // Theta = 0.3
    ModelParams pb = make_params(seq, 2.0, 3, Kernel::BulkPlacement);
    ProcessState s0 = initial_state(pi);
    Rng r1(23, 0), r2(23, 1);
    const int draws = 100000;
    int ones_i = 0, ones_b = 0;
    for (int i = 0; i < draws; ++i) {
        ones_i += step(s0, pi, r1).b1_exact == 1;
        ones_b += step(s0, pb, r2).b1_exact == 1;
    }
    // 2x2 chi-square with 1 dof; 6.63 is the 1% critical value
    double n1 = ones_i, n0 = draws - ones_i, m1 = ones_b, m0 = draws - ones_b;
    double e1 = (n1 + m1) / 2.0, e0 = (n0 + m0) / 2.0;
    double chi2 = (n1 - e1) * (n1 - e1) / e1 + (m1 - e1) * (m1 - e1) / e1 +
                  (n0 - e0) * (n0 - e0) / e0 + (m0 - e0) * (m0 - e0) / e0;
    CHECK(chi2 < 6.63);
}

TEST_CASE("conservation and monotonicity in exact mode") {
    auto seq = std::make_shared<GrowthSequence>(GrowthSequence::polynomial(2, 1, 5, 600));
    ModelParams p = make_params(seq, 2.0, 2);
    ProcessState s = initial_state(p);
    Rng rng(29, 0);
    BigInt prev_t = s.t, prev_u = s.u;
    for (int n = 1; n <= 500; ++n) {
        StepResult r = step(s, p, rng);
        s = std::move(r.next);
        REQUIRE(s.mode == CountMode::Exact);
        CHECK(s.t + s.u == seq->tau(n));
        CHECK(s.t >= prev_t);
        CHECK(s.u >= prev_u);
        prev_t = s.t;
        prev_u = s.u;
    }
}

TEST_CASE("exact-to-float switchover keeps the log pair consistent") {
    auto seq = std::make_shared<GrowthSequence>(
        GrowthSequence::doubly_exponential_tau(1.0, 1.0, 2.0, 32));
    ModelParams p = make_params(seq, 2.0, 1);
    ProcessState s = initial_state(p);
    Rng rng(31, 0);
    bool saw_float = false;
    for (int n = 1; n <= 25; ++n) {
        double prev_log_t = s.log_t, prev_log_u = s.log_u;
        StepResult r = step(s, p, rng);
        s = std::move(r.next);
        CHECK(s.log_t >= prev_log_t - 1e-12);
        CHECK(s.log_u >= prev_log_u - 1e-12);
        CHECK(log_add(s.log_t, s.log_u) ==
              doctest::Approx(seq->log_tau(n)).epsilon(1e-9));
        CHECK(s.log_theta <= 1e-12);
        saw_float |= s.mode == CountMode::Float;
    }
    CHECK(saw_float);
    CHECK(s.mode == CountMode::Float);
}

TEST_CASE("supercritical float steps keep both bins fed") {
    auto seq = std::make_shared<GrowthSequence>(
        GrowthSequence::doubly_exponential_tau(1.0, 1.0, 3.0, 32));
    ModelParams p = make_params(seq, 2.0, 1);
    ProcessState s = initial_state(p);
    Rng rng(37, 0);
    int both = 0;
    for (int n = 1; n <= 25; ++n) {
        StepResult r = step(s, p, rng);
        if (r.bin1_received && r.bin2_received) ++both;
        s = std::move(r.next);
        CHECK(std::isfinite(s.log_t));
        CHECK(std::isfinite(s.log_u));
    }
    CHECK(both >= 20);  // huge batches reach both bins essentially always
}

TEST_CASE("identical seeds reproduce trajectories bit for bit") {
    auto seq = constant_seq(1, 2, 256);
    ModelParams p = make_params(seq, 2.0, 1);
    auto run = [&](std::uint64_t rep) {
        Rng rng(12345, rep);
        ProcessState s = initial_state(p);
        std::vector<BigInt> path;
        for (int n = 1; n <= 200; ++n) {
            s = step(s, p, rng).next;
            path.push_back(s.t);
        }
        return path;
    };
    CHECK(run(3) == run(3));
    CHECK(run(3) != run(4));
}

TEST_CASE("model parameter validation") {
    auto seq = constant_seq(1, 2, 8);
    ModelParams p = make_params(seq, 0.9, 1);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.alpha = 2.0;
    p.t0 = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.t0 = 2;  // == tau0
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.t0 = 1;
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("noise is normalized at moderate P") {
    auto seq = constant_seq(50, 100, 8);
    ModelParams p = make_params(seq, 2.0, 30);
    ProcessState s0 = initial_state(p);
    Rng rng(41, 0);
    double sum = 0.0, sumsq = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        StepResult r = step(s0, p, rng);
        sum += r.noise.epsilon;
        sumsq += r.noise.epsilon * r.noise.epsilon;
    }
    double mean = sum / draws;
    double var = sumsq / draws - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(double(draws)));
    CHECK(std::abs(var - 1.0) < 0.05);
}
