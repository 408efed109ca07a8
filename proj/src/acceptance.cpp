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

#include "urnsim/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "urnsim/classifier.hpp"
#include "urnsim/montecarlo.hpp"

namespace urnsim::acceptance {

namespace {

constexpr std::uint64_t kSeed = 20260801;

struct Check {
    CriterionResult* res;

    void require(bool ok, const std::string& what) {
        std::ostringstream os;
        os << (ok ? "  ok: " : "  FAILED: ") << what;
        res->lines.push_back(os.str());
        if (!ok) res->pass = false;
    }
    void note(const std::string& what) { res->lines.push_back("  " + what); }
};

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::shared_ptr<const GrowthSequence> make_seq(GrowthSequence&& s) {
    return std::make_shared<GrowthSequence>(std::move(s));
}

ModelParams model_of(std::shared_ptr<const GrowthSequence> seq, double alpha, long t0,
                     Kernel kernel = Kernel::IndependentBinomial) {
    ModelParams p;
    p.alpha = alpha;
    p.t0 = t0;
    p.seq = std::move(seq);
    p.kernel = kernel;
    return p;
}

// --- criterion 1: the classifier verdict table -----------------------------

void classifier_table(CriterionResult& res, unsigned) {
    Check ck{&res};
    struct Row {
        std::string name;
        double alpha;
        std::function<GrowthSequence()> seq;
        Regime regime;
        Dominance dom;
        Monopoly mon;
    };
    auto theta_inf_custom = [] {
        AnalyticAsymptotics a;
        a.alpha = 2.0;
        a.theta = kPosInf;
        a.lambda = kPosInf;
        a.rho_class = RhoClass::tends_to_infinity();
        a.series_sigma_tau_alpha = SeriesVerdict::Diverges;
        a.series_tau_tau_alpha = SeriesVerdict::Diverges;
        a.condition_S = a.condition_R = true;
        return GrowthSequence::custom({}, 2, a);
    };
    const std::vector<Row> rows = {
        {"alpha=1 geometric(r=2)", 1.0,
         [] { return GrowthSequence::geometric(1, 2, 2, 16); }, Regime::NoFeedback,
         Dominance::Never, Monopoly::Never},
        {"alpha=2 constant(1)", 2.0, [] { return GrowthSequence::constant(1, 2, 16); },
         Regime::SubcriticalBoundedRho, Dominance::AlmostSure, Monopoly::AlmostSure},
        {"alpha=2 polynomial(deg 2)", 2.0,
         [] { return GrowthSequence::polynomial(1, 2, 2, 16); },
         Regime::SubcriticalBoundedRho, Dominance::AlmostSure, Monopoly::AlmostSure},
        {"alpha=2 factorial", 2.0, [] { return GrowthSequence::factorial(2, 16); },
         Regime::SubcriticalFastRho, Dominance::AlmostSure, Monopoly::AlmostSure},
        {"alpha=2 sigma=floor(e^{2^n})", 2.0,
         [] { return GrowthSequence::doubly_exponential_sigma(1.0, 2.0, 2, 16); },
         Regime::Critical, Dominance::AlmostSure, Monopoly::Never},
        {"alpha=2 tau=floor(0.5^n e^{2^n})", 2.0,
         [] { return GrowthSequence::doubly_exponential_tau(0.5, 1.0, 2.0, 16); },
         Regime::Critical, Dominance::AlmostSure, Monopoly::Never},
        {"alpha=2 tau=floor(e^{2^n})", 2.0,
         [] { return GrowthSequence::doubly_exponential_tau(1.0, 1.0, 2.0, 16); },
         Regime::Critical, Dominance::AlmostSure, Monopoly::Never},
        {"alpha=2 tau=floor(2^n e^{2^n})", 2.0,
         [] { return GrowthSequence::doubly_exponential_tau(2.0, 1.0, 2.0, 16); },
         Regime::Critical, Dominance::AlmostSure, Monopoly::StrictlyBetween},
        {"alpha=2 custom theta=inf", 2.0, theta_inf_custom, Regime::Supercritical,
         Dominance::AlmostSure, Monopoly::Never},
    };
    for (const auto& row : rows) {
        GrowthSequence seq = row.seq();
        RegimeVerdict v = classify(row.alpha, make_inputs(seq, row.alpha, 12));
        bool ok = v.regime == row.regime && v.dominance == row.dom && v.monopoly == row.mon;
        ck.require(ok, row.name + " -> " + to_string(v.regime) + "/" +
                           to_string(v.dominance) + "/" + to_string(v.monopoly) +
                           " (rule " + std::to_string(v.provenance.rule) + ")");
    }
}

// --- criterion 2: classical uniform limit ----------------------------------

void polya_uniform(CriterionResult& res, unsigned threads) {
    Check ck{&res};
    ModelParams p = model_of(make_seq(GrowthSequence::constant(1, 2, 110002)), 1.0, 1);
    RunOptions o;
    o.horizon = 10000;
    o.reps = 2000;
    o.master_seed = kSeed;
    o.threads = threads;
    RunResult r = run_replications(p, o);
    KsResult ks = limit_distribution_test(r.records, ReferenceDist::Uniform01, &p);
    ck.require(ks.ks_stat < 0.05,
               "KS distance to uniform = " + fmt(ks.ks_stat) + " (required < 0.05)");
    ck.note("KS p-value = " + fmt(ks.p_value));
}

// --- criterion 3: subcritical monopoly with certificates --------------------

void subcritical_monopoly(CriterionResult& res, unsigned threads) {
    Check ck{&res};
    ModelParams p = model_of(make_seq(GrowthSequence::constant(1, 2, 200002)), 2.0, 1);
    RunOptions o;
    o.horizon = 100000;
    o.reps = 500;
    o.master_seed = kSeed;
    o.confidence_eps = 1e-3;
    o.threads = threads;
    RunResult r = run_replications(p, o);
    ck.require(r.summary.certified_fraction >= 0.90,
               "certified-monopoly fraction = " + fmt(r.summary.certified_fraction) +
                   " (required >= 0.90)");
    ck.require(r.summary.certificate_violations == 0,
               "post-certificate loser balls = " +
                   std::to_string(r.summary.certificate_violations) + " (required 0)");
}

// --- criterion 4: supercritical regime --------------------------------------

void supercritical_no_monopoly(CriterionResult& res, unsigned threads) {
    Check ck{&res};
    auto seq = make_seq(GrowthSequence::doubly_exponential_tau(1.0, 1.0, 3.0, 100030));
    ModelParams p = model_of(seq, 2.0, 1);
    RunOptions o;
    o.horizon = 25;
    o.reps = 500;
    o.master_seed = kSeed;
    o.confidence_eps = 1e-3;
    o.threads = threads;
    RunResult r = run_replications(p, o);
    ck.require(r.summary.certificates == 0,
               "certificates issued = " + std::to_string(r.summary.certificates) +
                   " (required 0)");
    ck.require(r.summary.median_min_side < 1e-3,
               "median min side = " + fmt(r.summary.median_min_side) +
                   " (required < 1e-3, dominance)");
    bool float_mode_reached = true;
    for (const auto& rec : r.records) float_mode_reached &= rec.final_mode == CountMode::Float;
    ck.require(float_mode_reached, "all trajectories ended in float count mode");

    // loser-bin ball traffic per step, measured directly on the kernel
    std::size_t steps = 0, hits = 0;
    for (std::uint64_t rep = 0; rep < o.reps; ++rep) {
        Rng rng(kSeed + 12345, rep);
        ProcessState s = initial_state(p);
        std::vector<bool> got1(o.horizon + 1), got2(o.horizon + 1);
        for (std::size_t n = 1; n <= o.horizon; ++n) {
            StepResult st = step(s, p, rng);
            got1[n] = st.bin1_received;
            got2[n] = st.bin2_received;
            s = std::move(st.next);
        }
        bool bin1_wins = s.log_t > s.log_u;
        for (std::size_t n = 5; n <= o.horizon; ++n) {
            ++steps;
            if (bin1_wins ? got2[n] : got1[n]) ++hits;
        }
    }
    double frac = static_cast<double>(hits) / steps;
    ck.require(frac >= 0.99, "loser received a ball in " + fmt(100.0 * frac) +
                                 "% of steps n >= 5 (required >= 99%)");
}

// --- criterion 5: critical dichotomy ----------------------------------------

void critical_dichotomy(CriterionResult& res, unsigned threads) {
    Check ck{&res};
    auto run_b = [&](double b) {
        auto seq = make_seq(GrowthSequence::doubly_exponential_tau(b, 1.0, 2.0, 100030));
        ModelParams p = model_of(seq, 2.0, 1);
        RunOptions o;
        o.horizon = 25;
        o.reps = 1000;
        o.master_seed = kSeed;
        o.confidence_eps = 1e-3;
        o.threads = threads;
        return run_replications(p, o);
    };
    RunResult r2 = run_b(2.0);
    ck.require(r2.summary.certificates >= 1,
               "b=2: certified replications = " + std::to_string(r2.summary.certificates) +
                   " of 1000 (required >= 1)");
    ck.note("b=2 certified fraction = " + fmt(r2.summary.certified_fraction));
    RunResult r1 = run_b(1.0);
    ck.require(r1.summary.certificates == 0,
               "b=1: certified replications = " + std::to_string(r1.summary.certificates) +
                   " (required 0)");
}

// --- criterion 6: no dominance without feedback ------------------------------

void no_feedback_no_dominance(CriterionResult& res, unsigned threads) {
    Check ck{&res};
    auto run_kernel = [&](Kernel k) {
        ModelParams p = model_of(make_seq(GrowthSequence::geometric(1, 2, 2, 100202)), 1.0,
                                 1, k);
        RunOptions o;
        o.horizon = 200;
        o.reps = 2000;
        o.master_seed = kSeed;
        o.threads = threads;
        return run_replications(p, o);
    };
    RunResult indep = run_kernel(Kernel::IndependentBinomial);
    std::size_t below = 0;
    for (const auto& rec : indep.records)
        if (rec.min_side < 1e-4) ++below;
    double f4 = static_cast<double>(below) / indep.records.size();
    ck.require(f4 <= 0.01, "independent kernel: fraction with min side < 1e-4 = " + fmt(f4) +
                               " (required <= 1%)");

    RunResult bulk = run_kernel(Kernel::BulkPlacement);
    for (std::size_t i = 0; i < indep.summary.p_below.size(); ++i) {
        double delta = indep.summary.p_below[i].first;
        double fi = indep.summary.p_below[i].second;
        double fb = bulk.summary.p_below[i].second;
        ck.require(fb > fi, "bulk dominates at delta=" + fmt(delta) + ": bulk " + fmt(fb) +
                                " > independent " + fmt(fi));
    }
}

// --- criterion 7: exact series identity --------------------------------------

void identity_1101(CriterionResult& res, unsigned) {
    Check ck{&res};
    struct Fam {
        std::string name;
        GrowthSequence seq;
    };
    std::vector<Fam> fams;
    fams.push_back({"constant(1)", GrowthSequence::constant(1, 2, 1001)});
    fams.push_back({"polynomial(deg 2)", GrowthSequence::polynomial(1, 2, 2, 1001)});
    fams.push_back({"geometric(r=3)", GrowthSequence::geometric(1, 3, 2, 1001)});
    fams.push_back({"factorial", GrowthSequence::factorial(2, 1001)});
    fams.push_back({"tau=floor(2^n e^{2^n})",
                    GrowthSequence::doubly_exponential_tau(2.0, 1.0, 2.0, 1001)});
    fams.push_back({"sigma=floor(e^{2^n})",
                    GrowthSequence::doubly_exponential_sigma(1.0, 2.0, 2, 1001)});
    for (const auto& f : fams) {
        std::size_t n = std::min<std::size_t>(1000, f.seq.exact_through());
        double disc = check_identity_1101(f.seq, n);
        ck.require(disc < 1e-9, f.name + " at n=" + std::to_string(n) +
                                    ": discrepancy = " + fmt(disc) + " (required < 1e-9)");
    }
}

// --- criterion 8: psi bounds and noise normalization -------------------------

void psi_noise_properties(CriterionResult& res, unsigned) {
    Check ck{&res};
    Rng rng(kSeed, 8);
    std::size_t bound_fail = 0, sym_fail = 0;
    for (int i = 0; i < 100000; ++i) {
        double x = rng.uniform();
        double a = 1.0 + 4.0 * rng.uniform();
        double v = psi(x, a);
        double lo = std::pow(x, a);
        double hi = std::pow(2.0, a - 1.0) * lo;
        if (!(v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12))) ++bound_fail;
        if (std::abs(v + psi(1.0 - x, a) - 1.0) > 1e-14) ++sym_fail;
    }
    ck.require(bound_fail == 0, "psi within [x^a, 2^{a-1} x^a] for 1e5 random points (" +
                                    std::to_string(bound_fail) + " failures)");
    ck.require(sym_fail == 0, "psi(x) + psi(1-x) = 1 to 1e-14 (" +
                                  std::to_string(sym_fail) + " failures)");

    // noise moments from a fixed state with P in (0.05, 0.95)
    ModelParams p = model_of(make_seq(GrowthSequence::constant(50, 100, 8)), 2.0, 30);
    ProcessState s = initial_state(p);
    KahanSum sum, sumsq;
    const int n_steps = 10000;
    for (int i = 0; i < n_steps; ++i) {
        StepResult r = step(s, p, rng);
        sum.add(r.noise.epsilon);
        sumsq.add(r.noise.epsilon * r.noise.epsilon);
    }
    double mean = sum.value() / n_steps;
    double var = sumsq.value() / n_steps - mean * mean;
    ck.require(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n_steps)),
               "noise mean = " + fmt(mean) + " (required |mean| < 0.04)");
    ck.require(std::abs(var - 1.0) < 0.05,
               "noise variance = " + fmt(var) + " (required within 0.05 of 1)");
}

// --- criterion 9: deviation tracking ------------------------------------------

void deviation_tracking(CriterionResult& res, unsigned threads) {
    Check ck{&res};
    ModelParams p = model_of(make_seq(GrowthSequence::constant(1, 2, 101002)), 2.0, 1);
    RunOptions o;
    o.horizon = 1000;
    o.reps = 200;
    o.master_seed = kSeed;
    o.threads = threads;
    RunResult r = run_replications(p, o);
    ck.require(r.summary.deviation_fraction == 1.0,
               "fraction of trajectories with >= 1 deviation step = " +
                   fmt(r.summary.deviation_fraction) + " (required 1.0)");
}

struct Criterion {
    std::string id;
    double time_limit_s;  // 0: no limit stated
    void (*fn)(CriterionResult&, unsigned);
};

const std::vector<Criterion>& catalog() {
    static const std::vector<Criterion> c = {
        {"classifier-table", 1.0, classifier_table},
        {"polya-uniform", 120.0, polya_uniform},
        {"subcritical-monopoly", 300.0, subcritical_monopoly},
        {"supercritical-no-monopoly", 60.0, supercritical_no_monopoly},
        {"critical-dichotomy", 120.0, critical_dichotomy},
        {"no-feedback-no-dominance", 0.0, no_feedback_no_dominance},
        {"identity-1101", 1.0, identity_1101},
        {"psi-noise-properties", 30.0, psi_noise_properties},
        {"deviation-tracking", 30.0, deviation_tracking},
    };
    return c;
}

}  // namespace

std::string CriterionResult::summary_line() const {
    std::ostringstream os;
    os << (pass ? "[PASS] " : "[FAIL] ") << id << " (" << seconds << " s)";
    return os.str();
}

const std::vector<std::string>& criterion_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> v;
        for (const auto& c : catalog()) v.push_back(c.id);
        return v;
    }();
    return ids;
}

CriterionResult run_criterion(const std::string& id, unsigned threads) {
    for (const auto& c : catalog()) {
        if (c.id != id) continue;
        CriterionResult res;
        res.id = id;
        res.pass = true;
        auto t0 = std::chrono::steady_clock::now();
        c.fn(res, threads);
        res.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.time_limit_s > 0.0 && res.seconds > c.time_limit_s) {
            res.pass = false;
            res.lines.push_back("  FAILED: runtime " + std::to_string(res.seconds) +
                                " s exceeds limit " + std::to_string(c.time_limit_s) + " s");
        }
        return res;
    }
    throw std::invalid_argument("unknown acceptance criterion: " + id);
}

std::vector<CriterionResult> run_all(unsigned threads) {
    std::vector<CriterionResult> out;
    for (const auto& id : criterion_ids()) out.push_back(run_criterion(id, threads));
    return out;
}

}  // namespace urnsim::acceptance
