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

#include "urnsim/classifier.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "urnsim/logspace.hpp"

namespace urnsim {

const char* to_string(Regime r) {
    switch (r) {
        case Regime::NoFeedback: return "no_feedback";
        case Regime::Supercritical: return "supercritical";
        case Regime::SubcriticalBoundedRho: return "subcritical_bounded_rho";
        case Regime::SubcriticalFastRho: return "subcritical_fast_rho";
        case Regime::Critical: return "critical";
        case Regime::Unclassifiable: return "unclassifiable";
    }
    return "?";
}

const char* to_string(Dominance d) {
    switch (d) {
        case Dominance::AlmostSure: return "almost_sure";
        case Dominance::Never: return "never";
        case Dominance::Unknown: return "unknown";
    }
    return "?";
}

const char* to_string(Monopoly m) {
    switch (m) {
        case Monopoly::AlmostSure: return "almost_sure";
        case Monopoly::Never: return "never";
        case Monopoly::StrictlyBetween: return "strictly_between";
        case Monopoly::Unknown: return "unknown";
    }
    return "?";
}

ClassifierInputs inputs_from_analytic(const AnalyticAsymptotics& a) {
    a.validate();
    ClassifierInputs in;
    in.theta = {a.theta, Confidence::Analytic};
    in.lambda = {a.lambda, Confidence::Analytic};
    in.rho_class = a.rho_class;
    in.rho_confidence = Confidence::Analytic;
    in.series_sigma_tau_alpha = a.series_sigma_tau_alpha;
    in.series_tau_tau_alpha = a.series_tau_tau_alpha;
    in.condition_S = a.condition_S;
    in.condition_R = a.condition_R;
    return in;
}

ClassifierInputs inputs_from_numeric(const GrowthSequence& seq, double alpha,
                                     std::size_t n_max) {
    n_max = std::min(n_max, seq.horizon() > 1 ? seq.horizon() - 1 : std::size_t(1));
    ClassifierInputs in;
    in.theta = estimate_theta(seq, alpha, std::max<std::size_t>(8, n_max), true);
    in.lambda = estimate_lambda(seq, alpha, std::max<std::size_t>(4, n_max), true);

    // monotone sigma settles (S); monotone rho is evidence for (R)
    bool sigma_monotone = true;
    for (std::size_t n = 2; n <= n_max; ++n)
        if (seq.log_sigma(n) < seq.log_sigma(n - 1)) sigma_monotone = false;
    if (sigma_monotone) in.condition_S = true;

    double rho_first = seq.rho(0);
    double rho_last = seq.rho(n_max - 1);
    bool rho_inc = true, rho_dec = true;
    double rho_max = 0.0;
    for (std::size_t n = 1; n < n_max; ++n) {
        double a = seq.rho(n - 1), b = seq.rho(n);
        rho_inc &= b >= a * 0.999;
        rho_dec &= b <= a * 1.001;
        rho_max = std::max(rho_max, std::max(a, b));
    }
    if (rho_inc && rho_last > 4.0 * std::max(rho_first, 1.0)) {
        in.rho_class = RhoClass::tends_to_infinity();
        in.rho_confidence = Confidence::NumericStable;
        in.condition_R = true;
    } else if (rho_dec) {
        in.rho_class = RhoClass::bounded(rho_max);
        in.rho_confidence = Confidence::NumericStable;
        in.condition_R = true;
    }

    SeriesTail st = series_tail(seq, alpha, SeriesKind::SigmaOverTauAlpha, 0, n_max - 1);
    in.series_sigma_tau_alpha = st.verdict;
    SeriesTail tt = series_tail(seq, alpha, SeriesKind::TauOverTauAlpha, 0, n_max - 1);
    in.series_tau_tau_alpha = tt.verdict;
    return in;
}

ClassifierInputs make_inputs(const GrowthSequence& seq, double alpha, std::size_t n_max) {
    if (auto a = seq.analytic(alpha)) return inputs_from_analytic(*a);
    return inputs_from_numeric(seq, alpha, n_max);
}

nlohmann::json RegimeVerdict::to_json() const {
    return nlohmann::json{
        {"regime", to_string(regime)},
        {"dominance", to_string(dominance)},
        {"monopoly", to_string(monopoly)},
        {"provenance",
         {{"rule", provenance.rule},
          {"rule_id", provenance.rule_id},
          {"inputs", provenance.detail}}},
        {"analytic_inputs", analytic_inputs},
    };
}

namespace {

std::string describe_inputs(double alpha, const ClassifierInputs& in) {
    std::ostringstream os;
    os << "alpha=" << alpha;
    os << ", theta=" << in.theta.value << " (" << to_string(in.theta.confidence) << ")";
    os << ", lambda=" << in.lambda.value << " (" << to_string(in.lambda.confidence) << ")";
    os << ", rho=" << to_string(in.rho_class.kind);
    if (in.rho_class.kind == RhoClass::Kind::Bounded) os << "<=" << in.rho_class.bound;
    os << ", series_sigma=" << to_string(in.series_sigma_tau_alpha);
    os << ", series_tau=" << to_string(in.series_tau_tau_alpha);
    auto tri = [](std::optional<bool> v) { return v ? (*v ? "yes" : "no") : "unknown"; };
    os << ", S=" << tri(in.condition_S) << ", R=" << tri(in.condition_R);
    return os.str();
}

}  // namespace

RegimeVerdict classify(double alpha, const ClassifierInputs& input, bool strict) {
    if (!(alpha >= 1.0)) throw std::invalid_argument("classify: alpha must be >= 1");

    ClassifierInputs in = input;
    if (strict) {
        auto degrade = [](Confidence c) { return c == Confidence::Analytic; };
        if (!degrade(in.theta.confidence)) in.theta.confidence = Confidence::Inconclusive;
        if (!degrade(in.lambda.confidence)) in.lambda.confidence = Confidence::Inconclusive;
        if (!degrade(in.rho_confidence)) {
            in.rho_class = RhoClass::irregular();
            in.rho_confidence = Confidence::Inconclusive;
            in.condition_S.reset();
            in.condition_R.reset();
            in.series_sigma_tau_alpha = SeriesVerdict::Unknown;
            in.series_tau_tau_alpha = SeriesVerdict::Unknown;
        }
    }

    RegimeVerdict v;
    v.analytic_inputs = in.theta.confidence == Confidence::Analytic &&
                        in.lambda.confidence == Confidence::Analytic &&
                        in.rho_confidence == Confidence::Analytic;
    v.provenance.detail = describe_inputs(alpha, in);

    // rule 1: no feedback
    if (alpha == 1.0) {
        v.regime = Regime::NoFeedback;
        v.dominance = Dominance::Never;
        v.monopoly = Monopoly::Never;
        v.provenance.rule = 1;
        v.provenance.rule_id = "no-feedback-martingale-limit";
        return v;
    }

    const bool theta_usable = in.theta.confidence != Confidence::Inconclusive;
    const bool rho_usable = in.rho_confidence != Confidence::Inconclusive;
    // a numeric theta estimate is "zero" below the estimator's own tolerance
    const bool theta_zero =
        theta_usable && (in.theta.confidence == Confidence::Analytic
                             ? in.theta.value == 0.0
                             : std::abs(in.theta.value) < 1e-4);
    const bool rho_bounded = rho_usable && in.rho_class.kind == RhoClass::Kind::Bounded;

    // reject contradictory analytic metadata: bounded rho forces theta = 0
    if (rho_bounded && in.rho_confidence == Confidence::Analytic &&
        in.theta.confidence == Confidence::Analytic && in.theta.value > 0.0)
        throw std::invalid_argument(
            "classify: inconsistent inputs; bounded rho forces theta = 0 but theta > 0 "
            "was supplied");

    // rule 2: regularity conditions give almost-sure dominance
    if (in.condition_S.value_or(false) && in.condition_R.value_or(false)) {
        v.dominance = Dominance::AlmostSure;
        v.provenance.rule = 2;
        v.provenance.rule_id = "regular-growth-dominance";
    }

    const bool s_holds = in.condition_S.value_or(false);

    if (!theta_usable) {
        v.regime = Regime::Unclassifiable;
        if (v.provenance.rule_id.empty()) v.provenance.rule_id = "theta-inconclusive";
    } else if (std::isinf(in.theta.value)) {
        // rule 3: supercritical
        v.regime = Regime::Supercritical;
        v.monopoly = Monopoly::Never;
        v.provenance.rule = 3;
        v.provenance.rule_id = "supercritical-no-monopoly";
    } else if (theta_zero) {
        if (rho_bounded) {
            v.regime = Regime::SubcriticalBoundedRho;
            if (s_holds) {
                // rule 4: bounded rho gives monopoly
                v.monopoly = Monopoly::AlmostSure;
                v.provenance.rule = 4;
                v.provenance.rule_id = "bounded-rho-monopoly";
            }
        } else if (rho_usable && in.rho_class.kind == RhoClass::Kind::TendsToInfinity) {
            v.regime = Regime::SubcriticalFastRho;
            if (s_holds && in.lambda.confidence != Confidence::Inconclusive) {
                // rule 5: the lambda dichotomy; lambda == 1 stays unknown
                if (in.lambda.value < 1.0) {
                    v.monopoly = Monopoly::AlmostSure;
                    v.provenance.rule = 5;
                    v.provenance.rule_id = "fast-rho-lambda-below-one-monopoly";
                } else if (in.lambda.value > 1.0) {
                    v.monopoly = Monopoly::Never;
                    v.provenance.rule = 5;
                    v.provenance.rule_id = "fast-rho-lambda-above-one-no-monopoly";
                }
            }
        } else {
            v.regime = Regime::Unclassifiable;
        }
    } else {
        // rule 6: critical regime, decided by the tau series
        v.regime = Regime::Critical;
        if (in.series_tau_tau_alpha == SeriesVerdict::Diverges) {
            v.monopoly = Monopoly::Never;
            v.provenance.rule = 6;
            v.provenance.rule_id = "critical-divergent-tau-series-no-monopoly";
        } else if (in.series_tau_tau_alpha == SeriesVerdict::Converges) {
            v.monopoly = Monopoly::StrictlyBetween;
            v.provenance.rule = 6;
            v.provenance.rule_id = "critical-convergent-tau-series-mixed-monopoly";
        }
    }

    // rule 7: a divergent sigma series rules out monopoly unconditionally
    if (in.series_sigma_tau_alpha == SeriesVerdict::Diverges) {
        if (v.monopoly == Monopoly::AlmostSure || v.monopoly == Monopoly::StrictlyBetween)
            throw std::logic_error(
                "classify: internal contradiction; divergent sigma series excludes "
                "monopoly but rules 3-6 predicted it (" + v.provenance.detail + ")");
        if (v.monopoly == Monopoly::Unknown) {
            v.monopoly = Monopoly::Never;
            v.provenance.rule = 7;
            v.provenance.rule_id = "divergent-sigma-series-no-monopoly";
        }
    }

    // monopoly implies dominance
    if (v.monopoly == Monopoly::AlmostSure) {
        if (v.dominance == Dominance::Never)
            throw std::logic_error("classify: monopoly almost sure with dominance never");
        v.dominance = Dominance::AlmostSure;
    }
    return v;
}

}  // namespace urnsim
