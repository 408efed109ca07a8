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

#ifndef URNSIM_CLASSIFIER_HPP
#define URNSIM_CLASSIFIER_HPP

#include <optional>
#include <string>

#include "urnsim/sequences.hpp"

#include "json.hpp"

namespace urnsim {

enum class Regime {
    NoFeedback,
    Supercritical,
    SubcriticalBoundedRho,
    SubcriticalFastRho,
    Critical,
    Unclassifiable,
};

enum class Dominance { AlmostSure, Never, Unknown };
enum class Monopoly { AlmostSure, Never, StrictlyBetween, Unknown };

const char* to_string(Regime r);
const char* to_string(Dominance d);
const char* to_string(Monopoly m);

/// Everything the decision table consumes, with per-input confidence. Build
/// from closed-form asymptotics via inputs_from_analytic, or from finite-data
/// estimates via inputs_from_numeric (whose S/R/rho fields may stay unknown).
struct ClassifierInputs {
    Estimate theta{0.0, Confidence::Inconclusive};
    Estimate lambda{0.0, Confidence::Inconclusive};
    RhoClass rho_class = RhoClass::irregular();
    Confidence rho_confidence = Confidence::Inconclusive;
    SeriesVerdict series_sigma_tau_alpha = SeriesVerdict::Unknown;
    SeriesVerdict series_tau_tau_alpha = SeriesVerdict::Unknown;
    std::optional<bool> condition_S;
    std::optional<bool> condition_R;
};

ClassifierInputs inputs_from_analytic(const AnalyticAsymptotics& a);

/// Numeric fallback for sequences without closed forms. Monotonicity checks
/// feed the S/R flags; anything a finite window cannot settle stays unknown.
ClassifierInputs inputs_from_numeric(const GrowthSequence& seq, double alpha,
                                     std::size_t n_max);

/// Convenience: analytic when available, numeric otherwise.
ClassifierInputs make_inputs(const GrowthSequence& seq, double alpha, std::size_t n_max);

struct Provenance {
    int rule = 0;             // decision-table row that fired
    std::string rule_id;      // stable identifier of the mathematical result
    std::string detail;       // the inputs that fired the rule, human-readable
};

struct RegimeVerdict {
    Regime regime = Regime::Unclassifiable;
    Dominance dominance = Dominance::Unknown;
    Monopoly monopoly = Monopoly::Unknown;
    Provenance provenance;
    bool analytic_inputs = false;

    nlohmann::json to_json() const;
};

/// The decision table. Throws std::invalid_argument on internally
/// contradictory inputs (bounded rho with theta > 0) and std::logic_error if
/// the divergent-sigma-series cross-check contradicts the main rules.
/// In strict mode any non-analytic input is treated as unknown.
RegimeVerdict classify(double alpha, const ClassifierInputs& in, bool strict = false);

}  // namespace urnsim

#endif  // URNSIM_CLASSIFIER_HPP
