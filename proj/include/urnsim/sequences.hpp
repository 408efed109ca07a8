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

#ifndef URNSIM_SEQUENCES_HPP
#define URNSIM_SEQUENCES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "urnsim/bigint.hpp"

namespace urnsim {

enum class Confidence { Analytic, NumericStable, Inconclusive };
enum class SeriesVerdict { Converges, Diverges, Unknown };
enum class SeriesKind { SigmaOverTauAlpha, TauOverTauAlpha };

const char* to_string(Confidence c);
const char* to_string(SeriesVerdict v);

struct RhoClass {
    enum class Kind { Bounded, TendsToInfinity, Irregular };
    Kind kind = Kind::Irregular;
    double bound = 0.0;  // sup_n rho_n, meaningful only when Bounded

    static RhoClass bounded(double b) { return {Kind::Bounded, b}; }
    static RhoClass tends_to_infinity() { return {Kind::TendsToInfinity, 0.0}; }
    static RhoClass irregular() { return {Kind::Irregular, 0.0}; }
};

const char* to_string(RhoClass::Kind k);

/// Closed-form limit data for one growth sequence at one fixed alpha.
/// theta and lambda use +infinity for the extended value.
struct AnalyticAsymptotics {
    double alpha = 0.0;
    double theta = 0.0;
    double lambda = 0.0;
    RhoClass rho_class;
    SeriesVerdict series_sigma_tau_alpha = SeriesVerdict::Unknown;
    SeriesVerdict series_tau_tau_alpha = SeriesVerdict::Unknown;
    bool condition_S = false;
    bool condition_R = false;

    /// Throws std::invalid_argument on internally inconsistent data
    /// (a bounded rho sequence forces theta = 0).
    void validate() const;
};

struct Estimate {
    double value = 0.0;
    Confidence confidence = Confidence::Inconclusive;
};

// ---- growth-sequence families -------------------------------------------

struct ConstantFamily {
    std::uint64_t sigma = 1;
};

/// sigma_n = coefficient * n^degree
struct PolynomialFamily {
    std::uint64_t coefficient = 1;
    unsigned degree = 1;
};

/// sigma_n = coefficient * ratio^n
struct GeometricFamily {
    std::uint64_t coefficient = 1;
    std::uint64_t ratio = 2;
};

/// sigma_n = n!
struct FactorialFamily {};

/// tau_n = floor(b^n * exp(theta0 * base^n)); sigma_n = tau_n - tau_{n-1}.
/// tau_0 is determined by the formula.
struct DoublyExponentialTauFamily {
    double b = 1.0;
    double theta0 = 1.0;
    double base = 2.0;
};

/// sigma_n = floor(exp(c * base^n))
struct DoublyExponentialSigmaFamily {
    double c = 1.0;
    double base = 2.0;
};

/// Explicit sigma values (may be empty when only classification is needed),
/// with optional user-supplied asymptotics.
struct CustomFamily {
    std::vector<BigInt> values;
    std::optional<AnalyticAsymptotics> analytic;
};

using Family = std::variant<ConstantFamily, PolynomialFamily, GeometricFamily,
                            FactorialFamily, DoublyExponentialTauFamily,
                            DoublyExponentialSigmaFamily, CustomFamily>;

// ---- GrowthSequence ------------------------------------------------------

/// Immutable evaluation of one (sigma_n) family: exact integer values while
/// tau stays within the bit budget, log-space values for every index up to
/// the construction horizon. Safe to share read-only across threads.
class GrowthSequence {
public:
    static constexpr std::size_t kDefaultBitBudget = 1'000'000;

    GrowthSequence(Family family, BigInt tau0, std::size_t horizon,
                   std::size_t bit_budget = kDefaultBitBudget);

    static GrowthSequence constant(std::uint64_t sigma, BigInt tau0, std::size_t horizon,
                                   std::size_t bit_budget = kDefaultBitBudget);
    static GrowthSequence polynomial(std::uint64_t coefficient, unsigned degree, BigInt tau0,
                                     std::size_t horizon,
                                     std::size_t bit_budget = kDefaultBitBudget);
    static GrowthSequence geometric(std::uint64_t coefficient, std::uint64_t ratio, BigInt tau0,
                                    std::size_t horizon,
                                    std::size_t bit_budget = kDefaultBitBudget);
    static GrowthSequence factorial(BigInt tau0, std::size_t horizon,
                                    std::size_t bit_budget = kDefaultBitBudget);
    /// tau0 comes from the formula, not from the caller.
    static GrowthSequence doubly_exponential_tau(double b, double theta0, double base,
                                                 std::size_t horizon,
                                                 std::size_t bit_budget = kDefaultBitBudget);
    static GrowthSequence doubly_exponential_sigma(double c, double base, BigInt tau0,
                                                   std::size_t horizon,
                                                   std::size_t bit_budget = kDefaultBitBudget);
    static GrowthSequence custom(std::vector<BigInt> values, BigInt tau0,
                                 std::optional<AnalyticAsymptotics> analytic,
                                 std::size_t bit_budget = kDefaultBitBudget);

    const Family& family() const { return family_; }
    const BigInt& tau0() const { return tau_[0]; }
    std::size_t horizon() const { return horizon_; }

    /// Largest n with exact sigma/tau values available.
    std::size_t exact_through() const { return exact_through_; }
    bool exact_at(std::size_t n) const { return n <= exact_through_; }

    /// Exact values; throw std::out_of_range beyond exact_through()/horizon().
    const BigInt& sigma(std::size_t n) const;
    const BigInt& tau(std::size_t n) const;

    /// log sigma_n / log tau_n for any n <= horizon (n >= 1 for sigma).
    double log_sigma(std::size_t n) const;
    double log_tau(std::size_t n) const;

    /// rho_n = sigma_{n+1} / tau_n, as a double.
    double rho(std::size_t n) const;

    /// log of term i of the series sum_i sigma_{i+1}/tau_i^alpha (or the tau
    /// variant). For fast-growing families this is computed from per-family
    /// cancellations, never by differencing astronomically large logs.
    double log_series_term(SeriesKind kind, double alpha, std::size_t i) const;

    /// Closed-form asymptotics for the given alpha, when the family has them.
    std::optional<AnalyticAsymptotics> analytic(double alpha) const;

    /// Rigorous upper bound on sum_{i>=from} sigma_{i+1}/tau_i^alpha, when the
    /// family supports one (bounded-rho integral bound or a certified
    /// geometric term-ratio bound). Returns nullopt otherwise; never
    /// underestimates the true tail.
    std::optional<double> certified_sigma_tail(double alpha, std::size_t from) const;

    std::string describe() const;

private:
    void build_tables(std::size_t bit_budget);
    double closed_form_log_sigma(std::size_t n) const;

    Family family_;
    std::size_t horizon_;
    std::size_t exact_through_ = 0;
    std::vector<BigInt> sigma_;      // index 1..exact_through_
    std::vector<BigInt> tau_;        // index 0..exact_through_
    std::vector<double> log_sigma_;  // index 1..horizon_
    std::vector<double> log_tau_;    // index 0..horizon_
    std::vector<double> dexp_sigma_corr_;  // log(tau_n / sigma_n) for the sigma-side family
};

// ---- functionals ---------------------------------------------------------

/// Growth parameter via g_n = alpha^{-n} log tau_n. Analytic metadata wins
/// unless force_numeric is set. Requires alpha > 1, n_max >= 8.
Estimate estimate_theta(const GrowthSequence& seq, double alpha, std::size_t n_max,
                        bool force_numeric = false);

/// Running max of lambda_n = sigma_{n+1} sigma_{n-1}^alpha / sigma_n^{alpha+1}
/// over the tail window [n_max/2, n_max]. Requires n_max >= 4.
Estimate estimate_lambda(const GrowthSequence& seq, double alpha, std::size_t n_max,
                         bool force_numeric = false);

struct SeriesTail {
    double partial_sum = 0.0;      // may be +inf for wildly divergent series
    double log_partial_sum = 0.0;  // always finite information
    std::optional<double> tail_bound;
    SeriesVerdict verdict = SeriesVerdict::Unknown;
};

SeriesTail series_tail(const GrowthSequence& seq, double alpha, SeriesKind kind,
                       std::size_t from, std::size_t horizon);

/// | sum_{k=1..n} -log(1 - sigma_k/tau_k) - log(tau_n/tau_0) |. The identity
/// is exact; the returned value is floating error only. n must stay within
/// exact_through().
double check_identity_1101(const GrowthSequence& seq, std::size_t n);

}  // namespace urnsim

#endif  // URNSIM_SEQUENCES_HPP
