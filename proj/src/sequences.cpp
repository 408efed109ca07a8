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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "urnsim/logspace.hpp"

namespace urnsim {

namespace {

// Cap on the cumulative size of cached exact values, so factorial-like
// families at large horizons do not hoard gigabytes.
constexpr std::size_t kExactStorageCapBits = std::size_t(1) << 31;

// Multiplicative slack applied to certified bounds to absorb double rounding.
constexpr double kFloatSlack = 1.0 + 1e-9;

double family_log2_tau_estimate(const Family& f, const BigInt& tau0, std::size_t n) {
    // cheap overestimate of log2 tau_n used to stop the exact phase early
    double lt0 = tau0 > 0 ? static_cast<double>(bit_length(tau0)) : 1.0;
    return std::visit(
        [&](const auto& fam) -> double {
            using T = std::decay_t<decltype(fam)>;
            double dn = static_cast<double>(n);
            if constexpr (std::is_same_v<T, ConstantFamily>) {
                return lt0 + std::log2(1.0 + dn * static_cast<double>(fam.sigma));
            } else if constexpr (std::is_same_v<T, PolynomialFamily>) {
                return lt0 + (fam.degree + 1) * std::log2(dn + 2.0) +
                       std::log2(static_cast<double>(fam.coefficient) + 1.0);
            } else if constexpr (std::is_same_v<T, GeometricFamily>) {
                return lt0 + (dn + 2.0) * std::log2(static_cast<double>(fam.ratio)) +
                       std::log2(static_cast<double>(fam.coefficient) + 1.0);
            } else if constexpr (std::is_same_v<T, FactorialFamily>) {
                return lt0 + (std::lgamma(dn + 2.0) + dn) * 1.4426950408889634;
            } else if constexpr (std::is_same_v<T, DoublyExponentialTauFamily>) {
                return dn * std::log2(std::max(fam.b, 1.0)) +
                       fam.theta0 * std::pow(fam.base, dn) * 1.4426950408889634 + 2.0;
            } else if constexpr (std::is_same_v<T, DoublyExponentialSigmaFamily>) {
                return lt0 + 2.0 + (dn + 1.0) +
                       fam.c * std::pow(fam.base, dn) * 1.4426950408889634;
            } else {
                return 0.0;  // custom: decided by the actual values
            }
        },
        f);
}

}  // namespace

const char* to_string(Confidence c) {
    switch (c) {
        case Confidence::Analytic: return "analytic";
        case Confidence::NumericStable: return "numeric_stable";
        case Confidence::Inconclusive: return "inconclusive";
    }
    return "?";
}

const char* to_string(SeriesVerdict v) {
    switch (v) {
        case SeriesVerdict::Converges: return "converges";
        case SeriesVerdict::Diverges: return "diverges";
        case SeriesVerdict::Unknown: return "unknown";
    }
    return "?";
}

const char* to_string(RhoClass::Kind k) {
    switch (k) {
        case RhoClass::Kind::Bounded: return "bounded";
        case RhoClass::Kind::TendsToInfinity: return "tends_to_infinity";
        case RhoClass::Kind::Irregular: return "irregular";
    }
    return "?";
}

void AnalyticAsymptotics::validate() const {
    if (!(alpha >= 1.0)) throw std::invalid_argument("asymptotics: alpha must be >= 1");
    if (theta < 0 || lambda < 0)
        throw std::invalid_argument("asymptotics: theta and lambda must be nonnegative");
    if (rho_class.kind == RhoClass::Kind::Bounded && theta > 0 && alpha > 1)
        throw std::invalid_argument(
            "asymptotics: a bounded rho sequence forces theta = 0, got theta > 0");
}

// ---- construction ---------------------------------------------------------

GrowthSequence::GrowthSequence(Family family, BigInt tau0, std::size_t horizon,
                               std::size_t bit_budget)
    : family_(std::move(family)), horizon_(horizon) {
    if (horizon_ > (std::size_t(1) << 31))
        throw std::invalid_argument("growth sequence: horizon too large");
    if (const auto* cf = std::get_if<CustomFamily>(&family_)) {
        horizon_ = cf->values.size();
        if (cf->analytic) cf->analytic->validate();
    }
    if (std::holds_alternative<DoublyExponentialTauFamily>(family_)) {
        const auto& f = std::get<DoublyExponentialTauFamily>(family_);
        if (!(f.b > 0) || !(f.theta0 > 0) || !(f.base > 1))
            throw std::invalid_argument(
                "doubly-exponential tau family: need b > 0, theta0 > 0, base > 1");
        tau0 = floor_pow_exp(f.b, f.theta0, f.base, 0);
    }
    if (tau0 < 1) throw std::invalid_argument("growth sequence: tau0 must be >= 1");
    tau_.push_back(std::move(tau0));
    build_tables(bit_budget);
}

void GrowthSequence::build_tables(std::size_t bit_budget) {
    log_tau_.resize(horizon_ + 1);
    log_sigma_.assign(horizon_ + 1, 0.0);
    log_tau_[0] = log_bigint(tau_[0]);
    sigma_.resize(1);  // index 0 unused

    const bool is_dexp_tau = std::holds_alternative<DoublyExponentialTauFamily>(family_);
    const bool is_dexp_sigma = std::holds_alternative<DoublyExponentialSigmaFamily>(family_);
    if (is_dexp_sigma) {
        dexp_sigma_corr_.resize(horizon_ + 1, 0.0);
        dexp_sigma_corr_[0] = 0.0;
    }

    std::size_t stored_bits = bit_length(tau_[0]);
    BigInt scratch;  // geometric/factorial running value
    if (std::holds_alternative<GeometricFamily>(family_))
        scratch = std::get<GeometricFamily>(family_).coefficient;
    if (std::holds_alternative<FactorialFamily>(family_)) scratch = 1;

    std::size_t n = 1;
    for (; n <= horizon_; ++n) {
        // coarse overestimate first, so doubly-exponential families never
        // attempt a floor evaluation far beyond the budget; the exact cut
        // happens on the real bit length below
        if (family_log2_tau_estimate(family_, tau_[0], n) >
            static_cast<double>(bit_budget) + 64.0)
            break;
        BigInt s = std::visit(
            [&](const auto& fam) -> BigInt {
                using T = std::decay_t<decltype(fam)>;
                if constexpr (std::is_same_v<T, ConstantFamily>) {
                    return BigInt(fam.sigma);
                } else if constexpr (std::is_same_v<T, PolynomialFamily>) {
                    BigInt p;
                    mpz_ui_pow_ui(p.get_mpz_t(), n, fam.degree);
                    return p * fam.coefficient;
                } else if constexpr (std::is_same_v<T, GeometricFamily>) {
                    scratch *= fam.ratio;
                    return scratch;
                } else if constexpr (std::is_same_v<T, FactorialFamily>) {
                    scratch *= n;
                    return scratch;
                } else if constexpr (std::is_same_v<T, DoublyExponentialTauFamily>) {
                    return floor_pow_exp(fam.b, fam.theta0, fam.base,
                                         static_cast<unsigned>(n)) -
                           tau_[n - 1];
                } else if constexpr (std::is_same_v<T, DoublyExponentialSigmaFamily>) {
                    return floor_pow_exp(1.0, fam.c, fam.base, static_cast<unsigned>(n));
                } else {
                    return std::get<CustomFamily>(family_).values[n - 1];
                }
            },
            family_);
        if (s < 1)
            throw std::invalid_argument("growth sequence: sigma_" + std::to_string(n) +
                                        " < 1 on the requested horizon");
        BigInt t = tau_[n - 1] + s;
        std::size_t bits = bit_length(t);
        if (bits > bit_budget) break;
        stored_bits += bits + bit_length(s);
        log_sigma_[n] = log_bigint(s);
        log_tau_[n] = log_bigint(t);
        if (is_dexp_sigma) dexp_sigma_corr_[n] = log_tau_[n] - log_sigma_[n];
        sigma_.push_back(std::move(s));
        tau_.push_back(std::move(t));
        if (stored_bits > kExactStorageCapBits) {
            ++n;
            break;
        }
    }
    exact_through_ = n - 1;

    if (exact_through_ == horizon_) return;
    if (std::holds_alternative<CustomFamily>(family_))
        throw std::invalid_argument("custom sequence: values exceed the exact bit budget");

    // log-space continuation
    for (std::size_t m = exact_through_ + 1; m <= horizon_; ++m) {
        if (is_dexp_tau) {
            const auto& f = std::get<DoublyExponentialTauFamily>(family_);
            double lb = std::log(f.b);
            double pw = std::pow(f.base, static_cast<double>(m));
            log_tau_[m] = static_cast<double>(m) * lb + f.theta0 * pw;
            // ratio log(tau_m / tau_{m-1}) without large-log cancellation
            double r = lb + f.theta0 * std::pow(f.base, static_cast<double>(m - 1)) *
                                (f.base - 1.0);
            if (!(r > 0))
                throw std::invalid_argument(
                    "doubly-exponential tau family: tau not increasing at n = " +
                    std::to_string(m));
            log_sigma_[m] = log_tau_[m] + log1mexp(-r);
        } else if (is_dexp_sigma) {
            const auto& f = std::get<DoublyExponentialSigmaFamily>(family_);
            log_sigma_[m] = f.c * std::pow(f.base, static_cast<double>(m));
            double delta = f.c * std::pow(f.base, static_cast<double>(m - 1)) * (f.base - 1.0);
            dexp_sigma_corr_[m] = softplus(dexp_sigma_corr_[m - 1] - delta);
            log_tau_[m] = log_sigma_[m] + dexp_sigma_corr_[m];
        } else {
            log_sigma_[m] = closed_form_log_sigma(m);
            log_tau_[m] = log_add(log_tau_[m - 1], log_sigma_[m]);
        }
    }
}

double GrowthSequence::closed_form_log_sigma(std::size_t n) const {
    double dn = static_cast<double>(n);
    return std::visit(
        [&](const auto& fam) -> double {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, ConstantFamily>) {
                return std::log(static_cast<double>(fam.sigma));
            } else if constexpr (std::is_same_v<T, PolynomialFamily>) {
                return std::log(static_cast<double>(fam.coefficient)) +
                       fam.degree * std::log(dn);
            } else if constexpr (std::is_same_v<T, GeometricFamily>) {
                return std::log(static_cast<double>(fam.coefficient)) +
                       dn * std::log(static_cast<double>(fam.ratio));
            } else if constexpr (std::is_same_v<T, FactorialFamily>) {
                return std::lgamma(dn + 1.0);
            } else {
                throw std::logic_error("closed_form_log_sigma: unexpected family");
            }
        },
        family_);
}

GrowthSequence GrowthSequence::constant(std::uint64_t sigma, BigInt tau0, std::size_t horizon,
                                        std::size_t bit_budget) {
    if (sigma < 1) throw std::invalid_argument("constant family: sigma must be >= 1");
    return GrowthSequence(ConstantFamily{sigma}, std::move(tau0), horizon, bit_budget);
}

GrowthSequence GrowthSequence::polynomial(std::uint64_t coefficient, unsigned degree,
                                          BigInt tau0, std::size_t horizon,
                                          std::size_t bit_budget) {
    if (coefficient < 1) throw std::invalid_argument("polynomial family: coefficient >= 1");
    return GrowthSequence(PolynomialFamily{coefficient, degree}, std::move(tau0), horizon,
                          bit_budget);
}

GrowthSequence GrowthSequence::geometric(std::uint64_t coefficient, std::uint64_t ratio,
                                         BigInt tau0, std::size_t horizon,
                                         std::size_t bit_budget) {
    if (coefficient < 1 || ratio < 2)
        throw std::invalid_argument("geometric family: need coefficient >= 1, ratio >= 2");
    return GrowthSequence(GeometricFamily{coefficient, ratio}, std::move(tau0), horizon,
                          bit_budget);
}

GrowthSequence GrowthSequence::factorial(BigInt tau0, std::size_t horizon,
                                         std::size_t bit_budget) {
    return GrowthSequence(FactorialFamily{}, std::move(tau0), horizon, bit_budget);
}

GrowthSequence GrowthSequence::doubly_exponential_tau(double b, double theta0, double base,
                                                      std::size_t horizon,
                                                      std::size_t bit_budget) {
    return GrowthSequence(DoublyExponentialTauFamily{b, theta0, base}, BigInt(0), horizon,
                          bit_budget);
}

GrowthSequence GrowthSequence::doubly_exponential_sigma(double c, double base, BigInt tau0,
                                                        std::size_t horizon,
                                                        std::size_t bit_budget) {
    if (!(c > 0) || !(base > 1))
        throw std::invalid_argument("doubly-exponential sigma family: need c > 0, base > 1");
    return GrowthSequence(DoublyExponentialSigmaFamily{c, base}, std::move(tau0), horizon,
                          bit_budget);
}

GrowthSequence GrowthSequence::custom(std::vector<BigInt> values, BigInt tau0,
                                      std::optional<AnalyticAsymptotics> analytic,
                                      std::size_t bit_budget) {
    std::size_t n = values.size();
    return GrowthSequence(CustomFamily{std::move(values), std::move(analytic)},
                          std::move(tau0), n, bit_budget);
}

// ---- accessors -------------------------------------------------------------

const BigInt& GrowthSequence::sigma(std::size_t n) const {
    if (n < 1 || n > exact_through_)
        throw std::out_of_range("sigma: index " + std::to_string(n) +
                                " outside exact range [1, " +
                                std::to_string(exact_through_) + "]");
    return sigma_[n];
}

const BigInt& GrowthSequence::tau(std::size_t n) const {
    if (n > exact_through_)
        throw std::out_of_range("tau: index " + std::to_string(n) +
                                " outside exact range [0, " +
                                std::to_string(exact_through_) + "]");
    return tau_[n];
}

double GrowthSequence::log_sigma(std::size_t n) const {
    if (n < 1 || n > horizon_) throw std::out_of_range("log_sigma: index out of range");
    return log_sigma_[n];
}

double GrowthSequence::log_tau(std::size_t n) const {
    if (n > horizon_) throw std::out_of_range("log_tau: index out of range");
    return log_tau_[n];
}

double GrowthSequence::rho(std::size_t n) const {
    if (n + 1 <= exact_through_) return ratio_to_double(sigma_[n + 1], tau_[n]);
    return std::exp(log_sigma(n + 1) - log_tau(n));
}

double GrowthSequence::log_series_term(SeriesKind kind, double alpha, std::size_t i) const {
    if (i + 1 > horizon_) throw std::out_of_range("log_series_term: index out of range");
    if (i + 1 <= exact_through_) {
        double num = kind == SeriesKind::SigmaOverTauAlpha ? log_sigma_[i + 1] : log_tau_[i + 1];
        return num - alpha * log_tau_[i];
    }
    if (const auto* f = std::get_if<DoublyExponentialTauFamily>(&family_)) {
        double lb = std::log(f->b);
        double di = static_cast<double>(i);
        double pw = std::pow(f->base, di);
        // log tau_{i+1} - alpha log tau_i with the base^i growth cancelled
        // exactly; base == alpha kills the exponential part outright (pw may
        // be inf by then, so never form inf * 0)
        double grow = f->base == alpha ? 0.0 : f->theta0 * pw * (f->base - alpha);
        double core = lb * (di + 1.0 - alpha * di) + grow;
        if (kind == SeriesKind::TauOverTauAlpha) return core;
        double r = lb + f->theta0 * pw * (f->base - 1.0);
        return core + log1mexp(-r);
    }
    if (const auto* f = std::get_if<DoublyExponentialSigmaFamily>(&family_)) {
        double di = static_cast<double>(i);
        double pw = std::pow(f->base, di);
        double grow = f->base == alpha ? 0.0 : f->c * pw * (f->base - alpha);
        double core = grow - alpha * dexp_sigma_corr_[i];
        if (kind == SeriesKind::SigmaOverTauAlpha) return core;
        return core + dexp_sigma_corr_[i + 1];
    }
    double num = kind == SeriesKind::SigmaOverTauAlpha ? log_sigma_[i + 1] : log_tau_[i + 1];
    return num - alpha * log_tau_[i];
}

// ---- analytic asymptotics --------------------------------------------------

std::optional<AnalyticAsymptotics> GrowthSequence::analytic(double alpha) const {
    if (!(alpha >= 1.0)) throw std::invalid_argument("analytic: alpha must be >= 1");
    AnalyticAsymptotics a;
    a.alpha = alpha;
    const double tau0d = tau_[0].get_d();

    if (const auto* f = std::get_if<ConstantFamily>(&family_)) {
        a.theta = 0.0;
        a.lambda = 1.0;
        a.rho_class = RhoClass::bounded(static_cast<double>(f->sigma) / tau0d);
        a.series_sigma_tau_alpha = alpha > 1 ? SeriesVerdict::Converges : SeriesVerdict::Diverges;
        a.series_tau_tau_alpha = alpha > 2 ? SeriesVerdict::Converges : SeriesVerdict::Diverges;
        a.condition_S = a.condition_R = true;
        return a;
    }
    if (const auto* f = std::get_if<PolynomialFamily>(&family_)) {
        double d = f->degree;
        a.theta = 0.0;
        a.lambda = 1.0;
        double cap = std::max(static_cast<double>(f->coefficient) / tau0d,
                              (d + 1.0) * std::pow(2.0, d));
        a.rho_class = RhoClass::bounded(cap);
        a.series_sigma_tau_alpha = alpha > 1 ? SeriesVerdict::Converges : SeriesVerdict::Diverges;
        a.series_tau_tau_alpha =
            alpha > 1.0 + 1.0 / (d + 1.0) ? SeriesVerdict::Converges : SeriesVerdict::Diverges;
        a.condition_S = a.condition_R = true;
        return a;
    }
    if (const auto* f = std::get_if<GeometricFamily>(&family_)) {
        double r = static_cast<double>(f->ratio);
        a.theta = 0.0;
        a.lambda = std::pow(r, 1.0 - alpha);
        double rho0 = static_cast<double>(f->coefficient) * r / tau0d;
        a.rho_class = RhoClass::bounded(std::max(rho0, r - 1.0));
        a.series_sigma_tau_alpha = alpha > 1 ? SeriesVerdict::Converges : SeriesVerdict::Diverges;
        a.series_tau_tau_alpha = a.series_sigma_tau_alpha;
        a.condition_S = a.condition_R = true;
        return a;
    }
    if (std::holds_alternative<FactorialFamily>(family_)) {
        a.theta = 0.0;
        a.lambda = alpha > 1 ? 0.0 : 1.0;
        a.rho_class = RhoClass::tends_to_infinity();
        a.series_sigma_tau_alpha = alpha > 1 ? SeriesVerdict::Converges : SeriesVerdict::Diverges;
        a.series_tau_tau_alpha = a.series_sigma_tau_alpha;
        a.condition_S = a.condition_R = true;
        return a;
    }
    if (const auto* f = std::get_if<DoublyExponentialTauFamily>(&family_)) {
        double beta = f->base;
        if (beta < alpha) {
            a.theta = 0.0;
            a.lambda = 0.0;
            a.series_sigma_tau_alpha = a.series_tau_tau_alpha =
                alpha > 1 ? SeriesVerdict::Converges : SeriesVerdict::Diverges;
        } else if (beta == alpha) {
            a.theta = f->theta0;
            a.lambda = std::pow(f->b, 1.0 - alpha);
            a.series_sigma_tau_alpha = a.series_tau_tau_alpha =
                (alpha > 1 && f->b > 1) ? SeriesVerdict::Converges : SeriesVerdict::Diverges;
        } else {
            a.theta = kPosInf;
            a.lambda = kPosInf;
            a.series_sigma_tau_alpha = a.series_tau_tau_alpha = SeriesVerdict::Diverges;
        }
        a.rho_class = RhoClass::tends_to_infinity();
        a.condition_S = a.condition_R = true;
        return a;
    }
    if (const auto* f = std::get_if<DoublyExponentialSigmaFamily>(&family_)) {
        double beta = f->base;
        if (beta < alpha) {
            a.theta = 0.0;
            a.lambda = 0.0;
            a.series_sigma_tau_alpha = a.series_tau_tau_alpha =
                alpha > 1 ? SeriesVerdict::Converges : SeriesVerdict::Diverges;
        } else if (beta == alpha) {
            a.theta = f->c;
            a.lambda = 1.0;
            a.series_sigma_tau_alpha = a.series_tau_tau_alpha = SeriesVerdict::Diverges;
        } else {
            a.theta = kPosInf;
            a.lambda = kPosInf;
            a.series_sigma_tau_alpha = a.series_tau_tau_alpha = SeriesVerdict::Diverges;
        }
        a.rho_class = RhoClass::tends_to_infinity();
        a.condition_S = a.condition_R = true;
        return a;
    }
    const auto& cf = std::get<CustomFamily>(family_);
    if (cf.analytic && std::abs(cf.analytic->alpha - alpha) < 1e-12) return cf.analytic;
    return std::nullopt;
}

// ---- certified tails --------------------------------------------------------

std::optional<double> GrowthSequence::certified_sigma_tail(double alpha,
                                                           std::size_t from) const {
    if (!(alpha > 1.0)) return std::nullopt;
    if (from > horizon_) throw std::out_of_range("certified_sigma_tail: from out of range");

    // bounded-rho families: sum_{i>=m} sigma_{i+1}/tau_i^alpha
    //   <= (1+sup_{i>=m} rho_i)^alpha / (alpha-1) * tau_m^{1-alpha}
    auto integral_bound = [&](double sup_rho) -> double {
        return std::pow(1.0 + sup_rho, alpha) / (alpha - 1.0) *
               std::exp((1.0 - alpha) * log_tau(from)) * kFloatSlack;
    };

    if (const auto* f = std::get_if<ConstantFamily>(&family_)) {
        // rho is decreasing for a constant batch size
        double sup = static_cast<double>(f->sigma) * std::exp(-log_tau(from));
        return integral_bound(sup);
    }
    if (const auto* f = std::get_if<PolynomialFamily>(&family_)) {
        double d = f->degree;
        double sup = from >= 1 ? (d + 1.0) * std::pow(2.0, d) / static_cast<double>(from)
                               : std::max(static_cast<double>(f->coefficient) / tau_[0].get_d(),
                                          (d + 1.0) * std::pow(2.0, d));
        return integral_bound(sup);
    }
    if (const auto* f = std::get_if<GeometricFamily>(&family_)) {
        // rho_{n+1} = r rho_n / (1 + rho_n): monotone toward r-1 from rho_from
        double sup = std::max(rho(from) * kFloatSlack, static_cast<double>(f->ratio) - 1.0);
        return integral_bound(sup);
    }
    if (std::holds_alternative<FactorialFamily>(family_)) {
        // term ratio t_{i+1}/t_i = (i+2) (tau_i/tau_{i+1})^alpha <= Q(i),
        // Q(i) = (i+2) c^alpha / (i+1)^alpha with c = 2 + tau0/2, decreasing in i
        // (uses sum_{k<=i} k! <= 2 i!, valid for i >= 2)
        if (from < 2 || from + 1 > horizon_) return std::nullopt;
        double c = 2.0 + tau_[0].get_d() / 2.0;
        double df = static_cast<double>(from);
        double q = (df + 2.0) * std::pow(c, alpha) / std::pow(df + 1.0, alpha);
        if (!(q < 1.0)) return std::nullopt;
        double t_from = std::exp(log_series_term(SeriesKind::SigmaOverTauAlpha, alpha, from));
        return t_from / (1.0 - q) * kFloatSlack;
    }
    if (const auto* f = std::get_if<DoublyExponentialTauFamily>(&family_)) {
        // t_i <= C * exp(g(i)), g(i) = ln b (1 + i(1-alpha)) + theta0 base^i (base-alpha),
        // C = (1 - 1/tau_from)^{-alpha}; ratios bounded by exp(g(from+1)-g(from)) for
        // base <= alpha since the increments decrease.
        double beta = f->base;
        if (beta > alpha) return std::nullopt;
        double lb = std::log(f->b);
        double df = static_cast<double>(from);
        double pw = std::pow(beta, df);
        double decay = beta == alpha ? 0.0 : f->theta0 * pw * (beta - alpha);
        double log_q = (1.0 - alpha) * lb + decay * (beta - 1.0);
        if (!(log_q < 0)) return std::nullopt;
        double q = std::exp(log_q);
        double log_t_from = lb * (1.0 + df * (1.0 - alpha)) + decay;
        double inv_tau = std::exp(-log_tau(from));
        if (inv_tau >= 0.5) return std::nullopt;
        double logC = -alpha * std::log1p(-inv_tau);
        double bound = std::exp(logC + log_t_from) / (1.0 - q);
        return bound * kFloatSlack;
    }
    if (const auto* f = std::get_if<DoublyExponentialSigmaFamily>(&family_)) {
        double beta = f->base;
        if (beta >= alpha) return std::nullopt;
        double df = static_cast<double>(from);
        double pw = std::pow(beta, df);
        double log_q = f->c * pw * (beta - 1.0) * (beta - alpha);
        if (!(log_q < 0)) return std::nullopt;
        double q = std::exp(log_q);
        double u = std::exp(-f->c * pw);  // sigma_i >= e^{c beta^i} (1 - u) for i >= from
        if (u >= 0.5) return std::nullopt;
        double logC = -alpha * std::log1p(-u);
        double log_t_from = f->c * pw * (beta - alpha);
        return std::exp(logC + log_t_from) / (1.0 - q) * kFloatSlack;
    }
    const auto& cf = std::get<CustomFamily>(family_);
    if (cf.analytic && cf.analytic->rho_class.kind == RhoClass::Kind::Bounded &&
        std::abs(cf.analytic->alpha - alpha) < 1e-12)
        return integral_bound(cf.analytic->rho_class.bound);
    return std::nullopt;
}

std::string GrowthSequence::describe() const {
    std::ostringstream os;
    std::visit(
        [&](const auto& fam) {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, ConstantFamily>) {
                os << "constant(sigma=" << fam.sigma << ")";
            } else if constexpr (std::is_same_v<T, PolynomialFamily>) {
                os << "polynomial(c=" << fam.coefficient << ", degree=" << fam.degree << ")";
            } else if constexpr (std::is_same_v<T, GeometricFamily>) {
                os << "geometric(c=" << fam.coefficient << ", ratio=" << fam.ratio << ")";
            } else if constexpr (std::is_same_v<T, FactorialFamily>) {
                os << "factorial";
            } else if constexpr (std::is_same_v<T, DoublyExponentialTauFamily>) {
                os << "doubly_exponential_tau(b=" << fam.b << ", theta0=" << fam.theta0
                   << ", base=" << fam.base << ")";
            } else if constexpr (std::is_same_v<T, DoublyExponentialSigmaFamily>) {
                os << "doubly_exponential_sigma(c=" << fam.c << ", base=" << fam.base << ")";
            } else {
                os << "custom(" << std::get<CustomFamily>(family_).values.size() << " values)";
            }
        },
        family_);
    os << ", tau0=" << tau_[0].get_str();
    return os.str();
}

// ---- functionals ------------------------------------------------------------

Estimate estimate_theta(const GrowthSequence& seq, double alpha, std::size_t n_max,
                        bool force_numeric) {
    if (!(alpha > 1.0)) throw std::domain_error("estimate_theta: alpha must be > 1");
    if (n_max < 8) throw std::invalid_argument("estimate_theta: n_max must be >= 8");
    if (n_max > seq.horizon()) throw std::out_of_range("estimate_theta: n_max beyond horizon");
    if (!force_numeric) {
        if (auto a = seq.analytic(alpha)) return {a->theta, Confidence::Analytic};
    }
    double la = std::log(alpha);
    auto g = [&](std::size_t n) {
        return std::exp(-static_cast<double>(n) * la) * seq.log_tau(n);
    };
    double g_last = g(n_max);
    double g_prev = g(n_max - 1);
    double tol = 1e-4 * std::max(1.0, std::abs(g_last));
    Confidence conf =
        std::abs(g_last - g_prev) < tol ? Confidence::NumericStable : Confidence::Inconclusive;
    return {g_last, conf};
}

Estimate estimate_lambda(const GrowthSequence& seq, double alpha, std::size_t n_max,
                         bool force_numeric) {
    if (n_max < 4) throw std::invalid_argument("estimate_lambda: n_max must be >= 4");
    if (n_max + 1 > seq.horizon())
        throw std::out_of_range("estimate_lambda: needs sigma up to n_max + 1");
    if (!force_numeric) {
        if (auto a = seq.analytic(alpha)) return {a->lambda, Confidence::Analytic};
    }
    std::size_t w_begin = std::max<std::size_t>(2, n_max / 2);
    std::size_t w_probe = w_begin + (n_max - w_begin) * 3 / 4;
    double run_max = kNegInf;
    double max_at_probe = kNegInf;
    for (std::size_t n = w_begin; n <= n_max; ++n) {
        double ll = seq.log_sigma(n + 1) + alpha * seq.log_sigma(n - 1) -
                    (alpha + 1.0) * seq.log_sigma(n);
        run_max = std::max(run_max, ll);
        if (n == w_probe) max_at_probe = run_max;
    }
    Confidence conf = run_max <= max_at_probe + std::log(1.01) ? Confidence::NumericStable
                                                               : Confidence::Inconclusive;
    return {std::exp(run_max), conf};
}

SeriesTail series_tail(const GrowthSequence& seq, double alpha, SeriesKind kind,
                       std::size_t from, std::size_t horizon) {
    if (horizon <= from) throw std::invalid_argument("series_tail: horizon must exceed from");
    if (horizon + 1 > seq.horizon())
        throw std::out_of_range("series_tail: horizon beyond sequence tables");
    SeriesTail out;
    double log_sum = kNegInf;
    std::size_t q_begin = horizon - (horizon - from) / 4;
    double prev_term = kNegInf;
    double min_ratio = kPosInf, max_ratio = kNegInf, last_term = kNegInf;
    for (std::size_t i = from; i <= horizon; ++i) {
        double lt = seq.log_series_term(kind, alpha, i);
        log_sum = log_add(log_sum, lt);
        if (i >= q_begin) {
            if (prev_term != kNegInf) {
                double r = lt - prev_term;
                min_ratio = std::min(min_ratio, r);
                max_ratio = std::max(max_ratio, r);
            }
            last_term = lt;
        }
        prev_term = lt;
    }
    out.log_partial_sum = log_sum;
    out.partial_sum = std::exp(log_sum);

    if (kind == SeriesKind::SigmaOverTauAlpha) {
        if (auto a = seq.analytic(alpha);
            a && a->rho_class.kind == RhoClass::Kind::Bounded && horizon + 1 <= seq.horizon())
            out.tail_bound = seq.certified_sigma_tail(alpha, horizon + 1);
    }

    if (auto a = seq.analytic(alpha)) {
        out.verdict = kind == SeriesKind::SigmaOverTauAlpha ? a->series_sigma_tau_alpha
                                                            : a->series_tau_tau_alpha;
        return out;
    }
    // ratio heuristic over the last quarter of computed terms
    if (max_ratio != kNegInf) {
        if (std::exp(max_ratio) <= 0.99) {
            out.verdict = SeriesVerdict::Converges;
        } else if (min_ratio >= 0.0 || std::exp(last_term) > 0.1) {
            out.verdict = SeriesVerdict::Diverges;
        }
    }
    return out;
}

double check_identity_1101(const GrowthSequence& seq, std::size_t n) {
    if (n < 1) throw std::invalid_argument("check_identity_1101: n must be >= 1");
    if (n > seq.exact_through())
        throw std::out_of_range("check_identity_1101: n beyond exact range");
    KahanSumL sum;
    for (std::size_t k = 1; k <= n; ++k) {
        long double x = ratio_to_long_double(seq.sigma(k), seq.tau(k));
        if (x <= 0.5L) {
            sum.add(-std::log1p(-x));
        } else {
            sum.add(log_bigint_l(seq.tau(k)) - log_bigint_l(seq.tau(k - 1)));
        }
    }
    long double rhs = log_bigint_l(seq.tau(n)) - log_bigint_l(seq.tau(0));
    return static_cast<double>(std::fabs(sum.value() - rhs));
}

}  // namespace urnsim
