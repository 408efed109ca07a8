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
#include <stdexcept>

namespace urnsim {

namespace {
constexpr double kLogHalf = -0.6931471805599453;
}

const char* to_string(Kernel k) {
    return k == Kernel::IndependentBinomial ? "independent_binomial" : "bulk_placement";
}

const char* to_string(CountMode m) { return m == CountMode::Exact ? "exact" : "float"; }

void ModelParams::validate() const {
    if (!(alpha >= 1.0))
        throw std::invalid_argument("model: alpha must be >= 1 (negative feedback unsupported)");
    if (!seq) throw std::invalid_argument("model: growth sequence missing");
    if (t0 <= 0 || t0 >= seq->tau0())
        throw std::invalid_argument("model: initial count must satisfy 0 < T0 < tau0");
}

ProcessState initial_state(const ModelParams& params) {
    params.validate();
    ProcessState s;
    s.n = 0;
    s.mode = CountMode::Exact;
    s.t = params.t0;
    s.u = params.seq->tau0() - params.t0;
    s.log_t = log_bigint(s.t);
    s.log_u = log_bigint(s.u);
    double lt = params.seq->log_tau(0);
    s.log_theta = s.log_t - lt;
    s.log_one_minus_theta = s.log_u - lt;
    return s;
}

double psi(double x, double alpha) {
    if (std::isnan(x) || std::isnan(alpha)) throw std::domain_error("psi: NaN input");
    if (x < 0.0 || x > 1.0) throw std::domain_error("psi: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    if (alpha == 1.0) return x;
    return 1.0 / (1.0 + std::exp(alpha * (std::log1p(-x) - std::log(x))));
}

double log_psi(double log_x, double log_1mx, double alpha) {
    if (log_x == kNegInf) return kNegInf;
    if (log_1mx == kNegInf) return 0.0;
    return -softplus(alpha * (log_1mx - log_x));
}

namespace {

double binomial_epsilon(double b, double n, double p, double one_minus_p) {
    double var = n * p * one_minus_p;
    if (!(var > 0.0)) return 0.0;
    return (b - n * p) / std::sqrt(var);
}

BinomialDraw exact_draw(std::uint64_t n, double p, Rng& rng) {
    BinomialDraw d;
    std::uint64_t b = n == 1 ? (rng.bernoulli(p) ? 1 : 0) : rng.binomial(n, p);
    d.count = static_cast<double>(b);
    d.log_count = b == 0 ? kNegInf : std::log(d.count);
    d.epsilon = (p > 0.0 && p < 1.0)
                    ? binomial_epsilon(d.count, static_cast<double>(n), p, 1.0 - p)
                    : 0.0;
    d.is_integer = true;
    return d;
}

}  // namespace

BinomialDraw sample_binomial_log(double log_size, double log_p, double log_1mp, Rng& rng,
                                 const SamplerLimits& limits) {
    if (std::isnan(log_size) || std::isnan(log_p) || std::isnan(log_1mp))
        throw std::invalid_argument("sample_binomial: NaN input");
    if (log_p > 1e-12 || log_1mp > 1e-12)
        throw std::invalid_argument("sample_binomial: p outside [0, 1]");
    log_p = std::min(log_p, 0.0);
    log_1mp = std::min(log_1mp, 0.0);

    BinomialDraw d;
    if (log_size == kNegInf) return d;
    if (log_p == kNegInf) return d;  // deterministic zero
    if (log_1mp == kNegInf) {        // deterministic full batch
        d.count = std::exp(log_size);
        d.log_count = log_size;
        d.is_integer = d.count < 9.0e15;
        return d;
    }
    if (log_p > kLogHalf) {
        BinomialDraw c = sample_binomial_log(log_size, log_1mp, log_p, rng, limits);
        d.log_count = log_sub(log_size, c.log_count);
        d.count = std::exp(d.log_count);
        d.epsilon = -c.epsilon;
        d.is_integer = d.count < 9.0e15;
        return d;
    }

    double size_d = std::exp(log_size);
    if (size_d <= static_cast<double>(limits.exact_size_cutoff))
        return exact_draw(static_cast<std::uint64_t>(std::llround(size_d)), std::exp(log_p),
                          rng);

    double log_mean = log_size + log_p;
    double p = std::exp(log_p);
    if (log_mean <= std::log(limits.poisson_mean_cutoff)) {
        double mean = std::exp(log_mean);
        std::uint64_t b = rng.poisson(mean);
        d.count = static_cast<double>(b);
        d.log_count = b == 0 ? kNegInf : std::log(d.count);
        double var = mean * std::exp(log_1mp);
        d.epsilon = var > 0.0 ? (d.count - mean) / std::sqrt(var) : 0.0;
        d.is_integer = true;
        return d;
    }

    // gaussian branch: B = mean (1 + z sd/mean), all in logs
    double z = rng.normal();
    double log_kappa = 0.5 * (log_1mp - log_mean);  // sd over mean
    double kappa = std::exp(log_kappa);
    d.epsilon = z;
    if (1.0 + z * kappa <= 0.0) return d;  // clamp at zero
    double log_b = log_mean + std::log1p(z * kappa);
    if (log_b > log_size) log_b = log_size;  // clamp at size
    double b_d = std::exp(log_b);
    if (b_d < 9.0e15) {
        b_d = std::round(b_d);
        log_b = b_d > 0 ? std::log(b_d) : kNegInf;
        d.is_integer = true;
    } else {
        d.is_integer = false;
    }
    d.count = b_d;
    d.log_count = log_b;
    (void)p;
    return d;
}

BinomialDraw sample_binomial(std::uint64_t size, double p, Rng& rng,
                             const SamplerLimits& limits) {
    if (std::isnan(p)) throw std::invalid_argument("sample_binomial: NaN input");
    if (p < -1e-12 || p > 1.0 + 1e-12)
        throw std::invalid_argument("sample_binomial: p outside [0, 1]");
    p = std::min(1.0, std::max(0.0, p));
    if (size == 0) return {};
    if (size <= limits.exact_size_cutoff) return exact_draw(size, p, rng);
    double log_p = p > 0 ? std::log(p) : kNegInf;
    double log_1mp = p < 1 ? std::log1p(-p) : kNegInf;
    return sample_binomial_log(std::log(static_cast<double>(size)), log_p, log_1mp, rng,
                               limits);
}

BigBinomialDraw sample_binomial_big(const BigInt& size, double log_p, double log_1mp,
                                    Rng& rng, const SamplerLimits& limits) {
    BigBinomialDraw out;
    if (size < 0) throw std::invalid_argument("sample_binomial: negative size");
    if (size == 0) return out;
    // sample the side with the smaller success probability so small counts
    // stay exact integers
    bool complemented = log_p > kLogHalf;
    double lp = complemented ? log_1mp : log_p;
    double l1mp = complemented ? log_p : log_1mp;

    BigInt small;
    double eps;
    if (mpz_fits_ulong_p(size.get_mpz_t()) &&
        size.get_ui() <= limits.exact_size_cutoff) {
        BinomialDraw d = exact_draw(size.get_ui(), std::exp(lp), rng);
        small = static_cast<unsigned long>(d.count);
        eps = d.epsilon;
    } else {
        BinomialDraw d = sample_binomial_log(log_bigint(size), lp, l1mp, rng, limits);
        small = d.is_integer ? BigInt(static_cast<unsigned long>(std::llround(d.count)))
                             : bigint_from_log(d.log_count);
        if (small > size) small = size;
        eps = d.epsilon;
    }
    if (complemented) {
        out.count = size - small;
        out.epsilon = -eps;
    } else {
        out.count = small;
        out.epsilon = eps;
    }
    return out;
}

StepResult step(const ProcessState& state, const ModelParams& params, Rng& rng) {
    const GrowthSequence& seq = *params.seq;
    std::size_t next_n = state.n + 1;
    if (next_n > seq.horizon()) throw std::out_of_range("step: beyond sequence horizon");
    if (std::isinf(seq.log_tau(next_n)))
        throw std::overflow_error(
            "step: log tau exceeds double range at n = " + std::to_string(next_n) +
            "; shorten the horizon for this family");
    double alpha = params.alpha;

    StepResult r;
    if (alpha == 1.0) {
        r.log_p = state.log_theta;
        r.log_1mp = state.log_one_minus_theta;
    } else {
        r.log_p = log_psi(state.log_theta, state.log_one_minus_theta, alpha);
        r.log_1mp = log_psi(state.log_one_minus_theta, state.log_theta, alpha);
    }
    r.p = std::exp(r.log_p);

    const bool next_exact = next_n <= seq.exact_through();

    if (params.kernel == Kernel::BulkPlacement) {
        bool to_bin1 = rng.bernoulli(r.p);
        if (r.p > 0.0 && r.p < 1.0)
            r.noise.epsilon = ((to_bin1 ? 1.0 : 0.0) - r.p) / std::sqrt(r.p * (1.0 - r.p));
        if (next_exact) {
            r.b1_exact = to_bin1 ? seq.sigma(next_n) : BigInt(0);
        }
        r.log_b1 = to_bin1 ? seq.log_sigma(next_n) : kNegInf;
        r.log_b2 = to_bin1 ? kNegInf : seq.log_sigma(next_n);
    } else if (state.mode == CountMode::Exact && next_exact) {
        BigBinomialDraw d =
            sample_binomial_big(seq.sigma(next_n), r.log_p, r.log_1mp, rng, params.sampler);
        r.b1_exact = std::move(d.count);
        r.noise.epsilon = d.epsilon;
        r.log_b1 = r.b1_exact > 0 ? log_bigint(r.b1_exact) : kNegInf;
        BigInt b2 = seq.sigma(next_n) - r.b1_exact;
        r.log_b2 = b2 > 0 ? log_bigint(b2) : kNegInf;
    } else {
        double ls = seq.log_sigma(next_n);
        if (r.log_p <= kLogHalf) {
            BinomialDraw d = sample_binomial_log(ls, r.log_p, r.log_1mp, rng, params.sampler);
            r.log_b1 = d.log_count;
            r.log_b2 = log_sub(ls, d.log_count);
            r.noise.epsilon = d.epsilon;
        } else {
            BinomialDraw d = sample_binomial_log(ls, r.log_1mp, r.log_p, rng, params.sampler);
            r.log_b2 = d.log_count;
            r.log_b1 = log_sub(ls, d.log_count);
            r.noise.epsilon = -d.epsilon;
        }
    }

    ProcessState& next = r.next;
    next.n = next_n;
    if (state.mode == CountMode::Exact && next_exact) {
        next.mode = CountMode::Exact;
        next.t = state.t + r.b1_exact;
        next.u = seq.tau(next_n) - next.t;
        next.log_t = log_bigint(next.t);
        next.log_u = next.u > 0 ? log_bigint(next.u) : kNegInf;
        BigInt b2 = seq.sigma(next_n) - r.b1_exact;
        r.bin1_received = r.b1_exact > 0;
        r.bin2_received = b2 > 0;
    } else {
        next.mode = CountMode::Float;
        next.log_t = log_add(state.log_t, r.log_b1);
        next.log_u = log_add(state.log_u, r.log_b2);
        r.bin1_received = r.log_b1 != kNegInf;
        r.bin2_received = r.log_b2 != kNegInf;
    }
    double lt = seq.log_tau(next_n);
    next.log_theta = next.log_t - lt;
    next.log_one_minus_theta = next.log_u - lt;
    return r;
}

}  // namespace urnsim
