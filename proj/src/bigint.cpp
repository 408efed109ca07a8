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

#include "urnsim/bigint.hpp"

#include <mpfr.h>

#include <cmath>
#include <stdexcept>

namespace urnsim {

std::size_t bit_length(const BigInt& v) {
    if (v == 0) return 0;
    return mpz_sizeinbase(v.get_mpz_t(), 2);
}

long double log_bigint_l(const BigInt& v) {
    if (v <= 0) throw std::domain_error("log_bigint: argument must be positive");
    // mantissa in [0.5, 1) plus exponent; exact enough for long double
    long exp2 = 0;
    double d = mpz_get_d_2exp(&exp2, v.get_mpz_t());
    return std::log(static_cast<long double>(d)) +
           static_cast<long double>(exp2) * 0.693147180559945309417232121458L;
}

double log_bigint(const BigInt& v) { return static_cast<double>(log_bigint_l(v)); }

double ratio_to_double(const BigInt& a, const BigInt& b) {
    mpq_class q(a, b);
    q.canonicalize();
    return q.get_d();
}

long double ratio_to_long_double(const BigInt& a, const BigInt& b) {
    mpfr_t x, y;
    mpfr_init2(x, 80);
    mpfr_init2(y, 80);
    mpfr_set_z(x, a.get_mpz_t(), MPFR_RNDN);
    mpfr_set_z(y, b.get_mpz_t(), MPFR_RNDN);
    mpfr_div(x, x, y, MPFR_RNDN);
    long double out = mpfr_get_ld(x, MPFR_RNDN);
    mpfr_clear(x);
    mpfr_clear(y);
    return out;
}

namespace {

// Evaluate x = b^n * exp(t * base^n) at precision `prec` with rounding `rnd`,
// then floor into `out`.
void floor_at_precision(mpfr_prec_t prec, mpfr_rnd_t rnd, double b, double t,
                        double base, unsigned n, BigInt& out) {
    mpfr_t x, e, p;
    mpfr_init2(x, prec);
    mpfr_init2(e, prec);
    mpfr_init2(p, prec);

    mpfr_set_d(p, base, rnd);
    mpfr_pow_ui(p, p, n, rnd);           // base^n
    mpfr_mul_d(e, p, t, rnd);            // t * base^n
    mpfr_exp(e, e, rnd);                 // exp(...)
    mpfr_set_d(x, b, rnd);
    mpfr_pow_ui(x, x, n, rnd);           // b^n
    mpfr_mul(x, x, e, rnd);
    mpfr_floor(x, x);
    mpfr_get_z(out.get_mpz_t(), x, MPFR_RNDZ);

    mpfr_clear(x);
    mpfr_clear(e);
    mpfr_clear(p);
}

}  // namespace

BigInt floor_pow_exp(double b, double t, double base, unsigned n) {
    if (!(b > 0) || !(t > 0) || !(base > 1))
        throw std::domain_error("floor_pow_exp: need b > 0, t > 0, base > 1");
    // magnitude estimate in bits to size the starting precision
    double log2x = static_cast<double>(n) * std::log2(b) +
                   t * std::pow(base, static_cast<double>(n)) * 1.4426950408889634;
    if (log2x > 8.0e6)
        throw std::overflow_error("floor_pow_exp: value exceeds supported bit range");
    mpfr_prec_t prec = static_cast<mpfr_prec_t>(std::max(128.0, log2x + 64.0));

    // fast path: one nearest-rounded evaluation; the floor is certain unless
    // the value lands within a few ulps of an integer
    {
        mpfr_t x, e, p, fr;
        mpfr_init2(x, prec);
        mpfr_init2(e, prec);
        mpfr_init2(p, prec);
        mpfr_init2(fr, prec);
        mpfr_set_d(p, base, MPFR_RNDN);
        mpfr_pow_ui(p, p, n, MPFR_RNDN);
        mpfr_mul_d(e, p, t, MPFR_RNDN);
        mpfr_exp(e, e, MPFR_RNDN);
        mpfr_set_d(x, b, MPFR_RNDN);
        mpfr_pow_ui(x, x, n, MPFR_RNDN);
        mpfr_mul(x, x, e, MPFR_RNDN);
        mpfr_frac(fr, x, MPFR_RNDN);
        double frac = mpfr_get_d(fr, MPFR_RNDN);
        // composed rounding error stays below ~1e-13 absolute at this
        // precision; only near-integers need the interval fallback
        bool safe = frac > 1e-10 && frac < 1.0 - 1e-10;
        BigInt out;
        if (safe) {
            mpfr_floor(x, x);
            mpfr_get_z(out.get_mpz_t(), x, MPFR_RNDZ);
        }
        mpfr_clear(x);
        mpfr_clear(e);
        mpfr_clear(p);
        mpfr_clear(fr);
        if (safe) return out;
    }

    for (int rounds = 0; rounds < 8; ++rounds) {
        BigInt lo, hi;
        floor_at_precision(prec, MPFR_RNDD, b, t, base, n, lo);
        floor_at_precision(prec, MPFR_RNDU, b, t, base, n, hi);
        if (lo == hi) return lo;
        prec *= 2;
    }
    throw std::runtime_error("floor_pow_exp: floor did not stabilize");
}

BigInt bigint_from_log(double log_value) {
    if (log_value < 0) return BigInt(log_value < -0.6931471805599453 ? 0 : 1);
    double bits = log_value * 1.4426950408889634;
    if (bits < 62.0)
        return BigInt(static_cast<unsigned long>(std::llround(std::exp(log_value))));
    // 53-bit mantissa shifted into place; the low bits carry no information
    // beyond the double's own precision anyway
    long shift = static_cast<long>(bits) - 52;
    double m = std::exp2(bits - static_cast<double>(shift));  // in [2^52, 2^53)
    BigInt out(static_cast<unsigned long>(std::llround(m)));
    out <<= shift;
    return out;
}

}  // namespace urnsim
