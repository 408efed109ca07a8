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

#ifndef URNSIM_BIGINT_HPP
#define URNSIM_BIGINT_HPP

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace urnsim {

using BigInt = mpz_class;

/// Number of bits in |v|; 0 for v == 0.
std::size_t bit_length(const BigInt& v);

/// Natural log of a positive BigInt, exact to long-double precision.
long double log_bigint_l(const BigInt& v);
double log_bigint(const BigInt& v);

/// Ratio a/b as a double with correct rounding (via mpq).
double ratio_to_double(const BigInt& a, const BigInt& b);
long double ratio_to_long_double(const BigInt& a, const BigInt& b);

/// floor(b^n * exp(t * base^n)) evaluated with directed rounding so the
/// floor is exact. Requires b > 0, t > 0, base > 1; the argument is then
/// irrational and the interval refinement terminates.
BigInt floor_pow_exp(double b, double t, double base, unsigned n);

/// round(exp(log_value)) as a BigInt; log_value in nats, may exceed double
/// overflow range. Negative log_value rounds to 0 or 1.
BigInt bigint_from_log(double log_value);

}  // namespace urnsim

#endif  // URNSIM_BIGINT_HPP
