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

#ifndef URNSIM_LOGSPACE_HPP
#define URNSIM_LOGSPACE_HPP

#include <cmath>
#include <limits>

namespace urnsim {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without leaving log space.
inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    if (b > a) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

/// log(1 - exp(x)) for x <= 0, accurate near both ends.
inline double log1mexp(double x) {
    // branch point -ln 2 keeps both log1p and expm1 in their sweet spots
    if (x > -0.6931471805599453) return std::log(-std::expm1(x));
    return std::log1p(-std::exp(x));
}

/// log(exp(a) - exp(b)); requires a >= b.
inline double log_sub(double a, double b) {
    if (b == kNegInf) return a;
    if (a == b) return kNegInf;
    return a + log1mexp(b - a);
}

/// log(1 + exp(x)) for any x; never overflows.
inline double softplus(double x) {
    if (x > 0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

/// Compensated accumulator for long sums of doubles.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

/// Long-double variant, used where ~1e5-term identities must stay below 1e-9.
class KahanSumL {
public:
    void add(long double x) {
        long double y = x - c_;
        long double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    long double value() const { return s_; }

private:
    long double s_ = 0.0L;
    long double c_ = 0.0L;
};

}  // namespace urnsim

#endif  // URNSIM_LOGSPACE_HPP
