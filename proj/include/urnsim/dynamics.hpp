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

#ifndef URNSIM_DYNAMICS_HPP
#define URNSIM_DYNAMICS_HPP

#include <memory>

#include "urnsim/bigint.hpp"
#include "urnsim/logspace.hpp"
#include "urnsim/rng.hpp"
#include "urnsim/sequences.hpp"

namespace urnsim {

enum class Kernel { IndependentBinomial, BulkPlacement };

const char* to_string(Kernel k);

struct SamplerLimits {
    std::uint64_t exact_size_cutoff = 1'000'000;  // standard sampling up to here
    double poisson_mean_cutoff = 1e3;             // poisson vs gaussian split above
};

struct ModelParams {
    double alpha = 2.0;
    BigInt t0 = 1;
    std::shared_ptr<const GrowthSequence> seq;
    Kernel kernel = Kernel::IndependentBinomial;
    SamplerLimits sampler;

    /// Throws std::invalid_argument unless alpha >= 1 and 0 < t0 < tau0.
    void validate() const;
};

enum class CountMode { Exact, Float };

const char* to_string(CountMode m);

/// Full state of one trajectory at step n. Exact integer counts while tau
/// stays within the sequence's bit budget; afterwards only the log pair is
/// live. log_theta / log_one_minus_theta are maintained in both modes.
struct ProcessState {
    std::size_t n = 0;
    CountMode mode = CountMode::Exact;
    BigInt t;        // bin 1 count (Exact mode)
    BigInt u;        // bin 2 count (Exact mode)
    double log_t = kNegInf;
    double log_u = kNegInf;
    double log_theta = kNegInf;
    double log_one_minus_theta = kNegInf;

    double theta() const { return std::exp(log_theta); }
    double min_side() const { return std::exp(std::min(log_theta, log_one_minus_theta)); }
};

ProcessState initial_state(const ModelParams& params);

/// psi(x) = x^alpha / (x^alpha + (1-x)^alpha), computed through logs so that
/// extreme x keep full relative accuracy; endpoints map exactly to 0 and 1.
double psi(double x, double alpha);

/// log psi(x) from (log x, log(1-x)); accurate even for x < 1e-300.
double log_psi(double log_x, double log_1mx, double alpha);

/// One binomial draw plus its realized normalized fluctuation.
struct BinomialDraw {
    double count = 0.0;      // may be +inf when only the log is representable
    double log_count = kNegInf;
    double epsilon = 0.0;
    bool is_integer = true;  // true when count is an exact small integer
};

/// Binomial sampling with the documented strategy: standard sampling up to
/// exact_size_cutoff, Poisson approximation for large sizes with small mean,
/// Gaussian approximation (rounded, clamped to [0, size]) otherwise.
BinomialDraw sample_binomial(std::uint64_t size, double p, Rng& rng,
                             const SamplerLimits& limits = {});

/// Log-space variant for sizes far beyond 2^64: log_size, log_p, log_1mp in
/// nats. p outside [0,1] beyond 1e-12 is rejected.
BinomialDraw sample_binomial_log(double log_size, double log_p, double log_1mp, Rng& rng,
                                 const SamplerLimits& limits = {});

/// Exact-count variant: the returned count is an integer (approximation
/// branches round), so conservation stays exact in Exact mode.
struct BigBinomialDraw {
    BigInt count;
    double epsilon = 0.0;
};
BigBinomialDraw sample_binomial_big(const BigInt& size, double log_p, double log_1mp,
                                    Rng& rng, const SamplerLimits& limits = {});

struct StepNoise {
    double epsilon = 0.0;
};

struct StepResult {
    ProcessState next;
    double p = 0.0;           // P_n used for the draw (exp of log_p)
    double log_p = kNegInf;
    double log_1mp = kNegInf;
    bool bin1_received = false;
    bool bin2_received = false;
    double log_b1 = kNegInf;  // balls added to bin 1, log scale
    double log_b2 = kNegInf;
    BigInt b1_exact;          // valid when next.mode == Exact
    StepNoise noise;
};

/// T_{n+1} = T_n + B_{n+1}; B ~ Binomial(sigma_{n+1}, psi(Theta_n)) for the
/// independent kernel, B = sigma_{n+1} * I with I ~ Bernoulli(psi(Theta_n))
/// for bulk placement (at alpha = 1 this is Bernoulli(Theta_n)).
StepResult step(const ProcessState& state, const ModelParams& params, Rng& rng);

}  // namespace urnsim

#endif  // URNSIM_DYNAMICS_HPP
