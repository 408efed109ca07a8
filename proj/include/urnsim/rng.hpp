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

#ifndef URNSIM_RNG_HPP
#define URNSIM_RNG_HPP

#include <cstdint>
#include <random>

namespace urnsim {

/// One independent random stream per (master seed, stream index). Streams are
/// deterministic: the same pair always reproduces the same draw sequence for
/// a given build of the library.
class Rng {
public:
    Rng(std::uint64_t master_seed, std::uint64_t stream_index) {
        std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                          static_cast<std::uint32_t>(master_seed >> 32),
                          static_cast<std::uint32_t>(stream_index),
                          static_cast<std::uint32_t>(stream_index >> 32),
                          0x9e3779b9u};
        engine_.seed(seq);
    }

    std::mt19937_64& engine() { return engine_; }

    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform() < p;
    }
    std::uint64_t binomial(std::uint64_t n, double p) {
        if (n == 0 || p <= 0.0) return 0;
        if (p >= 1.0) return n;
        return std::binomial_distribution<std::uint64_t>(n, p)(engine_);
    }
    std::uint64_t poisson(double mean) {
        if (!(mean > 0.0)) return 0;
        return std::poisson_distribution<std::uint64_t>(mean)(engine_);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace urnsim

#endif  // URNSIM_RNG_HPP
