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

#ifndef URNSIM_CONFIG_HPP
#define URNSIM_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "urnsim/montecarlo.hpp"

#include "json.hpp"

namespace urnsim {

/// Family declaration as it appears in the config file. base == 0 on the
/// doubly-exponential families means "use the model alpha".
struct FamilySpec {
    std::string name;
    std::uint64_t sigma = 1;        // constant
    std::uint64_t coefficient = 1;  // polynomial / geometric
    unsigned degree = 1;            // polynomial
    std::uint64_t ratio = 2;        // geometric
    double b = 1.0;                 // doubly_exponential_tau
    double theta0 = 1.0;            // doubly_exponential_tau
    double c = 1.0;                 // doubly_exponential_sigma
    double base = 0.0;              // dexp families; 0 -> alpha
    std::vector<BigInt> values;     // custom
    std::optional<nlohmann::json> analytic;  // custom metadata, alpha-free form
};

/// Full experiment description. Parsing is strict: unknown keys anywhere are
/// rejected; all defaults are materialized so that to_json() round-trips.
struct ExperimentConfig {
    // model
    double alpha = 2.0;
    std::uint64_t tau0 = 2;
    std::uint64_t t0 = 1;
    Kernel kernel = Kernel::IndependentBinomial;
    FamilySpec family;
    // run
    std::size_t horizon = 1000;
    std::size_t reps = 100;
    std::uint64_t master_seed = 1;
    std::size_t bit_budget = GrowthSequence::kDefaultBitBudget;
    SamplerLimits sampler;
    std::size_t max_total_steps = 0;
    unsigned threads = 0;
    // analysis
    std::vector<double> delta_grid = {1e-1, 1e-2, 1e-3, 1e-6};
    double confidence_eps = 1e-3;
    std::size_t tail_horizon = 0;
    // output
    std::string out_dir = "out";
    bool records_csv = true;
    bool records_json = false;
    bool dump_trajectories = false;

    static ExperimentConfig from_json(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir = ".");
    static ExperimentConfig load(const std::filesystem::path& file);
    nlohmann::json to_json() const;

    /// Effective tail horizon (resolving the 0 default).
    std::size_t effective_tail_horizon() const {
        return tail_horizon ? tail_horizon : horizon + 100000;
    }

    /// Build the growth sequence with tables covering the given number of
    /// steps (0 means "enough for simulate": max(horizon, tail horizon) + 2).
    std::shared_ptr<const GrowthSequence> build_sequence(std::size_t steps_needed = 0) const;

    ModelParams build_model(std::shared_ptr<const GrowthSequence> seq) const;
    RunOptions build_run_options() const;
};

}  // namespace urnsim

#endif  // URNSIM_CONFIG_HPP
