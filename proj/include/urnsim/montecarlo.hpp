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

#ifndef URNSIM_MONTECARLO_HPP
#define URNSIM_MONTECARLO_HPP

#include <optional>
#include <string>
#include <vector>

#include "urnsim/dynamics.hpp"

#include "json.hpp"

namespace urnsim {

/// Finite-horizon lower bound on the conditional probability that monopoly
/// has already begun: while the trailing bin's count stays at L, the chance
/// that batch i+1 sends it at least one ball is at most
/// sigma_{i+1} * psi(L / tau_i); summing these from the current step and
/// adding a certified analytic tail bounds the probability of the loser ever
/// receiving another ball. Issued only when that bound drops below the
/// configured epsilon, and only when a certified tail exists - never on a
/// truncated sum alone.
struct MonopolyCertificate {
    std::size_t at_step = 0;
    double log_loser_count = 0.0;
    std::string loser_count;  // exact decimal when available, else empty
    double epsilon_bound = 0.0;
    std::size_t tail_horizon = 0;
    double tail_bound = 0.0;  // the analytic remainder beyond tail_horizon
};

enum class Winner { Bin1, Bin2, Undecided };
const char* to_string(Winner w);

struct DeviationStats {
    std::size_t count = 0;
    std::size_t count_at_half = 0;
    std::optional<std::size_t> first_step;
};

struct TrajectoryRecord {
    std::uint64_t replication_id = 0;
    std::uint64_t master_seed = 0;
    std::size_t final_n = 0;
    double final_theta = 0.0;
    double log_theta = kNegInf;
    double log_one_minus_theta = kNegInf;
    double min_side = 0.0;      // min(Theta, 1-Theta) at the horizon
    double mid_min_side = 0.0;  // the same at horizon/2
    Winner winner = Winner::Undecided;
    std::optional<std::size_t> last_crossing;
    std::optional<std::size_t> monopoly_onset;
    std::optional<MonopolyCertificate> certificate;
    bool certificate_violated = false;
    double noise_mean = 0.0;
    double noise_var = 0.0;
    std::size_t noise_steps = 0;
    DeviationStats deviations;
    CountMode final_mode = CountMode::Exact;
};

struct RunOptions {
    std::size_t horizon = 1000;
    std::size_t reps = 100;
    std::uint64_t master_seed = 1;
    double confidence_eps = 1e-3;
    std::size_t tail_horizon = 0;  // 0: horizon + 100000
    std::vector<double> delta_grid = {1e-1, 1e-2, 1e-3, 1e-6};
    unsigned threads = 0;          // 0: hardware concurrency
    std::size_t max_total_steps = 0;  // 0: unlimited; else reps are truncated
    std::optional<std::string> trajectory_dir;  // per-replication CSV dumps
};

struct EnsembleSummary {
    std::size_t reps_requested = 0;
    std::size_t reps_completed = 0;
    bool partial = false;
    std::vector<std::pair<double, double>> p_below;  // (delta, fraction)
    std::size_t certificates = 0;
    std::size_t certificate_violations = 0;
    double certified_fraction = 0.0;
    std::size_t winners_bin1 = 0;
    std::size_t winners_bin2 = 0;
    std::size_t undecided = 0;
    double noise_mean = 0.0;
    double noise_var = 0.0;
    std::size_t noise_steps = 0;
    double median_min_side = 0.0;
    double median_mid_min_side = 0.0;
    double deviation_fraction = 0.0;         // >= 1 deviation step
    double deviation_growth_fraction = 0.0;  // count grew after horizon/2

    nlohmann::json to_json() const;
};

struct RunResult {
    std::vector<TrajectoryRecord> records;
    EnsembleSummary summary;
};

/// Independent replications with one RNG stream per replication id;
/// aggregation is a deterministic fold in replication order.
RunResult run_replications(const ModelParams& params, const RunOptions& options);

/// One-shot certificate evaluation for an arbitrary state. The sequence's
/// tables must reach tail_horizon + 1.
std::optional<MonopolyCertificate> monopoly_certificate(const ProcessState& state,
                                                        const ModelParams& params,
                                                        double confidence_eps,
                                                        std::size_t tail_horizon);

struct DominanceStats {
    std::vector<std::pair<double, double>> p_below;
    double median_min_side = 0.0;
    double median_mid_min_side = 0.0;
    bool median_decreased = false;  // horizon median below horizon/2 median
};

DominanceStats dominance_stats(const std::vector<TrajectoryRecord>& records,
                               const std::vector<double>& delta_grid);

enum class ReferenceDist { Uniform01, TwoPointHalfHalf };

struct KsResult {
    double ks_stat = 0.0;
    double p_value = 0.0;
    std::optional<std::string> warning;
};

/// Two-sided Kolmogorov-Smirnov distance of the final proportions against
/// the reference law. Uniform01 is exact only for the classical single-ball
/// symmetric case; other parameters get a warning attached.
KsResult limit_distribution_test(const std::vector<double>& final_thetas,
                                 ReferenceDist reference,
                                 const ModelParams* params = nullptr);
KsResult limit_distribution_test(const std::vector<TrajectoryRecord>& records,
                                 ReferenceDist reference,
                                 const ModelParams* params = nullptr);

/// delta_n = 1 / log^2 tau_n.
double deviation_delta(double log_tau);

/// Streaming tracker for steps with |Theta_n - 1/2| > delta_n.
class DeviationTracker {
public:
    void observe(std::size_t n, double theta, double log_tau) {
        if (std::abs(theta - 0.5) > deviation_delta(log_tau)) {
            ++stats_.count;
            if (!stats_.first_step) stats_.first_step = n;
        }
    }
    void mark_half() { stats_.count_at_half = stats_.count; }
    const DeviationStats& stats() const { return stats_; }

private:
    DeviationStats stats_;
};

}  // namespace urnsim

#endif  // URNSIM_MONTECARLO_HPP
