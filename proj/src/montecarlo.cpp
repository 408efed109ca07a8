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

#include "urnsim/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "urnsim/io.hpp"

namespace urnsim {

const char* to_string(Winner w) {
    switch (w) {
        case Winner::Bin1: return "bin1";
        case Winner::Bin2: return "bin2";
        case Winner::Undecided: return "undecided";
    }
    return "?";
}

double deviation_delta(double log_tau) { return 1.0 / (log_tau * log_tau); }

namespace {

constexpr double kNoiseCutoffLog = -13.815510557964274;  // log(1e-6)

/// Union-bound certificate machinery shared read-only by all replications of
/// one run. Enabled only when the family carries a certified tail beyond
/// tail_horizon; without it no certificate is ever issued.
class CertificateEngine {
public:
    CertificateEngine(const GrowthSequence& seq, double alpha, double eps,
                      std::size_t tail_horizon)
        : seq_(seq), alpha_(alpha), eps_(eps), horizon_(tail_horizon) {
        if (horizon_ + 1 > seq.horizon())
            throw std::out_of_range("certificate: sequence tables end before tail horizon");
        tail_ = seq.certified_sigma_tail(alpha, horizon_ + 1);
        if (!tail_) return;
        log_eps_ = std::log(eps_);
        suffix_.assign(horizon_ + 2, 0.0);
        for (std::size_t i = horizon_ + 1; i-- > 0;)
            suffix_[i] =
                suffix_[i + 1] +
                std::exp(seq.log_series_term(SeriesKind::SigmaOverTauAlpha, alpha, i));
    }

    bool enabled() const { return tail_.has_value(); }
    double eps() const { return eps_; }
    double log_eps() const { return log_eps_; }
    double alpha() const { return alpha_; }
    const GrowthSequence& seq() const { return seq_; }
    double loose_suffix(std::size_t n) const { return suffix_[n]; }
    double tail_bound(double log_l) const {
        return std::exp((alpha_ - 1.0) * 0.6931471805599453 + alpha_ * log_l +
                        std::log(*tail_));
    }
    std::size_t tail_horizon() const { return horizon_; }

    // min(1, sigma_{i+1} * psi(L / tau_i)), assembled as
    // L^alpha * (sigma_{i+1}/tau_i^alpha) * kappa(L/tau_i) with
    // kappa(x) = psi(x)/x^alpha. The series factor comes from the
    // cancellation-aware per-family form, so no giant logs are differenced;
    // kappa is order one and computed from log x alone. When even log tau
    // overflows double, the psibounds cap kappa <= 2^{alpha-1} keeps the
    // term an upper bound.
    double psi_term(std::size_t i, double log_l) const {
        double lt = seq_.log_tau(i);
        double log_kappa;
        if (std::isinf(lt)) {
            log_kappa = (alpha_ - 1.0) * 0.6931471805599453;
        } else {
            double log_x = log_l - lt;
            double l1mx = log1mexp(log_x);
            log_kappa = -alpha_ * l1mx - softplus(alpha_ * (log_x - l1mx));
        }
        double v = alpha_ * log_l +
                   seq_.log_series_term(SeriesKind::SigmaOverTauAlpha, alpha_, i) +
                   log_kappa;
        return std::exp(std::min(v, 0.0));
    }

private:
    const GrowthSequence& seq_;
    double alpha_;
    double eps_;
    double log_eps_ = 0.0;
    std::size_t horizon_;
    std::optional<double> tail_;
    std::vector<double> suffix_;
};

/// Per-replication cursor over the shared engine; keeps the incremental
/// partial-sum cache for the current frozen loser count.
class CertificateCursor {
public:
    explicit CertificateCursor(const CertificateEngine& eng) : eng_(eng) {}

    /// Bound at state (n, loser log count), or nullopt when >= eps. Call with
    /// nondecreasing n; the running sum is reused while the count is frozen.
    std::optional<double> check(std::size_t n, double log_l) {
        if (!eng_.enabled() || n > eng_.tail_horizon()) return std::nullopt;
        // lower bound L^alpha * suffix <= true bound: cheap prefilter
        double lower = eng_.alpha() * log_l + std::log(eng_.loose_suffix(n));
        if (!(lower < eng_.log_eps())) return std::nullopt;
        if (!cache_valid_ || log_l != cache_log_l_ || n < cache_n_) {
            KahanSum sum;
            for (std::size_t i = n; i <= eng_.tail_horizon(); ++i)
                sum.add(eng_.psi_term(i, log_l));
            cache_value_ = sum.value();
            cache_n_ = n;
            cache_log_l_ = log_l;
            cache_valid_ = true;
        } else {
            while (cache_n_ < n) {
                cache_value_ -= eng_.psi_term(cache_n_, log_l);
                ++cache_n_;
            }
            cache_value_ = std::max(cache_value_, 0.0);
        }
        double bound = cache_value_ + eng_.tail_bound(log_l);
        if (bound < eng_.eps()) return bound;
        return std::nullopt;
    }

private:
    const CertificateEngine& eng_;
    bool cache_valid_ = false;
    std::size_t cache_n_ = 0;
    double cache_log_l_ = 0.0;
    double cache_value_ = 0.0;
};

struct RepContext {
    const ModelParams& params;
    const RunOptions& options;
    CertificateEngine& certs;
};

int state_sign(const ProcessState& s) {
    if (s.mode == CountMode::Exact) return cmp(s.t, s.u);
    if (s.log_t > s.log_u) return 1;
    if (s.log_t < s.log_u) return -1;
    return 0;
}

TrajectoryRecord run_one(std::uint64_t rep, const RepContext& ctx) {
    const ModelParams& params = ctx.params;
    const RunOptions& opt = ctx.options;
    const GrowthSequence& seq = *params.seq;

    TrajectoryRecord rec;
    rec.replication_id = rep;
    rec.master_seed = opt.master_seed;

    Rng rng(opt.master_seed, rep);
    ProcessState s = initial_state(params);

    std::optional<TrajectoryWriter> dump;
    if (opt.trajectory_dir)
        dump.emplace(*opt.trajectory_dir, rep);

    DeviationTracker deviations;
    deviations.observe(0, s.theta(), seq.log_tau(0));

    KahanSum eps_sum, eps_sq_sum;
    std::size_t noise_steps = 0;

    int prev_sign = state_sign(s);
    std::size_t last_ball_bin1 = 0, last_ball_bin2 = 0;
    int certified_side = 0;  // +1: bin2 trailing at issue, -1: bin1; 0: none

    CertificateCursor certs(ctx.certs);

    const std::size_t mid = opt.horizon / 2;
    if (mid == 0) {
        rec.mid_min_side = s.min_side();
        deviations.mark_half();
    }

    for (std::size_t n = 1; n <= opt.horizon; ++n) {
        StepResult r = step(s, params, rng);

        if (std::min(r.log_p, r.log_1mp) >= kNoiseCutoffLog) {
            eps_sum.add(r.noise.epsilon);
            eps_sq_sum.add(r.noise.epsilon * r.noise.epsilon);
            ++noise_steps;
        }
        if (r.bin1_received) last_ball_bin1 = n;
        if (r.bin2_received) last_ball_bin2 = n;
        if (certified_side == -1 && r.bin1_received) rec.certificate_violated = true;
        if (certified_side == +1 && r.bin2_received) rec.certificate_violated = true;

        if (dump) dump->row(n, r, seq);

        s = std::move(r.next);
        deviations.observe(n, s.theta(), seq.log_tau(n));

        int sign = state_sign(s);
        if (sign != 0 && prev_sign != 0 && sign != prev_sign) rec.last_crossing = n;
        if (sign != 0) prev_sign = sign;

        if (!rec.certificate && ctx.certs.enabled()) {
            double log_l = std::min(s.log_t, s.log_u);
            if (auto bound = certs.check(n, log_l)) {
                MonopolyCertificate cert;
                cert.at_step = n;
                cert.log_loser_count = log_l;
                if (s.mode == CountMode::Exact)
                    cert.loser_count = (s.t <= s.u ? s.t : s.u).get_str();
                cert.epsilon_bound = *bound;
                cert.tail_horizon = ctx.certs.tail_horizon();
                cert.tail_bound = ctx.certs.tail_bound(log_l);
                rec.certificate = std::move(cert);
                certified_side = s.log_t <= s.log_u ? -1 : +1;
            }
        }

        if (n == mid) {
            rec.mid_min_side = s.min_side();
            deviations.mark_half();
        }
    }

    rec.final_n = s.n;
    rec.final_theta = s.theta();
    rec.log_theta = s.log_theta;
    rec.log_one_minus_theta = s.log_one_minus_theta;
    rec.min_side = s.min_side();
    rec.final_mode = s.mode;
    int sign = state_sign(s);
    rec.winner = sign > 0 ? Winner::Bin1 : sign < 0 ? Winner::Bin2 : Winner::Undecided;
    if (rec.winner != Winner::Undecided)
        rec.monopoly_onset = rec.winner == Winner::Bin1 ? last_ball_bin2 : last_ball_bin1;
    rec.noise_steps = noise_steps;
    rec.noise_mean = noise_steps ? eps_sum.value() / noise_steps : 0.0;
    if (noise_steps) {
        double m2 = eps_sq_sum.value() / noise_steps;
        rec.noise_var = std::max(0.0, m2 - rec.noise_mean * rec.noise_mean);
    }
    rec.deviations = deviations.stats();
    return rec;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::size_t k = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + k, v.end());
    double hi = v[k];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + k - 1, v.begin() + k);
    return 0.5 * (hi + v[k - 1]);
}

}  // namespace

RunResult run_replications(const ModelParams& params, const RunOptions& options) {
    params.validate();
    if (options.reps < 1) throw std::invalid_argument("run: reps must be >= 1");
    if (options.horizon < 1) throw std::invalid_argument("run: horizon must be >= 1");
    const GrowthSequence& seq = *params.seq;
    std::size_t tail_horizon =
        options.tail_horizon ? options.tail_horizon : options.horizon + 100000;
    if (tail_horizon < options.horizon) tail_horizon = options.horizon;
    if (tail_horizon + 1 > seq.horizon())
        throw std::out_of_range(
            "run: sequence tables must reach tail_horizon + 1; rebuild the sequence with a "
            "larger horizon");

    std::size_t reps = options.reps;
    bool partial = false;
    if (options.max_total_steps > 0) {
        std::size_t affordable = options.max_total_steps / options.horizon;
        if (affordable < reps) {
            reps = affordable;
            partial = true;
        }
    }

    RunOptions opt = options;
    opt.tail_horizon = tail_horizon;

    CertificateEngine certs(seq, params.alpha, opt.confidence_eps, tail_horizon);
    RepContext ctx{params, opt, certs};

    std::vector<TrajectoryRecord> records(reps);
    unsigned threads = opt.threads ? opt.threads : std::thread::hardware_concurrency();
    if (threads == 0) threads = 1;
    threads = std::min<std::size_t>(threads, std::max<std::size_t>(reps, 1));

    if (threads <= 1 || reps <= 1) {
        for (std::uint64_t r = 0; r < reps; ++r) records[r] = run_one(r, ctx);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        std::exception_ptr error;
        std::mutex error_mu;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                try {
                    for (std::uint64_t r; (r = next.fetch_add(1)) < reps;)
                        records[r] = run_one(r, ctx);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        if (error) std::rethrow_exception(error);
    }

    RunResult out;
    out.records = std::move(records);
    EnsembleSummary& sum = out.summary;
    sum.reps_requested = options.reps;
    sum.reps_completed = reps;
    sum.partial = partial;

    std::vector<double> min_sides, mid_sides;
    KahanSum eps_total, eps_sq_total;
    std::size_t noise_total = 0, dev_any = 0, dev_grow = 0;
    for (const auto& r : out.records) {
        min_sides.push_back(r.min_side);
        mid_sides.push_back(r.mid_min_side);
        if (r.certificate) ++sum.certificates;
        if (r.certificate && r.certificate_violated) ++sum.certificate_violations;
        switch (r.winner) {
            case Winner::Bin1: ++sum.winners_bin1; break;
            case Winner::Bin2: ++sum.winners_bin2; break;
            case Winner::Undecided: ++sum.undecided; break;
        }
        eps_total.add(r.noise_mean * r.noise_steps);
        eps_sq_total.add((r.noise_var + r.noise_mean * r.noise_mean) * r.noise_steps);
        noise_total += r.noise_steps;
        if (r.deviations.count >= 1) ++dev_any;
        if (r.deviations.count > r.deviations.count_at_half) ++dev_grow;
    }
    for (double d : opt.delta_grid) {
        std::size_t below = 0;
        for (double m : min_sides)
            if (m < d) ++below;
        sum.p_below.emplace_back(d, reps ? static_cast<double>(below) / reps : 0.0);
    }
    sum.certified_fraction = reps ? static_cast<double>(sum.certificates) / reps : 0.0;
    sum.noise_steps = noise_total;
    sum.noise_mean = noise_total ? eps_total.value() / noise_total : 0.0;
    if (noise_total) {
        double m2 = eps_sq_total.value() / noise_total;
        sum.noise_var = std::max(0.0, m2 - sum.noise_mean * sum.noise_mean);
    }
    sum.median_min_side = median_of(min_sides);
    sum.median_mid_min_side = median_of(mid_sides);
    sum.deviation_fraction = reps ? static_cast<double>(dev_any) / reps : 0.0;
    sum.deviation_growth_fraction = reps ? static_cast<double>(dev_grow) / reps : 0.0;
    return out;
}

std::optional<MonopolyCertificate> monopoly_certificate(const ProcessState& state,
                                                        const ModelParams& params,
                                                        double confidence_eps,
                                                        std::size_t tail_horizon) {
    CertificateEngine certs(*params.seq, params.alpha, confidence_eps, tail_horizon);
    if (!certs.enabled()) return std::nullopt;
    double log_l = std::min(state.log_t, state.log_u);
    CertificateCursor cursor(certs);
    auto bound = cursor.check(state.n, log_l);
    if (!bound) return std::nullopt;
    MonopolyCertificate cert;
    cert.at_step = state.n;
    cert.log_loser_count = log_l;
    if (state.mode == CountMode::Exact)
        cert.loser_count = (state.t <= state.u ? state.t : state.u).get_str();
    cert.epsilon_bound = *bound;
    cert.tail_horizon = tail_horizon;
    cert.tail_bound = certs.tail_bound(log_l);
    return cert;
}

DominanceStats dominance_stats(const std::vector<TrajectoryRecord>& records,
                               const std::vector<double>& delta_grid) {
    if (records.empty()) throw std::invalid_argument("dominance_stats: no records");
    DominanceStats st;
    std::vector<double> min_sides, mid_sides;
    for (const auto& r : records) {
        min_sides.push_back(r.min_side);
        mid_sides.push_back(r.mid_min_side);
    }
    for (double d : delta_grid) {
        std::size_t below = 0;
        for (double m : min_sides)
            if (m < d) ++below;
        st.p_below.emplace_back(d, static_cast<double>(below) / records.size());
    }
    st.median_min_side = median_of(min_sides);
    st.median_mid_min_side = median_of(mid_sides);
    st.median_decreased = st.median_min_side < st.median_mid_min_side;
    return st;
}

namespace {

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-14) break;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

}  // namespace

KsResult limit_distribution_test(const std::vector<double>& final_thetas,
                                 ReferenceDist reference, const ModelParams* params) {
    if (final_thetas.empty())
        throw std::invalid_argument("limit_distribution_test: no samples");
    double n = static_cast<double>(final_thetas.size());
    double d = 0.0;
    if (reference == ReferenceDist::Uniform01) {
        std::vector<double> x = final_thetas;
        std::sort(x.begin(), x.end());
        for (std::size_t i = 0; i < x.size(); ++i) {
            double f = std::clamp(x[i], 0.0, 1.0);
            d = std::max(d, std::abs((i + 1.0) / n - f));
            d = std::max(d, std::abs(static_cast<double>(i) / n - f));
        }
    } else {
        // finite-horizon proportions never sit exactly on the atoms at 0 and
        // 1, so compare the mass split around 1/2 instead of raw positions
        double below = 0.0, at_half = 0.0;
        for (double v : final_thetas) {
            if (v < 0.5) below += 1.0;
            if (v == 0.5) at_half += 1.0;
        }
        d = std::abs((below + 0.5 * at_half) / n - 0.5);
    }
    KsResult out;
    out.ks_stat = d;
    double sq = std::sqrt(n);
    out.p_value = kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
    if (reference == ReferenceDist::Uniform01 && params) {
        const auto* cf = std::get_if<ConstantFamily>(&params->seq->family());
        bool classical = params->alpha == 1.0 && cf && cf->sigma == 1 &&
                         params->t0 * 2 == params->seq->tau0();
        if (!classical)
            out.warning =
                "uniform reference is exact only for the single-ball symmetric case";
    }
    return out;
}

KsResult limit_distribution_test(const std::vector<TrajectoryRecord>& records,
                                 ReferenceDist reference, const ModelParams* params) {
    std::vector<double> thetas;
    thetas.reserve(records.size());
    for (const auto& r : records) thetas.push_back(r.final_theta);
    return limit_distribution_test(thetas, reference, params);
}

nlohmann::json EnsembleSummary::to_json() const {
    nlohmann::json pb = nlohmann::json::array();
    for (auto& [d, f] : p_below) pb.push_back({{"delta", d}, {"fraction", f}});
    return nlohmann::json{
        {"reps_requested", reps_requested},
        {"reps_completed", reps_completed},
        {"partial", partial},
        {"p_below", pb},
        {"certificates", certificates},
        {"certificate_violations", certificate_violations},
        {"certified_fraction", certified_fraction},
        {"winners", {{"bin1", winners_bin1}, {"bin2", winners_bin2}, {"undecided", undecided}}},
        {"noise", {{"mean", noise_mean}, {"variance", noise_var}, {"steps", noise_steps}}},
        {"median_min_side", median_min_side},
        {"median_mid_min_side", median_mid_min_side},
        {"deviation_fraction", deviation_fraction},
        {"deviation_growth_fraction", deviation_growth_fraction},
    };
}

}  // namespace urnsim
