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

#include "urnsim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace urnsim {

namespace {

/// Strict-object helper: every key must be consumed, leftovers are errors.
class Obj {
public:
    Obj(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw std::invalid_argument("config: " + path_ + " must be an object");
    }

    bool has(const std::string& key) {
        return j_.contains(key);
    }

    const nlohmann::json* take(const std::string& key) {
        if (!j_.contains(key)) return nullptr;
        seen_.insert(key);
        return &j_.at(key);
    }

    const nlohmann::json& require(const std::string& key) {
        const nlohmann::json* v = take(key);
        if (!v) throw std::invalid_argument("config: missing required key " + dotted(key));
        return *v;
    }

    template <typename T>
    T get(const std::string& key, T fallback) {
        const nlohmann::json* v = take(key);
        if (!v) return fallback;
        try {
            return v->get<T>();
        } catch (const nlohmann::json::exception&) {
            throw std::invalid_argument("config: bad value type at " + dotted(key));
        }
    }

    void finish() {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw std::invalid_argument("config: unknown key " + dotted(it.key()));
    }

    std::string dotted(const std::string& key) const { return path_ + "." + key; }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

double extended_from_json(const nlohmann::json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity"))
        return kPosInf;
    throw std::invalid_argument("config: " + where + " must be a number or \"inf\"");
}

SeriesVerdict verdict_from_string(const std::string& s, const std::string& where) {
    if (s == "converges") return SeriesVerdict::Converges;
    if (s == "diverges") return SeriesVerdict::Diverges;
    if (s == "unknown") return SeriesVerdict::Unknown;
    throw std::invalid_argument("config: " + where + " must be converges|diverges|unknown");
}

std::vector<BigInt> read_values_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("config: cannot open values file " + file.string());
    std::vector<BigInt> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.emplace_back(line);
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("config: bad integer in values file: " + line);
        }
    }
    return out;
}

FamilySpec family_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    Obj o(j, "model.family");
    FamilySpec f;
    f.name = o.require("name").get<std::string>();
    if (f.name == "constant") {
        f.sigma = o.get<std::uint64_t>("sigma", 1);
    } else if (f.name == "polynomial") {
        f.coefficient = o.get<std::uint64_t>("coefficient", 1);
        f.degree = o.get<unsigned>("degree", 1);
    } else if (f.name == "geometric") {
        f.coefficient = o.get<std::uint64_t>("coefficient", 1);
        f.ratio = o.get<std::uint64_t>("ratio", 2);
    } else if (f.name == "factorial") {
        // no parameters
    } else if (f.name == "doubly_exponential_tau") {
        f.b = o.get<double>("b", 1.0);
        f.theta0 = o.get<double>("theta0", 1.0);
        f.base = o.get<double>("base", 0.0);
    } else if (f.name == "doubly_exponential_sigma") {
        f.c = o.get<double>("c", 1.0);
        f.base = o.get<double>("base", 0.0);
    } else if (f.name == "custom") {
        if (const auto* vals = o.take("values")) {
            for (const auto& v : *vals) {
                if (v.is_number_integer()) {
                    long long x = v.get<long long>();
                    if (x < 1)
                        throw std::invalid_argument("config: custom values must be >= 1");
                    f.values.emplace_back(static_cast<unsigned long>(x));
                } else if (v.is_string()) {
                    f.values.emplace_back(v.get<std::string>());
                } else {
                    throw std::invalid_argument(
                        "config: custom values must be integers or decimal strings");
                }
            }
        }
        if (const auto* file = o.take("values_file")) {
            std::filesystem::path p = file->get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            auto vals = read_values_file(p);
            f.values.insert(f.values.end(), vals.begin(), vals.end());
        }
        if (const auto* an = o.take("analytic")) f.analytic = *an;
    } else {
        throw std::invalid_argument("config: unknown family name " + f.name);
    }
    o.finish();
    return f;
}

nlohmann::json family_to_json(const FamilySpec& f) {
    nlohmann::json j{{"name", f.name}};
    if (f.name == "constant") {
        j["sigma"] = f.sigma;
    } else if (f.name == "polynomial") {
        j["coefficient"] = f.coefficient;
        j["degree"] = f.degree;
    } else if (f.name == "geometric") {
        j["coefficient"] = f.coefficient;
        j["ratio"] = f.ratio;
    } else if (f.name == "doubly_exponential_tau") {
        j["b"] = f.b;
        j["theta0"] = f.theta0;
        j["base"] = f.base;
    } else if (f.name == "doubly_exponential_sigma") {
        j["c"] = f.c;
        j["base"] = f.base;
    } else if (f.name == "custom") {
        nlohmann::json vals = nlohmann::json::array();
        for (const auto& v : f.values) vals.push_back(v.get_str());
        j["values"] = vals;
        if (f.analytic) j["analytic"] = *f.analytic;
    }
    return j;
}

AnalyticAsymptotics analytic_from_json(const nlohmann::json& j, double alpha) {
    Obj o(j, "model.family.analytic");
    AnalyticAsymptotics a;
    a.alpha = alpha;
    a.theta = extended_from_json(o.require("theta"), "analytic.theta");
    a.lambda = extended_from_json(o.require("lambda"), "analytic.lambda");
    std::string rk = o.get<std::string>("rho_class", "irregular");
    if (rk == "bounded")
        a.rho_class = RhoClass::bounded(o.get<double>("rho_bound", 0.0));
    else if (rk == "tends_to_infinity")
        a.rho_class = RhoClass::tends_to_infinity();
    else if (rk == "irregular")
        a.rho_class = RhoClass::irregular();
    else
        throw std::invalid_argument("config: bad rho_class " + rk);
    if (rk != "bounded") o.take("rho_bound");
    a.series_sigma_tau_alpha = verdict_from_string(
        o.get<std::string>("series_sigma_tau_alpha", "unknown"), "series_sigma_tau_alpha");
    a.series_tau_tau_alpha = verdict_from_string(
        o.get<std::string>("series_tau_tau_alpha", "unknown"), "series_tau_tau_alpha");
    a.condition_S = o.get<bool>("condition_S", false);
    a.condition_R = o.get<bool>("condition_R", false);
    o.finish();
    a.validate();
    return a;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir) {
    Obj root(j, "config");
    ExperimentConfig c;

    Obj model(root.require("model"), "model");
    c.alpha = model.require("alpha").get<double>();
    c.family = family_from_json(model.require("family"), base_dir);
    c.tau0 = model.get<std::uint64_t>("tau0", 2);
    c.t0 = model.get<std::uint64_t>("t0", 1);
    std::string kernel = model.get<std::string>("kernel", "independent_binomial");
    if (kernel == "independent_binomial")
        c.kernel = Kernel::IndependentBinomial;
    else if (kernel == "bulk_placement")
        c.kernel = Kernel::BulkPlacement;
    else
        throw std::invalid_argument("config: unknown kernel " + kernel);
    model.finish();

    if (const auto* run_j = root.take("run")) {
        Obj run(*run_j, "run");
        c.horizon = run.get<std::size_t>("horizon", c.horizon);
        c.reps = run.get<std::size_t>("reps", c.reps);
        c.master_seed = run.get<std::uint64_t>("master_seed", c.master_seed);
        c.bit_budget = run.get<std::size_t>("bit_budget", c.bit_budget);
        c.sampler.exact_size_cutoff =
            run.get<std::uint64_t>("exact_size_cutoff", c.sampler.exact_size_cutoff);
        c.sampler.poisson_mean_cutoff =
            run.get<double>("poisson_mean_cutoff", c.sampler.poisson_mean_cutoff);
        c.max_total_steps = run.get<std::size_t>("max_total_steps", 0);
        c.threads = run.get<unsigned>("threads", 0);
        run.finish();
    }
    if (const auto* an_j = root.take("analysis")) {
        Obj an(*an_j, "analysis");
        c.delta_grid = an.get<std::vector<double>>("delta_grid", c.delta_grid);
        c.confidence_eps = an.get<double>("confidence_eps", c.confidence_eps);
        c.tail_horizon = an.get<std::size_t>("tail_horizon", 0);
        an.finish();
    }
    if (const auto* out_j = root.take("output")) {
        Obj out(*out_j, "output");
        c.out_dir = out.get<std::string>("dir", c.out_dir);
        c.records_csv = out.get<bool>("records_csv", c.records_csv);
        c.records_json = out.get<bool>("records_json", c.records_json);
        c.dump_trajectories = out.get<bool>("dump_trajectories", c.dump_trajectories);
        out.finish();
    }
    root.finish();

    if (!(c.alpha >= 1.0)) throw std::invalid_argument("config: model.alpha must be >= 1");
    if (c.confidence_eps <= 0.0 || c.confidence_eps >= 1.0)
        throw std::invalid_argument("config: analysis.confidence_eps must lie in (0, 1)");
    for (double d : c.delta_grid)
        if (!(d > 0.0 && d <= 0.5))
            throw std::invalid_argument("config: analysis.delta_grid entries must be in (0, 0.5]");
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("config: cannot open " + file.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: parse error in " + file.string() + ": " +
                                    e.what());
    }
    return from_json(j, file.parent_path());
}

nlohmann::json ExperimentConfig::to_json() const {
    return nlohmann::json{
        {"model",
         {{"alpha", alpha},
          {"tau0", tau0},
          {"t0", t0},
          {"kernel", to_string(kernel)},
          {"family", family_to_json(family)}}},
        {"run",
         {{"horizon", horizon},
          {"reps", reps},
          {"master_seed", master_seed},
          {"bit_budget", bit_budget},
          {"exact_size_cutoff", sampler.exact_size_cutoff},
          {"poisson_mean_cutoff", sampler.poisson_mean_cutoff},
          {"max_total_steps", max_total_steps},
          {"threads", threads}}},
        {"analysis",
         {{"delta_grid", delta_grid},
          {"confidence_eps", confidence_eps},
          {"tail_horizon", tail_horizon}}},
        {"output",
         {{"dir", out_dir},
          {"records_csv", records_csv},
          {"records_json", records_json},
          {"dump_trajectories", dump_trajectories}}},
    };
}

std::shared_ptr<const GrowthSequence> ExperimentConfig::build_sequence(
    std::size_t steps_needed) const {
    std::size_t need =
        steps_needed ? steps_needed : std::max(horizon, effective_tail_horizon()) + 2;
    const FamilySpec& f = family;
    if (f.name == "constant")
        return std::make_shared<GrowthSequence>(
            GrowthSequence::constant(f.sigma, BigInt(tau0), need, bit_budget));
    if (f.name == "polynomial")
        return std::make_shared<GrowthSequence>(GrowthSequence::polynomial(
            f.coefficient, f.degree, BigInt(tau0), need, bit_budget));
    if (f.name == "geometric")
        return std::make_shared<GrowthSequence>(
            GrowthSequence::geometric(f.coefficient, f.ratio, BigInt(tau0), need, bit_budget));
    if (f.name == "factorial")
        return std::make_shared<GrowthSequence>(
            GrowthSequence::factorial(BigInt(tau0), need, bit_budget));
    if (f.name == "doubly_exponential_tau")
        return std::make_shared<GrowthSequence>(GrowthSequence::doubly_exponential_tau(
            f.b, f.theta0, f.base > 0 ? f.base : alpha, need, bit_budget));
    if (f.name == "doubly_exponential_sigma")
        return std::make_shared<GrowthSequence>(GrowthSequence::doubly_exponential_sigma(
            f.c, f.base > 0 ? f.base : alpha, BigInt(tau0), need, bit_budget));
    if (f.name == "custom") {
        std::optional<AnalyticAsymptotics> analytic;
        if (f.analytic) analytic = analytic_from_json(*f.analytic, alpha);
        return std::make_shared<GrowthSequence>(
            GrowthSequence::custom(f.values, BigInt(tau0), std::move(analytic), bit_budget));
    }
    throw std::invalid_argument("config: unknown family " + f.name);
}

ModelParams ExperimentConfig::build_model(std::shared_ptr<const GrowthSequence> seq) const {
    ModelParams p;
    p.alpha = alpha;
    p.t0 = BigInt(t0);
    p.seq = std::move(seq);
    p.kernel = kernel;
    p.sampler = sampler;
    return p;
}

RunOptions ExperimentConfig::build_run_options() const {
    RunOptions o;
    o.horizon = horizon;
    o.reps = reps;
    o.master_seed = master_seed;
    o.confidence_eps = confidence_eps;
    o.tail_horizon = effective_tail_horizon();
    o.delta_grid = delta_grid;
    o.threads = threads;
    o.max_total_steps = max_total_steps;
    return o;
}

}  // namespace urnsim
