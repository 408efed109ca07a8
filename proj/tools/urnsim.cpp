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

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "urnsim/acceptance.hpp"
#include "urnsim/classifier.hpp"
#include "urnsim/config.hpp"
#include "urnsim/io.hpp"
#include "urnsim/version.hpp"

namespace {

using urnsim::ExperimentConfig;

int cmd_classify(const std::string& config_path, bool strict) {
    ExperimentConfig cfg = ExperimentConfig::load(config_path);
    std::size_t n_max = 48;
    if (cfg.family.name == "custom" && !cfg.family.values.empty())
        n_max = cfg.family.values.size() > 1 ? cfg.family.values.size() - 1 : 1;
    auto seq = cfg.build_sequence(std::max<std::size_t>(n_max + 2, 16));
    urnsim::ClassifierInputs in = urnsim::make_inputs(*seq, cfg.alpha, n_max);
    urnsim::RegimeVerdict v = urnsim::classify(cfg.alpha, in, strict);
    std::cout << v.to_json().dump(2) << std::endl;
    bool definite = v.regime != urnsim::Regime::Unclassifiable &&
                    v.dominance != urnsim::Dominance::Unknown &&
                    v.monopoly != urnsim::Monopoly::Unknown;
    return definite ? 0 : 2;
}

int cmd_simulate(const std::string& config_path, std::uint64_t* seed_override,
                 unsigned* threads_override, std::string* out_override,
                 bool dump_trajectories) {
    ExperimentConfig cfg = ExperimentConfig::load(config_path);
    if (seed_override) cfg.master_seed = *seed_override;
    if (threads_override) cfg.threads = *threads_override;
    if (out_override) cfg.out_dir = *out_override;
    if (dump_trajectories) cfg.dump_trajectories = true;

    auto seq = cfg.build_sequence();
    urnsim::ModelParams params = cfg.build_model(seq);
    urnsim::RunOptions opts = cfg.build_run_options();
    std::filesystem::path out_dir = cfg.out_dir;
    std::filesystem::create_directories(out_dir);
    if (cfg.dump_trajectories) opts.trajectory_dir = (out_dir / "trajectories").string();

    urnsim::RunResult result = urnsim::run_replications(params, opts);

    nlohmann::json summary = urnsim::summary_json(result.summary, cfg.to_json());
    urnsim::atomic_write(out_dir / "summary.json", summary.dump(2) + "\n");
    if (cfg.records_csv)
        urnsim::atomic_write(out_dir / "records.csv", urnsim::records_csv(result.records));
    if (cfg.records_json)
        urnsim::atomic_write(out_dir / "records.json",
                             urnsim::records_json(result.records).dump(2) + "\n");

    std::cout << summary.dump(2) << std::endl;
    std::cerr << "wrote " << (out_dir / "summary.json").string();
    if (cfg.records_csv) std::cerr << ", " << (out_dir / "records.csv").string();
    if (cfg.dump_trajectories)
        std::cerr << ", " << (out_dir / "trajectories").string() << "/";
    std::cerr << std::endl;
    return result.summary.partial ? 2 : 0;
}

int cmd_verify(const std::string& id, unsigned threads) {
    namespace acc = urnsim::acceptance;
    std::vector<acc::CriterionResult> results;
    if (id == "all") {
        results = acc::run_all(threads);
    } else {
        results.push_back(acc::run_criterion(id, threads));
    }
    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << r.summary_line() << "\n";
        for (const auto& line : r.lines) std::cout << line << "\n";
        all_pass &= r.pass;
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-bin feedback urn simulator and regime classifier"};
    app.set_version_flag("--version", urnsim::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    bool strict = false;
    auto* classify =
        app.add_subcommand("classify", "print the regime verdict for a configured model");
    classify->add_option("--config", config_path, "experiment config file (JSON)")
        ->required();
    classify->add_flag("--strict", strict, "accept analytic asymptotics only");

    std::string sim_config;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out_dir;
    bool dump = false;
    auto* simulate = app.add_subcommand("simulate", "run replications and write results");
    simulate->add_option("--config", sim_config, "experiment config file (JSON)")->required();
    auto* seed_opt = simulate->add_option("--seed", seed, "master seed override");
    auto* threads_opt = simulate->add_option("--threads", threads, "worker thread cap");
    auto* out_opt = simulate->add_option("--out", out_dir, "output directory override");
    simulate->add_flag("--dump-trajectories", dump, "write per-step CSV per replication");

    std::string verify_id;
    unsigned verify_threads = 0;
    auto* verify = app.add_subcommand("verify", "run a named verification experiment");
    verify->add_option("id", verify_id, "criterion id or 'all'")->required();
    verify->add_option("--threads", verify_threads, "worker thread cap");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(classify)) return cmd_classify(config_path, strict);
        if (app.got_subcommand(simulate))
            return cmd_simulate(sim_config, seed_opt->count() ? &seed : nullptr,
                                threads_opt->count() ? &threads : nullptr,
                                out_opt->count() ? &out_dir : nullptr, dump);
        if (app.got_subcommand(verify)) return cmd_verify(verify_id, verify_threads);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 1;
}
