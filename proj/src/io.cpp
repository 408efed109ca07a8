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

#include "urnsim/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "urnsim/version.hpp"

namespace urnsim {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.good()) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& dir,
                                   std::uint64_t replication_id) {
    std::filesystem::create_directories(dir);
    final_path_ = dir / ("trajectory_" + std::to_string(replication_id) + ".csv");
    tmp_path_ = final_path_;
    tmp_path_ += ".tmp";
    out_.open(tmp_path_, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot open " + tmp_path_.string());
    out_ << "n,mode,t,u,tau,b1,theta,epsilon,log_t,log_u,log_tau,log_b1\n";
}

TrajectoryWriter::~TrajectoryWriter() {
    if (out_.is_open()) {
        out_.close();
        std::error_code ec;
        std::filesystem::rename(tmp_path_, final_path_, ec);
    }
}

void TrajectoryWriter::row(std::size_t n, const StepResult& r, const GrowthSequence& seq) {
    const ProcessState& s = r.next;
    out_ << n << ',' << to_string(s.mode) << ',';
    if (s.mode == CountMode::Exact) {
        out_ << s.t.get_str() << ',' << s.u.get_str() << ',' << seq.tau(n).get_str() << ','
             << r.b1_exact.get_str() << ',';
    } else {
        out_ << ",,,,";  // exact integers unavailable in float mode
    }
    out_ << format_double(s.theta()) << ',' << format_double(r.noise.epsilon) << ','
         << format_double(s.log_t) << ',' << format_double(s.log_u) << ','
         << format_double(seq.log_tau(n)) << ',' << format_double(r.log_b1) << '\n';
}

std::string records_csv(const std::vector<TrajectoryRecord>& records) {
    std::ostringstream os;
    os << "replication_id,final_n,mode,final_theta,log_theta,log_one_minus_theta,"
          "min_side,mid_min_side,winner,last_crossing,monopoly_onset,"
          "cert_at_step,cert_loser_count,cert_log_loser_count,cert_epsilon_bound,"
          "cert_tail_horizon,cert_tail_bound,cert_violated,"
          "noise_mean,noise_var,noise_steps,deviation_count,deviation_count_at_half,"
          "deviation_first_step\n";
    for (const auto& r : records) {
        os << r.replication_id << ',' << r.final_n << ',' << to_string(r.final_mode) << ','
           << format_double(r.final_theta) << ',' << format_double(r.log_theta) << ','
           << format_double(r.log_one_minus_theta) << ',' << format_double(r.min_side)
           << ',' << format_double(r.mid_min_side) << ',' << to_string(r.winner) << ',';
        if (r.last_crossing) os << *r.last_crossing;
        os << ',';
        if (r.monopoly_onset) os << *r.monopoly_onset;
        os << ',';
        if (r.certificate) {
            const auto& c = *r.certificate;
            os << c.at_step << ',' << c.loser_count << ','
               << format_double(c.log_loser_count) << ',' << format_double(c.epsilon_bound)
               << ',' << c.tail_horizon << ',' << format_double(c.tail_bound) << ','
               << (r.certificate_violated ? 1 : 0) << ',';
        } else {
            os << ",,,,,,0,";
        }
        os << format_double(r.noise_mean) << ',' << format_double(r.noise_var) << ','
           << r.noise_steps << ',' << r.deviations.count << ',' << r.deviations.count_at_half
           << ',';
        if (r.deviations.first_step) os << *r.deviations.first_step;
        os << '\n';
    }
    return os.str();
}

nlohmann::json records_json(const std::vector<TrajectoryRecord>& records) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json j{
            {"replication_id", r.replication_id},
            {"final_n", r.final_n},
            {"mode", to_string(r.final_mode)},
            {"final_theta", r.final_theta},
            {"log_theta", r.log_theta},
            {"log_one_minus_theta", r.log_one_minus_theta},
            {"min_side", r.min_side},
            {"mid_min_side", r.mid_min_side},
            {"winner", to_string(r.winner)},
            {"noise", {{"mean", r.noise_mean}, {"variance", r.noise_var}, {"steps", r.noise_steps}}},
            {"deviations",
             {{"count", r.deviations.count}, {"count_at_half", r.deviations.count_at_half}}},
        };
        if (r.last_crossing) j["last_crossing"] = *r.last_crossing;
        if (r.monopoly_onset) j["monopoly_onset"] = *r.monopoly_onset;
        if (r.deviations.first_step) j["deviations"]["first_step"] = *r.deviations.first_step;
        if (r.certificate) {
            const auto& c = *r.certificate;
            j["certificate"] = {{"at_step", c.at_step},
                                {"loser_count", c.loser_count},
                                {"log_loser_count", c.log_loser_count},
                                {"epsilon_bound", c.epsilon_bound},
                                {"tail_horizon", c.tail_horizon},
                                {"tail_bound", c.tail_bound},
                                {"violated", r.certificate_violated}};
        }
        out.push_back(std::move(j));
    }
    return out;
}

nlohmann::json summary_json(const EnsembleSummary& summary,
                            const nlohmann::json& config_echo) {
    return nlohmann::json{
        {"schema", "v1"},
        {"tool", {{"name", "urnsim"}, {"version", kVersion}}},
        {"config", config_echo},
        {"results", summary.to_json()},
    };
}

}  // namespace urnsim
