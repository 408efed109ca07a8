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

#ifndef URNSIM_IO_HPP
#define URNSIM_IO_HPP

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "urnsim/montecarlo.hpp"

#include "json.hpp"

namespace urnsim {

/// Serialize a double with 17 significant digits (round-trippable).
std::string format_double(double v);

/// Write content to path atomically (temp file in the same directory, then
/// rename).
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// Per-replication step dump: one CSV per replication, written atomically on
/// close. Columns documented in docs/formats.md.
class TrajectoryWriter {
public:
    TrajectoryWriter(const std::filesystem::path& dir, std::uint64_t replication_id);
    ~TrajectoryWriter();
    TrajectoryWriter(const TrajectoryWriter&) = delete;
    TrajectoryWriter& operator=(const TrajectoryWriter&) = delete;
    TrajectoryWriter(TrajectoryWriter&&) = default;

    void row(std::size_t n, const StepResult& r, const GrowthSequence& seq);

private:
    std::filesystem::path final_path_;
    std::filesystem::path tmp_path_;
    std::ofstream out_;
};

/// records.csv: one row per replication. Schema v1, see docs/formats.md.
std::string records_csv(const std::vector<TrajectoryRecord>& records);

/// The same records as a JSON array (schema v1).
nlohmann::json records_json(const std::vector<TrajectoryRecord>& records);

/// Summary JSON document (schema v1) with the config echo supplied by the
/// caller.
nlohmann::json summary_json(const EnsembleSummary& summary, const nlohmann::json& config_echo);

}  // namespace urnsim

#endif  // URNSIM_IO_HPP
