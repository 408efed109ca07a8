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

#ifndef URNSIM_ACCEPTANCE_HPP
#define URNSIM_ACCEPTANCE_HPP

#include <string>
#include <vector>

namespace urnsim::acceptance {

struct CriterionResult {
    std::string id;
    bool pass = false;
    std::vector<std::string> lines;  // observed-vs-required details
    double seconds = 0.0;

    std::string summary_line() const;
};

/// Stable criterion identifiers, in canonical order.
const std::vector<std::string>& criterion_ids();

/// Run one criterion (threads = 0: hardware concurrency).
CriterionResult run_criterion(const std::string& id, unsigned threads = 0);

/// Run every criterion; returns one result per id.
std::vector<CriterionResult> run_all(unsigned threads = 0);

}  // namespace urnsim::acceptance

#endif  // URNSIM_ACCEPTANCE_HPP
