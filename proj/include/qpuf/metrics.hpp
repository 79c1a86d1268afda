// Copyright 2026 The qpuf-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// PUF quality metrics over instance records: randomness, diffuseness
// (intra-device Hamming distance), per-key reliability and uniqueness
// (inter-device Hamming distance).

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qpuf/crp.hpp"

namespace qpuf::metrics {

using crp::InstanceRecord;

struct Hamming {
    int distance = 0;
    double percent = 0.0;
};

/// Throws ArgumentError on length mismatch.
Hamming hamming(std::string_view a, std::string_view b);

/// Percent of ones. Throws ArgumentError on an empty string.
double randomness(std::string_view response);

/// Mean Hamming percent over all unordered response pairs of one instance.
/// Throws ArgumentError with fewer than two responses.
double diffuseness(const InstanceRecord& instance);

struct Reliability {
    std::vector<int> per_key;  // 100 when the two responses match exactly, else 0
    double fraction_pct = 0.0;
};

/// Throws ArgumentError when the two instances were run on different challenges.
Reliability reliability(const InstanceRecord& a, const InstanceRecord& b);

/// Mean Hamming percent between matched keys of two devices. Throws
/// ArgumentError for the same profile name or different challenge lists.
double uniqueness(const InstanceRecord& a, const InstanceRecord& b);

/// table[qubit][job] = p1 of that qubit in that job.
using ProbabilityTable = std::array<std::vector<double>, circuit::kQubits>;
ProbabilityTable probability_series(const InstanceRecord& instance);

bool same_challenges(const InstanceRecord& a, const InstanceRecord& b);

struct ProfileMetrics {
    std::string profile;
    int instances = 0;
    int challenges = 0;
    double randomness_pct = 0.0;                     // mean over every response
    std::optional<double> diffuseness_pct;           // mean over instances
    std::optional<double> reliability_fraction_pct;  // mean over instance pairs
    std::vector<int> per_key_reliability;            // 100 iff all instances agree
    ProbabilityTable per_qubit_p1;                   // first instance
};

struct MetricsReport {
    std::vector<ProfileMetrics> profiles;
    std::optional<double> uniqueness_pct;  // needs two or more profiles
    std::vector<std::string> warnings;
};

/// Throws ArgumentError when instances disagree on the challenge list.
MetricsReport build_report(const std::map<std::string, std::vector<InstanceRecord>>& by_profile);

/// One section per metric, percentages to 2 decimals.
std::string report_csv(const MetricsReport& report);
std::string report_json(const MetricsReport& report);
/// Header q0..q7, one row per job.
std::string series_csv(const ProbabilityTable& table);

}  // namespace qpuf::metrics
