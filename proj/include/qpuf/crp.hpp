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

// Challenge-response pairs: response derivation, the multi-instance
// experiment runner and the append-only CRP store.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "qpuf/circuit.hpp"

namespace qpuf::crp {

using circuit::Challenge;

struct ResponseRecord {
    Challenge challenge;
    std::string bits;  // qubit 0 first
    std::array<double, circuit::kQubits> p1{};
    std::string profile_name;
    int shots = 0;
    int instance_id = 0;
    std::uint64_t seed = 0;

    bool operator==(const ResponseRecord&) const = default;
};

/// bit i = 1 iff p1[i] > 0.5; exact ties read as 0.
std::string majority_bits(const std::array<double, circuit::kQubits>& p1);

ResponseRecord derive_response(const circuit::JobResult& job, int instance_id = 0);

struct InstanceRecord {
    int instance_id = 0;
    std::string profile_name;
    std::vector<ResponseRecord> responses;  // one per challenge, challenge order
};

/// Seed of job `challenge_index` in instance `instance_id`. Independent of the
/// number of instances or challenges in the run.
std::uint64_t job_seed(std::uint64_t base_seed, int instance_id, int challenge_index, std::uint64_t salt);

/// Executes every challenge once per instance. `threads` > 1 runs jobs in
/// parallel; output order and content do not depend on it.
std::vector<InstanceRecord> run_experiment(const std::vector<Challenge>& challenges,
                                           const noise::DeviceProfile& profile, int shots, int n_instances,
                                           std::uint64_t base_seed, int threads = 1);

/// `count` challenges from random_challenge, seeded off `seed`.
std::vector<Challenge> random_challenges(int count, std::uint64_t seed);

std::string format_record(const ResponseRecord& r);
/// Throws ParseError carrying `line_no`.
ResponseRecord parse_record(std::string_view line, std::size_t line_no);

/// Append-only store of ResponseRecords, one JSON record per line. Appends are
/// serialized internally; a (challenge, instance, profile) key may appear once.
class CrpStore {
public:
    /// In-memory store with no backing file.
    CrpStore() = default;

    /// Reads an existing file. Throws IoError if it cannot be opened and
    /// ParseError / ConflictError on bad content.
    static CrpStore load(const std::filesystem::path& path);
    /// Loads `path` if it exists, otherwise starts an empty store backed by it.
    static CrpStore open(const std::filesystem::path& path);
    /// Truncates `path` and starts an empty store backed by it.
    static CrpStore create(const std::filesystem::path& path);

    CrpStore(CrpStore&& other) noexcept;
    CrpStore& operator=(CrpStore&& other) noexcept;

    /// Throws ConflictError on a duplicate key, IoError when the write fails.
    void append(const ResponseRecord& r);

    const std::vector<ResponseRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

private:
    using Key = std::tuple<std::string, int, std::string, std::uint64_t>;
    static Key key_of(const ResponseRecord& r);
    void insert_loaded(ResponseRecord r, std::size_t line_no);

    std::optional<std::filesystem::path> path_;
    std::vector<ResponseRecord> records_;
    std::set<Key> keys_;
    mutable std::mutex write_mutex_;
};

/// Groups records by profile, then instance id (ascending). Responses keep
/// store order within an instance.
std::map<std::string, std::vector<InstanceRecord>> group_instances(const std::vector<ResponseRecord>& records);

}  // namespace qpuf::crp
