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

#include "qpuf/crp.hpp"

#include <atomic>
#include <bit>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "qpuf/errors.hpp"
#include "qpuf/records.hpp"
#include "qpuf/seed.hpp"

namespace qpuf::crp {

using Json = nlohmann::json;

std::string majority_bits(const std::array<double, circuit::kQubits>& p1) {
    std::string bits(circuit::kQubits, '0');
    for (std::size_t i = 0; i < p1.size(); ++i) {
        if (p1[i] > 0.5) bits[i] = '1';
    }
    return bits;
}

ResponseRecord derive_response(const circuit::JobResult& job, int instance_id) {
    if (job.shots < 1) throw ArgumentError("job has no shots");
    return ResponseRecord{job.challenge, majority_bits(job.p1), job.p1, job.profile_name,
                          job.shots,     instance_id,          job.seed};
}

std::uint64_t job_seed(std::uint64_t base_seed, int instance_id, int challenge_index, std::uint64_t salt) {
    return derive_seed(base_seed, static_cast<std::uint64_t>(instance_id),
                       static_cast<std::uint64_t>(challenge_index), salt);
}

std::vector<Challenge> random_challenges(int count, std::uint64_t seed) {
    std::vector<Challenge> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i) {
        out.push_back(circuit::random_challenge(derive_seed(seed, 0x6368616cULL, static_cast<std::uint64_t>(i))));
    }
    return out;
}

std::vector<InstanceRecord> run_experiment(const std::vector<Challenge>& challenges,
                                           const noise::DeviceProfile& profile, int shots, int n_instances,
                                           std::uint64_t base_seed, int threads) {
    if (challenges.empty()) throw ArgumentError("experiment needs at least one challenge");
    if (n_instances < 1) throw ArgumentError("experiment needs at least one instance");
    if (shots < 1) throw ArgumentError("shots must be >= 1");

    const std::size_t n_challenges = challenges.size();
    const std::size_t total = n_challenges * static_cast<std::size_t>(n_instances);
    std::vector<circuit::Circuit> circuits;
    circuits.reserve(n_challenges);
    for (const auto& c : challenges) circuits.push_back(circuit::build_qpuf_circuit(c));

    std::vector<std::optional<ResponseRecord>> slots(total);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto worker = [&] {
        for (std::size_t job = next++; job < total; job = next++) {
            const int instance = static_cast<int>(job / n_challenges);
            const std::size_t index = job % n_challenges;
            try {
                const auto seed = job_seed(base_seed, instance, static_cast<int>(index), profile.seed_salt);
                slots[job] = derive_response(circuit::execute_job(circuits[index], profile, shots, seed), instance);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(total)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<InstanceRecord> out(static_cast<std::size_t>(n_instances));
    for (int i = 0; i < n_instances; ++i) {
        auto& inst = out[static_cast<std::size_t>(i)];
        inst.instance_id = i;
        inst.profile_name = profile.name;
        inst.responses.reserve(n_challenges);
        for (std::size_t c = 0; c < n_challenges; ++c) {
            inst.responses.push_back(std::move(*slots[static_cast<std::size_t>(i) * n_challenges + c]));
        }
    }
    return out;
}

std::string format_record(const ResponseRecord& r) {
    return records::LineWriter{}
        .field("profile", r.profile_name)
        .field("instance", r.instance_id)
        .field("init_bits", r.challenge.init_bits())
        .field("theta", r.challenge.theta())
        .field("bits", r.bits)
        .field("p1", std::span<const double>(r.p1))
        .field("shots", r.shots)
        .field("seed", r.seed)
        .str();
}

namespace {

const Json& member(const Json& doc, const char* key, std::size_t line_no) {
    const auto it = doc.find(key);
    if (it == doc.end()) throw ParseError(line_no, std::string("missing field '") + key + "'");
    return *it;
}

}  // namespace

ResponseRecord parse_record(std::string_view line, std::size_t line_no) {
    Json doc;
    try {
        doc = Json::parse(line);
    } catch (const Json::parse_error& e) {
        throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError(line_no, "record is not an object");
    try {
        const Json& p1 = member(doc, "p1", line_no);
        if (!p1.is_array() || p1.size() != circuit::kQubits) throw ParseError(line_no, "p1 must hold 8 numbers");
        const Json& theta = member(doc, "theta", line_no);
        if (!theta.is_number()) throw ParseError(line_no, "theta must be a number");
        ResponseRecord r{Challenge(member(doc, "init_bits", line_no).get<std::string>(), theta.get<double>()),
                         member(doc, "bits", line_no).get<std::string>(),
                         {},
                         member(doc, "profile", line_no).get<std::string>(),
                         member(doc, "shots", line_no).get<int>(),
                         member(doc, "instance", line_no).get<int>(),
                         member(doc, "seed", line_no).get<std::uint64_t>()};
        for (std::size_t i = 0; i < r.p1.size(); ++i) r.p1[i] = p1[i].get<double>();
        if (r.bits.size() != circuit::kQubits || r.bits.find_first_not_of("01") != std::string::npos) {
            throw ParseError(line_no, "bits must be an 8-character 0/1 string");
        }
        return r;
    } catch (const Json::exception& e) {
        throw ParseError(line_no, std::string("bad field type: ") + e.what());
    } catch (const ArgumentError& e) {
        throw ParseError(line_no, e.what());
    }
}

CrpStore::CrpStore(CrpStore&& other) noexcept
    : path_(std::move(other.path_)), records_(std::move(other.records_)), keys_(std::move(other.keys_)) {}

CrpStore& CrpStore::operator=(CrpStore&& other) noexcept {
    path_ = std::move(other.path_);
    records_ = std::move(other.records_);
    keys_ = std::move(other.keys_);
    return *this;
}

CrpStore::Key CrpStore::key_of(const ResponseRecord& r) {
    return {r.profile_name, r.instance_id, r.challenge.init_bits(), std::bit_cast<std::uint64_t>(r.challenge.theta())};
}

void CrpStore::insert_loaded(ResponseRecord r, std::size_t line_no) {
    if (!keys_.insert(key_of(r)).second) {
        throw ConflictError("line " + std::to_string(line_no) + ": duplicate CRP record");
    }
    records_.push_back(std::move(r));
}

CrpStore CrpStore::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open CRP store " + path.string());
    CrpStore store;
    store.path_ = path;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        store.insert_loaded(parse_record(line, line_no), line_no);
    }
    return store;
}

CrpStore CrpStore::open(const std::filesystem::path& path) {
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) return load(path);
    return create(path);
}

CrpStore CrpStore::create(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create CRP store " + path.string());
    CrpStore store;
    store.path_ = path;
    return store;
}

void CrpStore::append(const ResponseRecord& r) {
    std::lock_guard lock(write_mutex_);
    Key key = key_of(r);
    if (keys_.contains(key)) {
        throw ConflictError("duplicate CRP record for profile '" + r.profile_name + "', instance " +
                            std::to_string(r.instance_id) + ", challenge " + circuit::format_challenge(r.challenge));
    }
    if (path_) {
        std::ofstream out(*path_, std::ios::binary | std::ios::app);
        out << format_record(r) << '\n';
        out.flush();
        if (!out) throw IoError("write to CRP store " + path_->string() + " failed");
    }
    keys_.insert(std::move(key));
    records_.push_back(r);
}

std::map<std::string, std::vector<InstanceRecord>> group_instances(const std::vector<ResponseRecord>& records) {
    std::map<std::string, std::map<int, InstanceRecord>> grouped;
    for (const auto& r : records) {
        auto& inst = grouped[r.profile_name][r.instance_id];
        inst.instance_id = r.instance_id;
        inst.profile_name = r.profile_name;
        inst.responses.push_back(r);
    }
    std::map<std::string, std::vector<InstanceRecord>> out;
    for (auto& [profile, by_id] : grouped) {
        for (auto& [id, inst] : by_id) out[profile].push_back(std::move(inst));
    }
    return out;
}

}  // namespace qpuf::crp
