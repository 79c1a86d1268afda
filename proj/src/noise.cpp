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

#include "qpuf/noise.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qpuf/errors.hpp"
#include "qpuf/seed.hpp"

namespace qpuf::noise {

using qstate::Gate1;
using qstate::KrausSet;
using Json = nlohmann::json;

namespace {

DeviceProfile make_device(std::string name,
                          std::initializer_list<std::array<double, 3>> rows) {
    DeviceProfile p;
    p.name = std::move(name);
    p.idle_duration_us = kDefaultIdleDurationUs;
    p.seed_salt = hash_bytes(p.name);
    int i = 0;
    for (const auto& [t1, t2, f] : rows) {
        p.qubits.push_back({i++, t1, t2, f, kDefaultReadoutError});
    }
    return p;
}

std::vector<DeviceProfile> make_builtins() {
    std::vector<DeviceProfile> out;
    // Calibration snapshots: T1 (us), T2 (us), frequency (GHz) for physical qubits 0-7.
    out.push_back(make_device("ibm_osaka", {{403.8, 238.66, 4.718},
                                            {320.35, 363.44, 4.8},
                                            {228.67, 191.89, 4.833},
                                            {350.98, 198.82, 4.661},
                                            {43.98, 83.54, 4.907},
                                            {161.3, 68.47, 4.72},
                                            {334.1, 39.52, 4.635},
                                            {269.28, 9.07, 4.717}}));
    out.push_back(make_device("ibm_kyoto", {{184.74, 30.2, 4.908},
                                            {195.1, 71.18, 4.856},
                                            {247.98, 51.49, 4.733},
                                            {94.89, 47.87, 4.82},
                                            {417.88, 67.25, 4.854},
                                            {189.22, 331.44, 4.728},
                                            {213.21, 263.22, 4.783},
                                            {329.81, 126.1, 4.944}}));
    out.push_back(make_device("ibm_sherbrooke", {{375.14, 172.24, 4.636},
                                                 {351.25, 70.13, 4.736},
                                                 {237.88, 150.08, 4.819},
                                                 {370.71, 163.46, 4.747},
                                                 {120.26, 199.6, 4.788},
                                                 {104.23, 161.77, 4.851},
                                                 {312.87, 186.59, 4.9},
                                                 {120.79, 221.67, 4.756}}));

    // Placeholder calibration; the ideal flag makes every idle channel {I}.
    DeviceProfile ideal;
    ideal.name = "ideal";
    ideal.idle_duration_us = 0.0;
    ideal.seed_salt = hash_bytes(ideal.name);
    ideal.ideal = true;
    for (int i = 0; i < kProfileQubits; ++i) ideal.qubits.push_back({i, 1.0e6, 1.0e6, 5.0, 0.0});
    out.push_back(std::move(ideal));
    return out;
}

double require_number(const Json& obj, const std::string& key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(path + key, "missing field");
    if (!it->is_number()) throw SchemaError(path + key, "expected a number");
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw SchemaError(path + key, "must be finite");
    return v;
}

}  // namespace

const QubitCalibration& DeviceProfile::qubit(int q) const {
    if (q < 0 || static_cast<std::size_t>(q) >= qubits.size()) {
        throw ArgumentError("profile '" + name + "' has no qubit " + std::to_string(q));
    }
    return qubits[static_cast<std::size_t>(q)];
}

IdleChannel idle_parameters(const QubitCalibration& cal, double duration_us) {
    if (duration_us < 0.0) throw ArgumentError("idle duration must be >= 0");
    IdleChannel ch;
    ch.gamma = -std::expm1(-duration_us / cal.t1_us);
    const double dephasing_rate = std::max(0.0, 1.0 / cal.t2_us - 1.0 / (2.0 * cal.t1_us));
    ch.lambda = -std::expm1(-duration_us * dephasing_rate);
    return ch;
}

IdleChannel idle_parameters(const DeviceProfile& profile, int qubit, double duration_us) {
    if (profile.ideal) {
        if (duration_us < 0.0) throw ArgumentError("idle duration must be >= 0");
        return {};
    }
    return idle_parameters(profile.qubit(qubit), duration_us);
}

KrausSet amplitude_damping(double gamma) {
    Gate1 k0, k1;
    k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
    k1 << 0, std::sqrt(gamma), 0, 0;
    return KrausSet{{k0, k1}};
}

KrausSet dephasing(double lambda) {
    Gate1 z;
    z << 1, 0, 0, -1;
    return KrausSet{{std::sqrt(1.0 - lambda / 2.0) * Gate1::Identity(), std::sqrt(lambda / 2.0) * z}};
}

KrausSet idle_channel(const DeviceProfile& profile, int qubit, double duration_us) {
    const IdleChannel ch = idle_parameters(profile, qubit, duration_us);
    const KrausSet damp = amplitude_damping(ch.gamma);
    const KrausSet deph = dephasing(ch.lambda);
    KrausSet out;
    for (const auto& d : deph.operators) {
        for (const auto& a : damp.operators) {
            Gate1 k = d * a;
            if (k.cwiseAbs().maxCoeff() > 0.0) out.operators.push_back(k);
        }
    }
    return out;
}

qstate::ShotCounts apply_readout_error(const qstate::ShotCounts& counts, const DeviceProfile& profile,
                                       std::uint64_t seed) {
    if (counts.shots < 1) throw ArgumentError("readout error needs at least one shot");
    std::vector<double> rates(static_cast<std::size_t>(counts.n_qubits), 0.0);
    bool any = false;
    for (int q = 0; q < counts.n_qubits; ++q) {
        rates[static_cast<std::size_t>(q)] = profile.qubit(q).readout_error;
        any = any || rates[static_cast<std::size_t>(q)] > 0.0;
    }
    if (!any) return counts;

    Rng rng(seed);
    qstate::ShotCounts out;
    out.n_qubits = counts.n_qubits;
    out.shots = counts.shots;
    for (const auto& [index, n] : counts.counts) {
        for (int s = 0; s < n; ++s) {
            std::uint32_t observed = index;
            for (int q = 0; q < counts.n_qubits; ++q) {
                const double rate = rates[static_cast<std::size_t>(q)];
                if (rate > 0.0 && rng.uniform() < rate) observed ^= std::uint32_t{1} << q;
            }
            ++out.counts[observed];
        }
    }
    out.recount();
    return out;
}

qstate::OutcomeDistribution apply_readout_confusion(const qstate::OutcomeDistribution& dist,
                                                    const DeviceProfile& profile) {
    qstate::OutcomeDistribution out = dist;
    for (int q = 0; q < dist.n_qubits; ++q) {
        const double e = profile.qubit(q).readout_error;
        if (e == 0.0) continue;
        const std::size_t bit = std::size_t{1} << q;
        for (std::size_t b = 0; b < out.probs.size(); ++b) {
            if (b & bit) continue;
            const double p0 = out.probs[b];
            const double p1 = out.probs[b | bit];
            out.probs[b] = (1.0 - e) * p0 + e * p1;
            out.probs[b | bit] = e * p0 + (1.0 - e) * p1;
        }
    }
    return out;
}

DeviceProfile load_profile(std::string_view document) {
    Json doc;
    try {
        doc = Json::parse(document);
    } catch (const Json::parse_error& e) {
        throw SchemaError("<document>", e.what());
    }
    if (!doc.is_object()) throw SchemaError("<document>", "expected an object");

    DeviceProfile p;
    const auto name = doc.find("name");
    if (name == doc.end()) throw SchemaError("name", "missing field");
    if (!name->is_string() || name->get<std::string>().empty()) throw SchemaError("name", "expected a non-empty string");
    p.name = name->get<std::string>();

    p.idle_duration_us = require_number(doc, "idle_duration_us", "");
    if (p.idle_duration_us < 0.0) throw SchemaError("idle_duration_us", "must be >= 0");

    if (const auto salt = doc.find("seed_salt"); salt != doc.end()) {
        if (!salt->is_number_unsigned()) throw SchemaError("seed_salt", "expected an unsigned integer");
        p.seed_salt = salt->get<std::uint64_t>();
    } else {
        p.seed_salt = hash_bytes(p.name);
    }
    if (const auto ideal = doc.find("ideal"); ideal != doc.end()) {
        if (!ideal->is_boolean()) throw SchemaError("ideal", "expected a boolean");
        p.ideal = ideal->get<bool>();
    }

    const auto qubits = doc.find("qubits");
    if (qubits == doc.end()) throw SchemaError("qubits", "missing field");
    if (!qubits->is_array()) throw SchemaError("qubits", "expected an array");
    if (qubits->size() != kProfileQubits) {
        throw SchemaError("qubits", "expected " + std::to_string(kProfileQubits) + " entries, got " +
                                        std::to_string(qubits->size()));
    }

    p.qubits.resize(kProfileQubits);
    std::set<int> seen;
    for (std::size_t i = 0; i < qubits->size(); ++i) {
        const Json& q = (*qubits)[i];
        const std::string path = "qubits[" + std::to_string(i) + "].";
        if (!q.is_object()) throw SchemaError(path.substr(0, path.size() - 1), "expected an object");
        const auto idx = q.find("index");
        if (idx == q.end()) throw SchemaError(path + "index", "missing field");
        if (!idx->is_number_integer()) throw SchemaError(path + "index", "expected an integer");
        const int index = idx->get<int>();
        if (index < 0 || index >= kProfileQubits) throw SchemaError(path + "index", "must be in 0..7");
        if (!seen.insert(index).second) throw SchemaError(path + "index", "duplicate qubit index");

        QubitCalibration cal;
        cal.index = index;
        cal.t1_us = require_number(q, "t1_us", path);
        if (cal.t1_us <= 0.0) throw SchemaError(path + "t1_us", "must be > 0");
        cal.t2_us = require_number(q, "t2_us", path);
        if (cal.t2_us <= 0.0) throw SchemaError(path + "t2_us", "must be > 0");
        cal.frequency_ghz = require_number(q, "frequency_ghz", path);
        if (cal.frequency_ghz <= 0.0) throw SchemaError(path + "frequency_ghz", "must be > 0");
        cal.readout_error = require_number(q, "readout_error", path);
        if (cal.readout_error < 0.0 || cal.readout_error >= 0.5) {
            throw SchemaError(path + "readout_error", "must be in [0, 0.5)");
        }
        p.qubits[static_cast<std::size_t>(index)] = cal;
    }
    return p;
}

DeviceProfile load_profile_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open profile file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_profile(buf.str());
}

std::string serialize_profile(const DeviceProfile& profile) {
    nlohmann::ordered_json doc;
    doc["name"] = profile.name;
    doc["idle_duration_us"] = profile.idle_duration_us;
    doc["seed_salt"] = profile.seed_salt;
    if (profile.ideal) doc["ideal"] = true;
    doc["qubits"] = nlohmann::ordered_json::array();
    for (const auto& q : profile.qubits) {
        nlohmann::ordered_json row;
        row["index"] = q.index;
        row["t1_us"] = q.t1_us;
        row["t2_us"] = q.t2_us;
        row["frequency_ghz"] = q.frequency_ghz;
        row["readout_error"] = q.readout_error;
        doc["qubits"].push_back(std::move(row));
    }
    return doc.dump(2) + "\n";
}

const std::vector<DeviceProfile>& builtin_profiles() {
    static const std::vector<DeviceProfile> profiles = make_builtins();
    return profiles;
}

const DeviceProfile* find_builtin(std::string_view name) {
    for (const auto& p : builtin_profiles()) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

DeviceProfile resolve_profile(std::string_view name_or_path, const std::vector<std::filesystem::path>& search_dirs) {
    if (const DeviceProfile* p = find_builtin(name_or_path)) return *p;
    const std::filesystem::path direct(name_or_path);
    std::error_code ec;
    if (std::filesystem::is_regular_file(direct, ec)) return load_profile_file(direct);
    for (const auto& dir : search_dirs) {
        const auto candidate = dir / (std::string(name_or_path) + ".json");
        if (std::filesystem::is_regular_file(candidate, ec)) return load_profile_file(candidate);
    }
    throw ArgumentError("unknown profile '" + std::string(name_or_path) + "'");
}

}  // namespace qpuf::noise
