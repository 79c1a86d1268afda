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

#include "qpuf/attestation.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>
#include <openssl/crypto.h>
#include <openssl/evp.h>

#include "qpuf/errors.hpp"
#include "qpuf/metrics.hpp"
#include "qpuf/records.hpp"
#include "qpuf/seed.hpp"

namespace qpuf::attest {

namespace {

constexpr int kMaxEnrollDraws = 64;
constexpr std::uint64_t kAuthStream = 0x61757468ULL;  // "auth"
constexpr std::uint64_t kJobStream = 0x6a6f62ULL;     // "job"

void append_u64_be(std::string& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xffU));
}

void append_field(std::string& out, std::string_view bytes) {
    append_u64_be(out, bytes.size());
    out.append(bytes);
}

Digest sha256(std::string_view message) {
    Digest d{};
    unsigned int len = 0;
    if (EVP_Digest(message.data(), message.size(), d.data(), &len, EVP_sha256(), nullptr) != 1 || len != d.size()) {
        throw Error("SHA-256 computation failed");
    }
    return d;
}

double min_margin(const circuit::JobResult& job) {
    double m = 1.0;
    for (double p : job.p1) m = std::min(m, std::abs(p - 0.5));
    return m;
}

}  // namespace

std::string_view role_name(Role r) {
    switch (r) {
        case Role::Ied: return "ied";
        case Role::Rtu: return "rtu";
        case Role::Mtu: return "mtu";
    }
    return "?";
}

Role parse_role(std::string_view name) {
    if (name == "ied") return Role::Ied;
    if (name == "rtu") return Role::Rtu;
    if (name == "mtu") return Role::Mtu;
    throw ArgumentError("unknown role '" + std::string(name) + "'");
}

std::string to_hex(std::string_view bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xf]);
    }
    return out;
}

std::string from_hex(std::string_view hex) {
    if (hex.size() % 2) throw ArgumentError("hex string has odd length");
    const auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw ArgumentError(std::string("bad hex digit '") + c + "'");
    };
    std::string out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        out.push_back(static_cast<char>(nibble(hex[i]) << 4 | nibble(hex[i + 1])));
    }
    return out;
}

std::string format_enrollment(const EnrollmentRecord& r) {
    const auto& c = r.response;
    return records::LineWriter{}
        .field("profile", c.profile_name)
        .field("instance", c.instance_id)
        .field("init_bits", c.challenge.init_bits())
        .field("theta", c.challenge.theta())
        .field("bits", c.bits)
        .field("p1", std::span<const double>(c.p1))
        .field("shots", c.shots)
        .field("seed", c.seed)
        .field("ied_id", to_hex(r.device.id))
        .field("rtu_id", to_hex(r.gateway_id))
        .field("enrolled_at", r.enrolled_at)
        .field("role", role_name(r.device.role))
        .str();
}

EnrollmentRecord parse_enrollment(std::string_view line, std::size_t line_no) {
    EnrollmentRecord r{{}, {}, crp::parse_record(line, line_no), 0};
    try {
        const auto doc = nlohmann::json::parse(line);
        r.device.id = from_hex(doc.at("ied_id").get<std::string>());
        r.gateway_id = from_hex(doc.at("rtu_id").get<std::string>());
        r.enrolled_at = doc.at("enrolled_at").get<std::int64_t>();
        r.device.role = parse_role(doc.at("role").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, std::string("bad enrollment field: ") + e.what());
    } catch (const ArgumentError& e) {
        throw ParseError(line_no, e.what());
    }
    return r;
}

AttestationDb AttestationDb::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open attestation DB " + path.string());
    AttestationDb db;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        EnrollmentRecord r = parse_enrollment(line, line_no);
        Key key{r.device.id, r.gateway_id};
        if (db.records_.contains(key)) throw ConflictError("line " + std::to_string(line_no) + ": duplicate enrollment");
        db.order_.push_back(key);
        db.records_.emplace(std::move(key), std::move(r));
    }
    db.path_ = path;
    return db;
}

AttestationDb AttestationDb::create(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create attestation DB " + path.string());
    AttestationDb db;
    db.path_ = path;
    return db;
}

void AttestationDb::insert(const EnrollmentRecord& r) {
    std::unique_lock lock(*mutex_);
    Key key{r.device.id, r.gateway_id};
    if (records_.contains(key)) {
        throw ConflictError("device '" + r.device.id + "' is already enrolled at '" + r.gateway_id + "'");
    }
    if (path_) {
        std::ofstream out(*path_, std::ios::binary | std::ios::app);
        out << format_enrollment(r) << '\n';
        out.flush();
        if (!out) throw IoError("write to attestation DB " + path_->string() + " failed");
    }
    order_.push_back(key);
    records_.emplace(std::move(key), r);
}

std::optional<EnrollmentRecord> AttestationDb::find(std::string_view device_id, std::string_view gateway_id) const {
    std::shared_lock lock(*mutex_);
    const auto it = records_.find(Key{std::string(device_id), std::string(gateway_id)});
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

std::vector<EnrollmentRecord> AttestationDb::records_for_gateway(std::string_view gateway_id) const {
    std::shared_lock lock(*mutex_);
    std::vector<EnrollmentRecord> out;
    for (const auto& key : order_) {
        if (key.second == gateway_id) out.push_back(records_.at(key));
    }
    return out;
}

std::vector<EnrollmentRecord> AttestationDb::all() const {
    std::shared_lock lock(*mutex_);
    std::vector<EnrollmentRecord> out;
    out.reserve(order_.size());
    for (const auto& key : order_) out.push_back(records_.at(key));
    return out;
}

std::size_t AttestationDb::size() const {
    std::shared_lock lock(*mutex_);
    return records_.size();
}

void AttestationDb::overwrite_response(std::string_view device_id, std::string_view gateway_id, std::string bits) {
    std::unique_lock lock(*mutex_);
    const auto it = records_.find(Key{std::string(device_id), std::string(gateway_id)});
    if (it == records_.end()) throw NotEnrolledError("no record for '" + std::string(device_id) + "'");
    it->second.response.bits = std::move(bits);
}

double default_enroll_margin(int shots) { return 4.0 * std::sqrt(0.25 / shots); }

Gateway::Gateway(DeviceIdentity self, AttestationDb& db) : self_(std::move(self)), db_(&db) {
    if (self_.role == Role::Ied) throw ArgumentError("an IED cannot act as an attestation gateway");
}

EnrollmentRecord Gateway::enroll(const DeviceIdentity& device, const noise::DeviceProfile& profile, int shots,
                                 std::uint64_t seed, std::int64_t now) {
    if (device.role != expected_role()) {
        throw ArgumentError(std::string(role_name(self_.role)) + " enrolls " +
                            std::string(role_name(expected_role())) + " devices, got a " +
                            std::string(role_name(device.role)));
    }
    if (db_->find(device.id, self_.id)) {
        throw ConflictError("device '" + device.id + "' is already enrolled at '" + self_.id + "'");
    }
    if (shots < 1) throw ArgumentError("shots must be >= 1");

    const std::uint64_t stream = derive_seed(seed, hash_bytes(device.id), hash_bytes(self_.id));
    const double margin = default_enroll_margin(shots);
    std::optional<circuit::JobResult> best;
    for (int draw = 0; draw < kMaxEnrollDraws; ++draw) {
        const std::uint64_t draw_seed = derive_seed(stream, static_cast<std::uint64_t>(draw));
        const circuit::Challenge challenge = circuit::random_challenge(draw_seed);
        circuit::JobResult job = circuit::execute_job(circuit::build_qpuf_circuit(challenge), profile, shots,
                                                      derive_seed(draw_seed, kJobStream));
        const bool stable = min_margin(job) >= margin;
        if (!best || min_margin(job) > min_margin(*best)) best = std::move(job);
        if (stable) break;
    }

    EnrollmentRecord record{device, self_.id, crp::derive_response(*best), now};
    db_->insert(record);
    return record;
}

AuthDecision Gateway::authenticate(const DeviceIdentity& device, const noise::DeviceProfile& profile, int threshold,
                                   int shots, std::uint64_t seed, std::int64_t now) {
    if (threshold < 0 || threshold > circuit::kQubits) throw ArgumentError("threshold must be in 0..8");
    const auto stored = db_->find(device.id, self_.id);
    if (!stored) throw NotEnrolledError("device '" + device.id + "' is not enrolled at '" + self_.id + "'");

    const std::uint64_t job_seed =
        derive_seed(seed, hash_bytes(device.id), hash_bytes(self_.id), kAuthStream, static_cast<std::uint64_t>(now));
    const circuit::JobResult job =
        circuit::execute_job(circuit::build_qpuf_circuit(stored->response.challenge), profile, shots, job_seed);
    const std::string fresh = crp::majority_bits(job.p1);
    const int hd = metrics::hamming(fresh, stored->response.bits).distance;

    AuthDecision decision{device.id, hd <= threshold, hd, threshold, fresh, now};
    std::lock_guard lock(decisions_mutex_);
    decisions_.push_back(decision);
    return decision;
}

std::vector<AuthDecision> Gateway::decisions() const {
    std::lock_guard lock(decisions_mutex_);
    return decisions_;
}

Rtu::Rtu(DeviceIdentity self, noise::DeviceProfile profile, AttestationDb& db)
    : profile_(std::move(profile)), gateway_(std::move(self), db) {
    if (gateway_.identity().role != Role::Rtu) throw ArgumentError("Rtu needs an identity with role rtu");
}

EnrollmentRecord Rtu::enroll(const DeviceIdentity& ied, int shots, std::uint64_t seed, std::int64_t now) {
    return gateway_.enroll(ied, profile_, shots, seed, now);
}

AuthDecision Rtu::authenticate(const DeviceIdentity& ied, int threshold, int shots, std::uint64_t seed,
                               std::int64_t now) {
    return gateway_.authenticate(ied, profile_, threshold, shots, seed, now);
}

AuthDecision Rtu::authenticate_on(const DeviceIdentity& ied, const noise::DeviceProfile& device, int threshold,
                                  int shots, std::uint64_t seed, std::int64_t now) {
    return gateway_.authenticate(ied, device, threshold, shots, seed, now);
}

Mtu::Mtu(DeviceIdentity self, AttestationDb& db) : db_(&db), gateway_(std::move(self), db) {
    if (gateway_.identity().role != Role::Mtu) throw ArgumentError("Mtu needs an identity with role mtu");
}

EnrollmentRecord Mtu::register_rtu(const DeviceIdentity& rtu, const noise::DeviceProfile& rtu_profile, int shots,
                                   std::uint64_t seed, std::int64_t now) {
    return gateway_.enroll(rtu, rtu_profile, shots, seed, now);
}

AuthDecision Mtu::authenticate_rtu(const DeviceIdentity& rtu, const noise::DeviceProfile& rtu_profile,
                                   int threshold, int shots, std::uint64_t seed, std::int64_t now) {
    return gateway_.authenticate(rtu, rtu_profile, threshold, shots, seed, now);
}

std::vector<EnrollmentRecord> Mtu::registered() const { return db_->records_for_gateway(gateway_.identity().id); }

IntegrityTag integrity_tag(std::string_view data, std::string_view response_bits, std::int64_t ts) {
    std::string message;
    message.reserve(data.size() + response_bits.size() + 32);
    append_field(message, data);
    append_field(message, response_bits);
    std::string ts_bytes;
    append_u64_be(ts_bytes, static_cast<std::uint64_t>(ts));
    append_field(message, ts_bytes);
    return IntegrityTag{sha256(message), ts};
}

bool verify_tag(std::string_view data, std::string_view response_bits, const IntegrityTag& tag) {
    const IntegrityTag expected = integrity_tag(data, response_bits, tag.ts);
    return CRYPTO_memcmp(expected.digest.data(), tag.digest.data(), tag.digest.size()) == 0;
}

}  // namespace qpuf::attest
