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

// QPUF-based device attestation for a SCADA hierarchy. IEDs enroll at an RTU,
// which acts as the quantum gateway; RTUs register at an MTU the same way.
// All parties live in-process and exchange plain values.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qpuf/crp.hpp"

namespace qpuf::attest {

enum class Role { Ied, Rtu, Mtu };

std::string_view role_name(Role r);
/// Throws ArgumentError for an unknown name.
Role parse_role(std::string_view name);

struct DeviceIdentity {
    std::string id;  // opaque bytes, e.g. a MAC address
    Role role = Role::Ied;

    bool operator==(const DeviceIdentity&) const = default;
};

struct EnrollmentRecord {
    DeviceIdentity device;
    std::string gateway_id;  // RTU for IEDs, MTU for RTUs
    crp::ResponseRecord response;
    std::int64_t enrolled_at = 0;

    bool operator==(const EnrollmentRecord&) const = default;
};

struct AuthDecision {
    std::string device_id;
    bool accepted = false;
    int hd = 0;
    int threshold = 0;
    std::string fresh_response;
    std::int64_t decided_at = 0;
};

/// Line format of the CRP store plus `ied_id` (hex), `rtu_id` (hex),
/// `enrolled_at` and the enrollee `role`.
std::string format_enrollment(const EnrollmentRecord& r);
EnrollmentRecord parse_enrollment(std::string_view line, std::size_t line_no);

/// Enrollment database, one active record per (device, gateway). Single
/// writer, concurrent readers.
class AttestationDb {
public:
    AttestationDb() = default;
    static AttestationDb load(const std::filesystem::path& path);
    static AttestationDb create(const std::filesystem::path& path);

    /// Throws ConflictError when (device, gateway) already has a record.
    void insert(const EnrollmentRecord& r);
    std::optional<EnrollmentRecord> find(std::string_view device_id, std::string_view gateway_id) const;
    std::vector<EnrollmentRecord> records_for_gateway(std::string_view gateway_id) const;
    std::vector<EnrollmentRecord> all() const;
    std::size_t size() const;

    /// Rewrites the stored response bits in memory. Models an attacker with
    /// write access to the database; the protocol itself never calls it.
    void overwrite_response(std::string_view device_id, std::string_view gateway_id, std::string bits);

private:
    using Key = std::pair<std::string, std::string>;
    std::optional<std::filesystem::path> path_;
    std::map<Key, EnrollmentRecord> records_;
    std::vector<Key> order_;
    std::unique_ptr<std::shared_mutex> mutex_ = std::make_unique<std::shared_mutex>();
};

/// Margin every per-qubit p1 of the enrollment job must clear: 4σ of a fair
/// binomial frequency at `shots`.
double default_enroll_margin(int shots);

/// Runs one gateway's side of the protocol against a database.
class Gateway {
public:
    /// `self.role` must be Rtu (enrolls IEDs) or Mtu (registers RTUs).
    Gateway(DeviceIdentity self, AttestationDb& db);

    const DeviceIdentity& identity() const noexcept { return self_; }

    /// Draws a challenge, runs it on `profile`, stores the CRP. Challenges
    /// whose enrollment p1 sits within the margin of 0.5 are redrawn.
    /// Throws ArgumentError for a device of the wrong role and ConflictError
    /// on re-enrollment.
    EnrollmentRecord enroll(const DeviceIdentity& device, const noise::DeviceProfile& profile, int shots,
                            std::uint64_t seed, std::int64_t now);

    /// Re-runs the stored challenge on `profile` and accepts iff the Hamming
    /// distance to the stored response is <= threshold. Throws
    /// NotEnrolledError for unknown devices.
    AuthDecision authenticate(const DeviceIdentity& device, const noise::DeviceProfile& profile, int threshold,
                              int shots, std::uint64_t seed, std::int64_t now);

    std::vector<AuthDecision> decisions() const;

private:
    Role expected_role() const { return self_.role == Role::Rtu ? Role::Ied : Role::Rtu; }

    DeviceIdentity self_;
    AttestationDb* db_;
    std::vector<AuthDecision> decisions_;
    mutable std::mutex decisions_mutex_;
};

/// RTU acting as quantum gateway for its IEDs; its own quantum device is fixed.
class Rtu {
public:
    Rtu(DeviceIdentity self, noise::DeviceProfile profile, AttestationDb& db);

    const DeviceIdentity& identity() const noexcept { return gateway_.identity(); }
    const noise::DeviceProfile& profile() const noexcept { return profile_; }

    EnrollmentRecord enroll(const DeviceIdentity& ied, int shots, std::uint64_t seed, std::int64_t now);
    AuthDecision authenticate(const DeviceIdentity& ied, int threshold, int shots, std::uint64_t seed,
                              std::int64_t now);
    /// Runs the stored challenge on another device (spoofing scenario).
    AuthDecision authenticate_on(const DeviceIdentity& ied, const noise::DeviceProfile& device, int threshold,
                                 int shots, std::uint64_t seed, std::int64_t now);
    std::vector<AuthDecision> decisions() const { return gateway_.decisions(); }

private:
    noise::DeviceProfile profile_;
    Gateway gateway_;
};

/// MTU keeping the QPUF signatures of its RTUs. Each RTU is fingerprinted on
/// the RTU's own quantum device.
class Mtu {
public:
    Mtu(DeviceIdentity self, AttestationDb& db);

    const DeviceIdentity& identity() const noexcept { return gateway_.identity(); }

    EnrollmentRecord register_rtu(const DeviceIdentity& rtu, const noise::DeviceProfile& rtu_profile, int shots,
                                  std::uint64_t seed, std::int64_t now);
    AuthDecision authenticate_rtu(const DeviceIdentity& rtu, const noise::DeviceProfile& rtu_profile, int threshold,
                                  int shots, std::uint64_t seed, std::int64_t now);
    std::vector<EnrollmentRecord> registered() const;

private:
    AttestationDb* db_;
    Gateway gateway_;
};

using Digest = std::array<std::uint8_t, 32>;

struct IntegrityTag {
    Digest digest{};
    std::int64_t ts = 0;

    bool operator==(const IntegrityTag&) const = default;
};

/// SHA-256 over length-prefixed data, response bits and big-endian ts.
IntegrityTag integrity_tag(std::string_view data, std::string_view response_bits, std::int64_t ts);
/// Recomputes the digest and compares in constant time.
bool verify_tag(std::string_view data, std::string_view response_bits, const IntegrityTag& tag);

std::string to_hex(std::string_view bytes);
/// Throws ArgumentError on odd length or non-hex characters.
std::string from_hex(std::string_view hex);

}  // namespace qpuf::attest
