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

// Device calibration profiles and the noise they induce: an idle channel
// (amplitude damping followed by dephasing) and classical readout flips.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qpuf/qstate.hpp"

namespace qpuf::noise {

inline constexpr int kProfileQubits = 8;
inline constexpr double kDefaultIdleDurationUs = 50.0;
inline constexpr double kDefaultReadoutError = 0.01;

struct QubitCalibration {
    int index = 0;
    double t1_us = 0.0;
    double t2_us = 0.0;
    double frequency_ghz = 0.0;
    double readout_error = 0.0;

    bool operator==(const QubitCalibration&) const = default;
};

struct DeviceProfile {
    std::string name;
    std::vector<QubitCalibration> qubits;  // exactly 8, ordered by index
    double idle_duration_us = kDefaultIdleDurationUs;
    std::uint64_t seed_salt = 0;
    /// True for the noiseless reference profile: idle channels are identity
    /// regardless of the stored T1/T2.
    bool ideal = false;

    const QubitCalibration& qubit(int q) const;
    bool operator==(const DeviceProfile&) const = default;
};

/// Damping and dephasing strengths of one idle period.
struct IdleChannel {
    double gamma = 0.0;
    double lambda = 0.0;
};

/// γ = 1 - exp(-t/T1); λ = 1 - exp(-t/Tφ) with 1/Tφ = max(0, 1/T2 - 1/(2 T1)).
IdleChannel idle_parameters(const QubitCalibration& cal, double duration_us);
IdleChannel idle_parameters(const DeviceProfile& profile, int qubit, double duration_us);

qstate::KrausSet amplitude_damping(double gamma);
/// Phase flip {sqrt(1-λ/2) I, sqrt(λ/2) Z}; off-diagonals scale by 1 - λ.
qstate::KrausSet dephasing(double lambda);

/// Damping then dephasing, composed into one Kraus set. Zero-weight operators
/// are dropped, so a zero duration yields exactly {I}.
qstate::KrausSet idle_channel(const DeviceProfile& profile, int qubit, double duration_us);

/// Flips each measured bit i of every shot with probability readout_error[i].
qstate::ShotCounts apply_readout_error(const qstate::ShotCounts& counts, const DeviceProfile& profile,
                                       std::uint64_t seed);

/// Same readout model as a per-qubit confusion matrix applied to a distribution.
qstate::OutcomeDistribution apply_readout_confusion(const qstate::OutcomeDistribution& dist,
                                                    const DeviceProfile& profile);

/// Parses and validates a profile document. Throws SchemaError naming the field.
DeviceProfile load_profile(std::string_view document);
/// Throws IoError when the file cannot be read.
DeviceProfile load_profile_file(const std::filesystem::path& path);
std::string serialize_profile(const DeviceProfile& profile);

/// ibm_osaka, ibm_kyoto, ibm_sherbrooke calibration snapshots and "ideal".
const std::vector<DeviceProfile>& builtin_profiles();
/// nullptr when no built-in profile has that name.
const DeviceProfile* find_builtin(std::string_view name);

/// Built-in name, then a file path, then `<dir>/<name>.json` for each extra
/// search directory. Throws ArgumentError when nothing matches.
DeviceProfile resolve_profile(std::string_view name_or_path,
                              const std::vector<std::filesystem::path>& search_dirs = {});

}  // namespace qpuf::noise
