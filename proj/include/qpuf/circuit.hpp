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

// The 8-qubit QPUF circuit: challenge model, circuit builder, noisy execution
// and an independent per-block oracle for the pre-sampling distribution.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "qpuf/noise.hpp"
#include "qpuf/qstate.hpp"

namespace qpuf::circuit {

inline constexpr int kQubits = 8;
inline constexpr int kBlocks = 4;  // (control k, target k + 4)

/// Wraps θ into [0, 2π). Throws ArgumentError on NaN/Inf.
double normalize_angle(double theta);

class Challenge {
public:
    /// `init_bits` is 8 chars of 0/1, char i is qubit i. θ is normalized.
    Challenge(std::string_view init_bits, double theta);

    const std::string& init_bits() const noexcept { return init_bits_; }
    bool bit(int qubit) const { return init_bits_.at(static_cast<std::size_t>(qubit)) == '1'; }
    double theta() const noexcept { return theta_; }

    /// Bitwise equality, θ included.
    bool operator==(const Challenge&) const = default;

private:
    std::string init_bits_;
    double theta_;
};

/// Uniform init bits and uniform θ in [0, 2π), deterministic per seed.
Challenge random_challenge(std::uint64_t seed);

/// "<init_bits> <theta>" with θ at 17 significant digits.
std::string format_challenge(const Challenge& c);
/// Throws ArgumentError on malformed text.
Challenge parse_challenge(std::string_view line);
/// One challenge per line; blank lines and '#' comments are skipped. Throws
/// ParseError with the offending line number.
std::vector<Challenge> read_challenges(std::istream& in);
void write_challenges(std::ostream& out, const std::vector<Challenge>& challenges);

enum class OpKind { X, Ry, H, Cnot, Idle, Measure };

struct Op {
    OpKind kind;
    std::array<int, 2> qubits{0, 0};  // second entry only used by Cnot (target)
    double param = 0.0;               // Ry angle

    bool operator==(const Op&) const = default;
};

struct Circuit {
    int n_qubits = kQubits;
    std::vector<Op> ops;
};

/// X on qubits whose init bit is 1, Ry(θ) on all, H on all, CNOT k -> k+4,
/// idle on 0-3, measure all.
Circuit build_qpuf_circuit(const Challenge& c);

/// Throws ValidationError unless `circuit` has exactly the QPUF op order.
/// Returns the challenge it encodes.
Challenge validate_qpuf_circuit(const Circuit& circuit);

/// Runs any circuit on the density-matrix engine. Idle ops use the profile's
/// idle duration. Readout error is not applied.
qstate::OutcomeDistribution simulate_distribution(const Circuit& circuit, const noise::DeviceProfile& profile);

/// simulate_distribution followed by the readout confusion matrix: the
/// distribution a job samples from, in closed form.
qstate::OutcomeDistribution engine_distribution(const Circuit& circuit, const noise::DeviceProfile& profile);

struct JobResult {
    Challenge challenge;
    std::string profile_name;
    int shots = 0;
    qstate::ShotCounts counts;
    std::array<double, kQubits> p1{};
    std::uint64_t seed = 0;

    bool operator==(const JobResult&) const = default;
};

/// Validates, simulates, samples and applies readout flips. Bit-identical for
/// identical (circuit, profile, shots, seed).
JobResult execute_job(const Circuit& circuit, const noise::DeviceProfile& profile, int shots, std::uint64_t seed);

/// Computes each (control, target) block as its own 4x4 density matrix and
/// multiplies the four block distributions. Valid because no gate couples
/// different blocks.
qstate::OutcomeDistribution block_oracle(const Challenge& c, const noise::DeviceProfile& profile);

/// Distribution over {00, 01, 10, 11} of one block, index = 2*control + target.
std::array<double, 4> block_distribution(const Challenge& c, const noise::DeviceProfile& profile, int block);

}  // namespace qpuf::circuit
