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

// Exact density-matrix engine for small registers.
//
// Basis index bit i is qubit i (qubit 0 is the least significant bit). Every
// bitstring exchanged with the outside world lists qubit 0 first, so the
// string "10" on two qubits is basis index 1.

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qpuf::qstate {

using Complex = std::complex<double>;
using Gate1 = Eigen::Matrix2cd;
using Gate2 = Eigen::Matrix4cd;

inline constexpr double kTolerance = 1e-9;
inline constexpr int kMaxQubits = 10;

Gate1 gate_i();
Gate1 gate_x();
Gate1 gate_h();
/// Real rotation [[cos θ/2, -sin θ/2], [sin θ/2, cos θ/2]].
Gate1 gate_ry(double theta);
/// CNOT on the two-qubit basis |control, target> with index 2*control + target.
Gate2 gate_cnot();

bool is_unitary(const Eigen::MatrixXcd& g, double tol = kTolerance);

/// Operators of a single-qubit channel. Completeness is checked where the
/// channel is applied, not on construction.
struct KrausSet {
    std::vector<Gate1> operators;

    static KrausSet identity() { return KrausSet{{Gate1::Identity()}}; }

    /// max |Σ K†K - I| elementwise.
    double completeness_defect() const;
    bool is_complete(double tol = kTolerance) const { return completeness_defect() <= tol; }
};

class DensityMatrix {
public:
    /// Wraps an existing matrix. Throws CapacityError on size mismatch.
    DensityMatrix(int n_qubits, Eigen::MatrixXcd data);

    int n_qubits() const noexcept { return n_qubits_; }
    std::size_t dim() const noexcept { return std::size_t{1} << n_qubits_; }
    const Eigen::MatrixXcd& data() const noexcept { return data_; }
    Complex operator()(std::size_t row, std::size_t col) const { return data_(row, col); }

    Complex trace() const { return data_.trace(); }
    double purity() const;
    double hermiticity_defect() const;
    double min_eigenvalue() const;

    /// Empty when trace, Hermiticity and PSD all hold within `tol`; otherwise a
    /// description of the first violated invariant.
    std::optional<std::string> invariant_violation(double tol = kTolerance) const;

private:
    friend DensityMatrix apply_1q(DensityMatrix, const Gate1&, int);
    friend DensityMatrix apply_cnot(DensityMatrix, int, int);
    friend DensityMatrix apply_channel(DensityMatrix, const KrausSet&, int);

    int n_qubits_;
    Eigen::MatrixXcd data_;
};

/// |bits><bits|, bits[i] is qubit i. Throws CapacityError for n outside [1, 10]
/// and ArgumentError when bits is not an n-character 0/1 string.
DensityMatrix init_density(int n_qubits, std::string_view bits);

/// U ρ U† with U acting on `target`. Throws ArgumentError on a bad index or a
/// non-unitary gate.
DensityMatrix apply_1q(DensityMatrix rho, const Gate1& g, int target);

/// Throws ArgumentError when control == target or either is out of range.
DensityMatrix apply_cnot(DensityMatrix rho, int control, int target);

/// Σ_k K ρ K†. Throws ValidationError for an incomplete set.
DensityMatrix apply_channel(DensityMatrix rho, const KrausSet& ks, int target);

struct OutcomeDistribution {
    int n_qubits = 0;
    std::vector<double> probs;

    /// P(qubit q reads 1).
    double marginal_one(int q) const;
};

/// Diagonal of ρ, clamped into [0, 1].
OutcomeDistribution measure_distribution(const DensityMatrix& rho);

/// Sum over b of |p(b) - q(b)| / 2. Distributions must have equal size.
double total_variation(const OutcomeDistribution& a, const OutcomeDistribution& b);

struct ShotCounts {
    int n_qubits = 0;
    int shots = 0;
    std::map<std::uint32_t, int> counts;  // basis index -> occurrences
    std::vector<int> per_qubit_ones;

    /// Rebuilds per_qubit_ones from counts.
    void recount();
    bool operator==(const ShotCounts&) const = default;
};

/// Multinomial draw of `shots` outcomes. Throws ArgumentError when shots < 1.
ShotCounts sample_shots(const OutcomeDistribution& dist, int shots, std::uint64_t seed);

std::string to_bitstring(std::uint32_t index, int n_qubits);
/// Inverse of to_bitstring. Throws ArgumentError on characters other than 0/1.
std::uint32_t from_bitstring(std::string_view bits);

}  // namespace qpuf::qstate
