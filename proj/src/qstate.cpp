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

#include "qpuf/qstate.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <numbers>

#include "qpuf/errors.hpp"
#include "qpuf/seed.hpp"

namespace qpuf::qstate {

namespace {

void check_qubit(int q, int n, const char* what) {
    if (q < 0 || q >= n) {
        throw ArgumentError(std::string(what) + " qubit " + std::to_string(q) +
                            " out of range for " + std::to_string(n) + " qubits");
    }
}

// Replaces every 2x2 block of ρ that couples basis states differing only in
// `target` with Σ_k K_k B K_k†, in place. The map is folded into one 4x4
// superoperator S[(i,j),(a,b)] = Σ_k K_ia conj(K_jb) so the cost does not
// grow with the number of operators.
void conjugate_blocks(Eigen::MatrixXcd& rho, const std::vector<Gate1>& ops, int target) {
    std::array<Complex, 16> sup{};
    for (const auto& k : ops) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) sup[(2 * i + j) * 4 + 2 * a + b] += k(i, a) * std::conj(k(j, b));
    }

    const std::size_t dim = static_cast<std::size_t>(rho.rows());
    const std::size_t bit = std::size_t{1} << target;
    Complex* m = rho.data();  // column-major: (r, c) at m[c * dim + r]
    for (std::size_t c0 = 0; c0 < dim; ++c0) {
        if (c0 & bit) continue;
        Complex* col0 = m + c0 * dim;
        Complex* col1 = m + (c0 | bit) * dim;
        for (std::size_t r0 = 0; r0 < dim; ++r0) {
            if (r0 & bit) continue;
            const std::size_t r1 = r0 | bit;
            const Complex v[4] = {col0[r0], col1[r0], col0[r1], col1[r1]};
            Complex w[4];
            for (int o = 0; o < 4; ++o) {
                const Complex* row = &sup[static_cast<std::size_t>(o) * 4];
                double re = 0.0, im = 0.0;
                for (int t = 0; t < 4; ++t) {
                    // Plain products; std::complex operator* adds NaN/Inf recovery we do not need here.
                    re += row[t].real() * v[t].real() - row[t].imag() * v[t].imag();
                    im += row[t].real() * v[t].imag() + row[t].imag() * v[t].real();
                }
                w[o] = {re, im};
            }
            col0[r0] = w[0];
            col1[r0] = w[1];
            col0[r1] = w[2];
            col1[r1] = w[3];
        }
    }
}

#ifndef NDEBUG
bool debug_invariants_hold(const DensityMatrix& rho) {
    // Eigen-decomposition is too slow to run on every op for large registers.
    if (rho.n_qubits() <= 6) return !rho.invariant_violation(1e-8).has_value();
    return std::abs(rho.trace() - Complex{1.0, 0.0}) <= 1e-8 && rho.hermiticity_defect() <= 1e-8;
}
#endif

}  // namespace

Gate1 gate_i() { return Gate1::Identity(); }

Gate1 gate_x() {
    Gate1 g;
    g << 0, 1, 1, 0;
    return g;
}

Gate1 gate_h() {
    const double s = 1.0 / std::numbers::sqrt2;
    Gate1 g;
    g << s, s, s, -s;
    return g;
}

Gate1 gate_ry(double theta) {
    const double c = std::cos(theta / 2);
    const double s = std::sin(theta / 2);
    Gate1 g;
    g << c, -s, s, c;
    return g;
}

Gate2 gate_cnot() {
    Gate2 g = Gate2::Zero();
    g(0, 0) = 1;
    g(1, 1) = 1;
    g(2, 3) = 1;
    g(3, 2) = 1;
    return g;
}

bool is_unitary(const Eigen::MatrixXcd& g, double tol) {
    if (g.rows() != g.cols()) return false;
    const Eigen::MatrixXcd defect = g.adjoint() * g - Eigen::MatrixXcd::Identity(g.rows(), g.cols());
    return defect.cwiseAbs().maxCoeff() <= tol;
}

double KrausSet::completeness_defect() const {
    Gate1 sum = Gate1::Zero();
    for (const auto& k : operators) sum += k.adjoint() * k;
    return (sum - Gate1::Identity()).cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(int n_qubits, Eigen::MatrixXcd data) : n_qubits_(n_qubits), data_(std::move(data)) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw CapacityError("density matrix supports 1.." + std::to_string(kMaxQubits) + " qubits, got " +
                            std::to_string(n_qubits));
    }
    const auto d = static_cast<Eigen::Index>(dim());
    if (data_.rows() != d || data_.cols() != d) {
        throw CapacityError("matrix shape does not match " + std::to_string(n_qubits) + " qubits");
    }
}

double DensityMatrix::purity() const { return (data_ * data_).trace().real(); }

double DensityMatrix::hermiticity_defect() const { return (data_ - data_.adjoint()).cwiseAbs().maxCoeff(); }

double DensityMatrix::min_eigenvalue() const {
    // Symmetrize first; the solver reads only one triangle.
    const Eigen::MatrixXcd h = (data_ + data_.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

std::optional<std::string> DensityMatrix::invariant_violation(double tol) const {
    for (Eigen::Index i = 0; i < data_.size(); ++i) {
        const Complex z = data_.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return "non-finite entry";
    }
    const Complex tr = trace();
    if (std::abs(tr - Complex{1.0, 0.0}) > tol) {
        return "trace " + std::to_string(tr.real()) + "+" + std::to_string(tr.imag()) + "i != 1";
    }
    if (const double h = hermiticity_defect(); h > tol) return "not Hermitian, defect " + std::to_string(h);
    if (const double e = min_eigenvalue(); e < -tol) return "negative eigenvalue " + std::to_string(e);
    return std::nullopt;
}

DensityMatrix init_density(int n_qubits, std::string_view bits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw CapacityError("init_density supports 1.." + std::to_string(kMaxQubits) + " qubits, got " +
                            std::to_string(n_qubits));
    }
    if (bits.size() != static_cast<std::size_t>(n_qubits)) {
        throw ArgumentError("bitstring length " + std::to_string(bits.size()) + " != " + std::to_string(n_qubits));
    }
    const std::uint32_t index = from_bitstring(bits);
    const auto dim = Eigen::Index{1} << n_qubits;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    m(index, index) = 1.0;
    return DensityMatrix(n_qubits, std::move(m));
}

DensityMatrix apply_1q(DensityMatrix rho, const Gate1& g, int target) {
    check_qubit(target, rho.n_qubits_, "target");
    if (!is_unitary(g)) throw ArgumentError("apply_1q requires a unitary gate");
    conjugate_blocks(rho.data_, {g}, target);
    assert(debug_invariants_hold(rho));
    return rho;
}

DensityMatrix apply_cnot(DensityMatrix rho, int control, int target) {
    check_qubit(control, rho.n_qubits_, "control");
    check_qubit(target, rho.n_qubits_, "target");
    if (control == target) throw ArgumentError("CNOT control and target must differ");
    const Eigen::Index cbit = Eigen::Index{1} << control;
    const Eigen::Index tbit = Eigen::Index{1} << target;
    const auto perm = [&](Eigen::Index i) { return (i & cbit) ? (i ^ tbit) : i; };
    // The permutation is an involution, so swapping rows then columns is enough.
    const Eigen::Index dim = rho.data_.rows();
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (perm(i) > i) rho.data_.row(i).swap(rho.data_.row(perm(i)));
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (perm(i) > i) rho.data_.col(i).swap(rho.data_.col(perm(i)));
    }
    assert(debug_invariants_hold(rho));
    return rho;
}

DensityMatrix apply_channel(DensityMatrix rho, const KrausSet& ks, int target) {
    check_qubit(target, rho.n_qubits_, "target");
    if (ks.operators.empty() || !ks.is_complete()) {
        throw ValidationError("Kraus set is not complete (defect " +
                              std::to_string(ks.operators.empty() ? 1.0 : ks.completeness_defect()) + ")");
    }
    conjugate_blocks(rho.data_, ks.operators, target);
    assert(debug_invariants_hold(rho));
    return rho;
}

double OutcomeDistribution::marginal_one(int q) const {
    check_qubit(q, n_qubits, "marginal");
    double p = 0.0;
    for (std::size_t b = 0; b < probs.size(); ++b) {
        if (b >> q & 1U) p += probs[b];
    }
    return p;
}

OutcomeDistribution measure_distribution(const DensityMatrix& rho) {
    OutcomeDistribution dist{rho.n_qubits(), std::vector<double>(rho.dim())};
    for (std::size_t b = 0; b < rho.dim(); ++b) {
        dist.probs[b] = std::clamp(rho(b, b).real(), 0.0, 1.0);
    }
    return dist;
}

double total_variation(const OutcomeDistribution& a, const OutcomeDistribution& b) {
    if (a.probs.size() != b.probs.size()) throw ArgumentError("distributions differ in size");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.probs.size(); ++i) sum += std::abs(a.probs[i] - b.probs[i]);
    return sum / 2.0;
}

void ShotCounts::recount() {
    per_qubit_ones.assign(static_cast<std::size_t>(n_qubits), 0);
    for (const auto& [index, n] : counts) {
        for (int q = 0; q < n_qubits; ++q) {
            if (index >> q & 1U) per_qubit_ones[static_cast<std::size_t>(q)] += n;
        }
    }
}

ShotCounts sample_shots(const OutcomeDistribution& dist, int shots, std::uint64_t seed) {
    if (shots < 1) throw ArgumentError("shots must be >= 1, got " + std::to_string(shots));
    if (dist.probs.empty()) throw ArgumentError("empty distribution");

    std::vector<double> cdf(dist.probs.size());
    double running = 0.0;
    for (std::size_t i = 0; i < cdf.size(); ++i) {
        running += dist.probs[i];
        cdf[i] = running;
    }
    const double total = running;

    Rng rng(seed);
    ShotCounts out;
    out.n_qubits = dist.n_qubits;
    out.shots = shots;
    for (int s = 0; s < shots; ++s) {
        const double u = rng.uniform() * total;
        auto index = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        if (index == cdf.size()) {
            // u rounded up to the total; take the last outcome with mass.
            index = cdf.size() - 1;
            while (index > 0 && dist.probs[index] <= 0.0) --index;
        }
        ++out.counts[static_cast<std::uint32_t>(index)];
    }
    out.recount();
    return out;
}

std::string to_bitstring(std::uint32_t index, int n_qubits) {
    std::string s(static_cast<std::size_t>(n_qubits), '0');
    for (int q = 0; q < n_qubits; ++q) {
        if (index >> q & 1U) s[static_cast<std::size_t>(q)] = '1';
    }
    return s;
}

std::uint32_t from_bitstring(std::string_view bits) {
    if (bits.size() > 32) throw ArgumentError("bitstring longer than 32 characters");
    std::uint32_t index = 0;
    for (std::size_t q = 0; q < bits.size(); ++q) {
        if (bits[q] == '1') {
            index |= std::uint32_t{1} << q;
        } else if (bits[q] != '0') {
            throw ArgumentError("bitstring '" + std::string(bits) + "' contains characters other than 0/1");
        }
    }
    return index;
}

}  // namespace qpuf::qstate
