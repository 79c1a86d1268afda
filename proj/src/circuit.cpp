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

#include "qpuf/circuit.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "qpuf/errors.hpp"
#include "qpuf/seed.hpp"

namespace qpuf::circuit {

using qstate::DensityMatrix;
using qstate::OutcomeDistribution;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string op_name(OpKind k) {
    switch (k) {
        case OpKind::X: return "x";
        case OpKind::Ry: return "ry";
        case OpKind::H: return "h";
        case OpKind::Cnot: return "cnot";
        case OpKind::Idle: return "idle";
        case OpKind::Measure: return "measure";
    }
    return "?";
}

[[noreturn]] void bad_circuit(std::size_t at, const std::string& why) {
    throw ValidationError("not a QPUF circuit at op " + std::to_string(at) + ": " + why);
}

}  // namespace

double normalize_angle(double theta) {
    if (!std::isfinite(theta)) throw ArgumentError("challenge angle must be finite");
    double r = std::fmod(theta, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    // fmod of a tiny negative value can land exactly on 2π after the shift.
    if (r >= kTwoPi) r = 0.0;
    return r;
}

Challenge::Challenge(std::string_view init_bits, double theta)
    : init_bits_(init_bits), theta_(normalize_angle(theta)) {
    if (init_bits_.size() != kQubits) {
        throw ArgumentError("init_bits must have 8 characters, got '" + init_bits_ + "'");
    }
    for (char ch : init_bits_) {
        if (ch != '0' && ch != '1') throw ArgumentError("init_bits must be 0/1, got '" + init_bits_ + "'");
    }
}

Challenge random_challenge(std::uint64_t seed) {
    Rng rng(seed);
    const std::uint64_t mask = rng.next_u64();
    std::string bits(kQubits, '0');
    for (int q = 0; q < kQubits; ++q) {
        if (mask >> q & 1U) bits[static_cast<std::size_t>(q)] = '1';
    }
    return Challenge(bits, rng.uniform() * kTwoPi);
}

std::string format_challenge(const Challenge& c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s %.17g", c.init_bits().c_str(), c.theta());
    return buf;
}

Challenge parse_challenge(std::string_view line) {
    std::istringstream in{std::string(line)};
    std::string bits, theta_text, extra;
    if (!(in >> bits >> theta_text) || (in >> extra)) {
        throw ArgumentError("expected '<init_bits> <theta>', got '" + std::string(line) + "'");
    }
    std::size_t used = 0;
    double theta = 0.0;
    try {
        theta = std::stod(theta_text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != theta_text.size()) throw ArgumentError("bad theta '" + theta_text + "'");
    return Challenge(bits, theta);
}

std::vector<Challenge> read_challenges(std::istream& in) {
    std::vector<Challenge> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            out.push_back(parse_challenge(line));
        } catch (const ArgumentError& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return out;
}

void write_challenges(std::ostream& out, const std::vector<Challenge>& challenges) {
    for (const auto& c : challenges) out << format_challenge(c) << '\n';
}

Circuit build_qpuf_circuit(const Challenge& c) {
    Circuit circuit;
    for (int q = 0; q < kQubits; ++q) {
        if (c.bit(q)) circuit.ops.push_back({OpKind::X, {q, 0}});
    }
    for (int q = 0; q < kQubits; ++q) circuit.ops.push_back({OpKind::Ry, {q, 0}, c.theta()});
    for (int q = 0; q < kQubits; ++q) circuit.ops.push_back({OpKind::H, {q, 0}});
    for (int k = 0; k < kBlocks; ++k) circuit.ops.push_back({OpKind::Cnot, {k, k + kBlocks}});
    for (int k = 0; k < kBlocks; ++k) circuit.ops.push_back({OpKind::Idle, {k, 0}});
    for (int q = 0; q < kQubits; ++q) circuit.ops.push_back({OpKind::Measure, {q, 0}});
    return circuit;
}

Challenge validate_qpuf_circuit(const Circuit& circuit) {
    if (circuit.n_qubits != kQubits) throw ValidationError("QPUF circuits have 8 qubits");
    const auto& ops = circuit.ops;
    std::size_t i = 0;

    std::string bits(kQubits, '0');
    int last_x = -1;
    for (; i < ops.size() && ops[i].kind == OpKind::X; ++i) {
        const int q = ops[i].qubits[0];
        if (q <= last_x || q >= kQubits) bad_circuit(i, "X ops must target ascending distinct qubits");
        bits[static_cast<std::size_t>(q)] = '1';
        last_x = q;
    }

    const auto expect = [&](OpKind kind, int q0, int q1) {
        if (i >= ops.size()) bad_circuit(i, "circuit ends early, expected " + op_name(kind));
        const Op& op = ops[i];
        if (op.kind != kind) bad_circuit(i, "expected " + op_name(kind) + ", found " + op_name(op.kind));
        if (op.qubits[0] != q0 || (kind == OpKind::Cnot && op.qubits[1] != q1)) {
            bad_circuit(i, op_name(kind) + " on unexpected qubits");
        }
        return ops[i++];
    };

    const double theta = (i < ops.size()) ? ops[i].param : 0.0;
    for (int q = 0; q < kQubits; ++q) {
        if (expect(OpKind::Ry, q, 0).param != theta) bad_circuit(i - 1, "Ry angles must be shared by all qubits");
    }
    for (int q = 0; q < kQubits; ++q) expect(OpKind::H, q, 0);
    for (int k = 0; k < kBlocks; ++k) expect(OpKind::Cnot, k, k + kBlocks);
    for (int k = 0; k < kBlocks; ++k) expect(OpKind::Idle, k, 0);
    for (int q = 0; q < kQubits; ++q) expect(OpKind::Measure, q, 0);
    if (i != ops.size()) bad_circuit(i, "trailing ops after measurement");
    return Challenge(bits, theta);
}

OutcomeDistribution simulate_distribution(const Circuit& circuit, const noise::DeviceProfile& profile) {
    DensityMatrix rho = qstate::init_density(circuit.n_qubits, std::string(static_cast<std::size_t>(circuit.n_qubits), '0'));

    // Runs of single-qubit unitaries on one qubit are fused into one matrix
    // and applied when the qubit next takes part in a CNOT or idle.
    std::vector<std::optional<qstate::Gate1>> pending(static_cast<std::size_t>(circuit.n_qubits));
    const auto flush = [&](int q) {
        if (q < 0 || q >= circuit.n_qubits) return;  // apply_* reports the bad index
        auto& g = pending[static_cast<std::size_t>(q)];
        if (g) rho = qstate::apply_1q(std::move(rho), *g, q);
        g.reset();
    };
    const auto queue = [&](int q, const qstate::Gate1& g) {
        if (q < 0 || q >= circuit.n_qubits) {
            rho = qstate::apply_1q(std::move(rho), g, q);  // throws
            return;
        }
        auto& slot = pending[static_cast<std::size_t>(q)];
        slot = slot ? qstate::Gate1(g * *slot) : g;
    };

    for (const Op& op : circuit.ops) {
        switch (op.kind) {
            case OpKind::X: queue(op.qubits[0], qstate::gate_x()); break;
            case OpKind::Ry: queue(op.qubits[0], qstate::gate_ry(op.param)); break;
            case OpKind::H: queue(op.qubits[0], qstate::gate_h()); break;
            case OpKind::Cnot:
                flush(op.qubits[0]);
                flush(op.qubits[1]);
                rho = qstate::apply_cnot(std::move(rho), op.qubits[0], op.qubits[1]);
                break;
            case OpKind::Idle: {
                flush(op.qubits[0]);
                const auto ks = noise::idle_channel(profile, op.qubits[0], profile.idle_duration_us);
                const bool identity = ks.operators.size() == 1 && ks.operators.front() == qstate::Gate1::Identity();
                if (!identity) rho = qstate::apply_channel(std::move(rho), ks, op.qubits[0]);
                break;
            }
            case OpKind::Measure: break;  // all qubits are read from the final diagonal
        }
    }
    for (int q = 0; q < circuit.n_qubits; ++q) flush(q);
    return qstate::measure_distribution(rho);
}

OutcomeDistribution engine_distribution(const Circuit& circuit, const noise::DeviceProfile& profile) {
    return noise::apply_readout_confusion(simulate_distribution(circuit, profile), profile);
}

JobResult execute_job(const Circuit& circuit, const noise::DeviceProfile& profile, int shots, std::uint64_t seed) {
    Challenge challenge = validate_qpuf_circuit(circuit);
    if (shots < 1) throw ArgumentError("shots must be >= 1, got " + std::to_string(shots));
    const OutcomeDistribution dist = simulate_distribution(circuit, profile);
    const qstate::ShotCounts raw = qstate::sample_shots(dist, shots, derive_seed(seed, 1));
    JobResult job{std::move(challenge), profile.name, shots,
                  noise::apply_readout_error(raw, profile, derive_seed(seed, 2)), {}, seed};
    for (int q = 0; q < kQubits; ++q) {
        job.p1[static_cast<std::size_t>(q)] =
            static_cast<double>(job.counts.per_qubit_ones[static_cast<std::size_t>(q)]) / shots;
    }
    return job;
}

std::array<double, 4> block_distribution(const Challenge& c, const noise::DeviceProfile& profile, int block) {
    if (block < 0 || block >= kBlocks) throw ArgumentError("block index out of range");
    const int control = block;
    const int target = block + kBlocks;
    using M4 = Eigen::Matrix4cd;
    const auto kron = [](const qstate::Gate1& a, const qstate::Gate1& b) {
        M4 out;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
        return out;
    };

    // Basis |control, target>, index 2*control + target.
    M4 rho = M4::Zero();
    const int start = 2 * static_cast<int>(c.bit(control)) + static_cast<int>(c.bit(target));
    rho(start, start) = 1.0;

    const M4 ry = kron(qstate::gate_ry(c.theta()), qstate::gate_ry(c.theta()));
    const M4 h = kron(qstate::gate_h(), qstate::gate_h());
    const M4 u = qstate::gate_cnot() * h * ry;
    rho = u * rho * u.adjoint();

    M4 idled = M4::Zero();
    for (const auto& k : noise::idle_channel(profile, control, profile.idle_duration_us).operators) {
        const M4 kk = kron(k, qstate::Gate1::Identity());
        idled += kk * rho * kk.adjoint();
    }

    std::array<double, 4> p{};
    for (int i = 0; i < 4; ++i) p[static_cast<std::size_t>(i)] = std::max(0.0, idled(i, i).real());

    const double ec = profile.qubit(control).readout_error;
    const double et = profile.qubit(target).readout_error;
    std::array<double, 4> out{};
    for (int read = 0; read < 4; ++read) {
        for (int actual = 0; actual < 4; ++actual) {
            const bool flip_c = ((read >> 1) & 1) != ((actual >> 1) & 1);
            const bool flip_t = (read & 1) != (actual & 1);
            out[static_cast<std::size_t>(read)] += (flip_c ? ec : 1.0 - ec) * (flip_t ? et : 1.0 - et) *
                                                   p[static_cast<std::size_t>(actual)];
        }
    }
    return out;
}

OutcomeDistribution block_oracle(const Challenge& c, const noise::DeviceProfile& profile) {
    std::array<std::array<double, 4>, kBlocks> blocks{};
    for (int k = 0; k < kBlocks; ++k) blocks[static_cast<std::size_t>(k)] = block_distribution(c, profile, k);

    OutcomeDistribution dist{kQubits, std::vector<double>(std::size_t{1} << kQubits)};
    for (std::size_t b = 0; b < dist.probs.size(); ++b) {
        double p = 1.0;
        for (int k = 0; k < kBlocks; ++k) {
            const std::size_t local = 2 * ((b >> k) & 1U) + ((b >> (k + kBlocks)) & 1U);
            p *= blocks[static_cast<std::size_t>(k)][local];
        }
        dist.probs[b] = p;
    }
    return dist;
}

}  // namespace qpuf::circuit
