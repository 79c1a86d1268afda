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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <array>
#include <bit>
#include <cfloat>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "../tools/cli.hpp"
#include "qpuf/attestation.hpp"
#include "qpuf/circuit.hpp"
#include "qpuf/crp.hpp"
#include "qpuf/metrics.hpp"
#include "qpuf/noise.hpp"
#include "qpuf/seed.hpp"

using namespace qpuf;
using std::numbers::pi;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why) {
        if (!ok && pass) detail = why;
        pass = pass && ok;
    }
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const noise::DeviceProfile& builtin(std::string_view name) { return *noise::find_builtin(name); }

std::string random_bits(std::mt19937_64& rng, int n) {
    std::string s(static_cast<std::size_t>(n), '0');
    for (auto& c : s) c = (rng() & 1U) ? '1' : '0';
    return s;
}

metrics::InstanceRecord instance_of(const std::vector<std::string>& bits, const std::string& profile, int id) {
    metrics::InstanceRecord inst{id, profile, {}};
    for (std::size_t k = 0; k < bits.size(); ++k) {
        inst.responses.push_back({circuit::random_challenge(k), bits[k], {}, profile, 1024, id, k});
    }
    return inst;
}

// P(Binomial(n, p) > n/2).
double majority_one_probability(int n, double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    double total = 0.0;
    for (int k = n / 2 + 1; k <= n; ++k) {
        total += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
                          (n - k) * std::log1p(-p));
    }
    return std::min(total, 1.0);
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto challenges = crp::random_challenges(100, 0xACCE1);
    double worst = 0.0;
    int runs = 0;
    for (const auto& p : noise::builtin_profiles()) {
        for (const auto& c : challenges) {
            const double tv = qstate::total_variation(circuit::engine_distribution(circuit::build_qpuf_circuit(c), p),
                                                      circuit::block_oracle(c, p));
            worst = std::max(worst, tv);
            ++runs;
            o.require(tv < 1e-9, fmt("%s %s tv=%.3e", p.name.c_str(), circuit::format_challenge(c).c_str(), tv));
        }
    }
    const double secs = seconds_since(t0);
    o.require(secs < 10.0, fmt("runtime %.2f s >= 10 s", secs));
    if (o.pass) o.detail = fmt("%d challenge runs over 4 profiles, max TV %.2e, %.2f s", runs, worst, secs);
    return o;
}

Outcome physics_checks() {
    Outcome o;
    const double h = qstate::measure_distribution(
                         qstate::apply_1q(qstate::init_density(1, "0"), qstate::gate_h(), 0))
                         .probs[1];
    o.require(std::abs(h - 0.5) <= 4 * DBL_EPSILON, fmt("H|0> marginal %.17g", h));

    std::mt19937_64 rng(0xF1);
    std::uniform_real_distribution<double> angle(0.0, 2 * pi);
    double worst_ry = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double theta = angle(rng);
        auto rho = qstate::apply_1q(qstate::init_density(1, "0"), qstate::gate_ry(theta), 0);
        rho = qstate::apply_1q(std::move(rho), qstate::gate_h(), 0);
        const double err = std::abs(qstate::measure_distribution(rho).probs[1] - (1 - std::sin(theta)) / 2);
        worst_ry = std::max(worst_ry, err);
    }
    o.require(worst_ry <= 1e-12, fmt("Ry+H marginal error %.3e", worst_ry));

    std::uniform_real_distribution<double> t1s(5.0, 500.0), frac(0.0, 3.0);
    double worst_survival = 0.0;
    for (int i = 0; i < 20; ++i) {
        noise::DeviceProfile p = builtin("ibm_osaka");
        const double t1 = t1s(rng), t = frac(rng) * t1;
        p.qubits[0].t1_us = t1;
        p.qubits[0].t2_us = 2 * t1;
        const auto rho = qstate::apply_channel(qstate::init_density(1, "1"), noise::idle_channel(p, 0, t), 0);
        worst_survival = std::max(worst_survival, std::abs(qstate::measure_distribution(rho).probs[1] - std::exp(-t / t1)));
    }
    o.require(worst_survival <= 1e-9, fmt("survival error %.3e", worst_survival));

    // 10^4 random ops on 4 qubits; every channel drawn from the calibrated
    // profiles at random durations.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto rho = qstate::init_density(4, "0110");
    const auto& profiles = noise::builtin_profiles();
    int kraus_checked = 0;
    for (int step = 0; step < 10000 && o.pass; ++step) {
        const int q = static_cast<int>(rng() % 4);
        switch (rng() % 5) {
            case 0: rho = qstate::apply_1q(std::move(rho), qstate::gate_ry(angle(rng)), q); break;
            case 1: rho = qstate::apply_1q(std::move(rho), rng() & 1U ? qstate::gate_h() : qstate::gate_x(), q); break;
            case 2: rho = qstate::apply_cnot(std::move(rho), q, static_cast<int>((q + 1 + rng() % 3) % 4)); break;
            case 3: {
                const auto& p = profiles[rng() % profiles.size()];
                const auto k = noise::idle_channel(p, static_cast<int>(rng() % 8), 400.0 * u(rng));
                o.require(k.is_complete(), fmt("Kraus defect %.3e at step %d", k.completeness_defect(), step));
                ++kraus_checked;
                rho = qstate::apply_channel(std::move(rho), k, q);
                break;
            }
            default: {
                const auto k = rng() & 1U ? noise::amplitude_damping(u(rng)) : noise::dephasing(u(rng));
                o.require(k.is_complete(), fmt("Kraus defect %.3e at step %d", k.completeness_defect(), step));
                ++kraus_checked;
                rho = qstate::apply_channel(std::move(rho), k, q);
                break;
            }
        }
        if (const auto v = rho.invariant_violation()) o.require(false, fmt("step %d: %s", step, v->c_str()));
    }
    if (o.pass) {
        o.detail = fmt("H|0> P(1)=%.17g; Ry+H max err %.1e; survival max err %.1e; 10^4-op fuzz clean (%d channels)", h,
                       worst_ry, worst_survival, kraus_checked);
    }
    return o;
}

Outcome simulator_table_row() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto& ideal = builtin("ideal");
    const auto challenges = crp::random_challenges(75, 2024);
    const auto instances = crp::run_experiment(challenges, ideal, 1024, 5, 2024);
    std::map<std::string, std::vector<metrics::InstanceRecord>> by_profile{{ideal.name, instances}};
    const auto report = metrics::build_report(by_profile);
    const auto& m = report.profiles.at(0);

    // Expected pairwise reliability: two instances agree on a key iff every
    // qubit's majority vote lands the same way.
    double predicted = 0.0;
    for (const auto& c : challenges) {
        const auto dist = circuit::block_oracle(c, ideal);
        double agree = 1.0;
        for (int q = 0; q < 8; ++q) {
            const double a = majority_one_probability(1024, dist.marginal_one(q));
            agree *= a * a + (1 - a) * (1 - a);
        }
        predicted += agree;
    }
    predicted = 100.0 * predicted / static_cast<double>(challenges.size());
    const double secs = seconds_since(t0);

    const double rel = m.reliability_fraction_pct.value_or(-1.0);
    const double diff = m.diffuseness_pct.value_or(-1.0);
    o.require(std::abs(m.randomness_pct - 50.0) <= 5.0, fmt("randomness %.2f%% outside 50 +/- 5", m.randomness_pct));
    o.require(std::abs(diff - 50.0) <= 5.0, fmt("diffuseness %.2f%% outside 50 +/- 5", diff));
    o.require(std::abs(rel - predicted) <= 10.0,
              fmt("reliability %.2f%% vs oracle prediction %.2f%%", rel, predicted));
    o.require(secs < 60.0, fmt("runtime %.2f s >= 60 s", secs));
    const std::string summary =
        fmt("randomness %.2f%% (reference 52), diffuseness %.2f%% (reference 50), reliability %.2f%% vs oracle %.2f%% "
            "(reference 87), %.2f s",
            m.randomness_pct, diff, rel, predicted, secs);
    o.detail = o.pass ? summary : o.detail + "; " + summary;
    return o;
}

Outcome eq1_semantics() {
    Outcome o;
    std::mt19937_64 rng(0xE1);
    int keys = 0;
    for (int trial = 0; trial < 1000 && o.pass; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 20);
        std::vector<std::string> a, b;
        for (int k = 0; k < n; ++k) {
            a.push_back(random_bits(rng, 8));
            if (rng() % 2) {
                b.push_back(a.back());
            } else {
                auto flipped = a.back();
                const int flips = 1 + static_cast<int>(rng() % 3);
                for (int f = 0; f < flips; ++f) flipped[rng() % 8] ^= 1;  // '0' <-> '1'
                b.push_back(flipped);
            }
        }
        const auto r = metrics::reliability(instance_of(a, "dev", 0), instance_of(b, "dev", 1));
        int good = 0;
        for (int k = 0; k < n; ++k) {
            int hd = 0;
            for (int bit = 0; bit < 8; ++bit) hd += a[static_cast<std::size_t>(k)][static_cast<std::size_t>(bit)] !=
                                                    b[static_cast<std::size_t>(k)][static_cast<std::size_t>(bit)];
            const int expected = hd == 0 ? 100 : 0;
            good += hd == 0;
            o.require(r.per_key[static_cast<std::size_t>(k)] == expected,
                      fmt("trial %d key %d: got %d, expected %d", trial, k, r.per_key[static_cast<std::size_t>(k)], expected));
            ++keys;
        }
        o.require(r.fraction_pct == 100.0 * good / n, fmt("trial %d fraction %.6f", trial, r.fraction_pct));
    }
    if (o.pass) o.detail = fmt("1000 instance pairs, %d keys, every key exactly 0 or 100 and equal to brute force", keys);
    return o;
}

Outcome metric_brute_force() {
    Outcome o;
    std::mt19937_64 rng(0xB5);
    for (int trial = 0; trial < 1000 && o.pass; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 15);
        std::vector<std::string> a, b;
        for (int k = 0; k < n; ++k) {
            a.push_back(random_bits(rng, 8));
            b.push_back(random_bits(rng, 8));
        }
        // hamming and randomness: integer counts, compared exactly
        for (int k = 0; k < n; ++k) {
            const auto& x = a[static_cast<std::size_t>(k)];
            const auto& y = b[static_cast<std::size_t>(k)];
            int d = 0, ones = 0;
            for (int i = 0; i < 8; ++i) {
                d += x[static_cast<std::size_t>(i)] != y[static_cast<std::size_t>(i)];
                ones += x[static_cast<std::size_t>(i)] == '1';
            }
            const auto h = metrics::hamming(x, y);
            o.require(h.distance == d && h.percent == d * 100.0 / 8, fmt("hamming mismatch on trial %d", trial));
            o.require(metrics::randomness(x) == ones * 100.0 / 8, fmt("randomness mismatch on trial %d", trial));
        }
        // diffuseness: integer total over pairs
        long pair_hd = 0, pairs = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++pairs)
                for (int bit = 0; bit < 8; ++bit)
                    pair_hd += a[static_cast<std::size_t>(i)][static_cast<std::size_t>(bit)] !=
                               a[static_cast<std::size_t>(j)][static_cast<std::size_t>(bit)];
        const double diff = metrics::diffuseness(instance_of(a, "p", 0));
        o.require(std::llround(diff * 8 * static_cast<double>(pairs) / 100) == pair_hd &&
                      std::abs(diff - 100.0 * pair_hd / (8.0 * pairs)) <= 1e-12 * 100,
                  fmt("diffuseness mismatch on trial %d", trial));
        // uniqueness: integer total over matched keys
        long cross = 0;
        for (int k = 0; k < n; ++k)
            for (int bit = 0; bit < 8; ++bit)
                cross += a[static_cast<std::size_t>(k)][static_cast<std::size_t>(bit)] !=
                         b[static_cast<std::size_t>(k)][static_cast<std::size_t>(bit)];
        const double uniq = metrics::uniqueness(instance_of(a, "p", 0), instance_of(b, "q", 0));
        o.require(std::llround(uniq * 8 * n / 100) == cross && std::abs(uniq - 100.0 * cross / (8.0 * n)) <= 1e-12 * 100,
                  fmt("uniqueness mismatch on trial %d", trial));
    }
    if (o.pass) o.detail = "1000 random inputs: hamming/randomness identical, diffuseness/uniqueness equal at the integer level";
    return o;
}

struct AttestRun {
    std::vector<std::string> transcript;
    int genuine_accepts = 0;
    int tamper_rejects = 0;
    int tamper_total = 0;
    bool fake_found = false;
    bool fake_rejected = false;
};

AttestRun attestation_scenario(std::uint64_t seed, bool tamper) {
    using namespace attest;
    constexpr std::int64_t kNow = 1718900000;
    constexpr int kShots = 1024;
    AttestRun run;
    AttestationDb db;
    Rtu rtu({"rtu-01", Role::Rtu}, builtin("ideal"), db);
    std::vector<DeviceIdentity> ieds;
    for (int i = 0; i < 50; ++i) {
        ieds.push_back({fmt("ied-%04d", i + 1), Role::Ied});
        const auto rec = rtu.enroll(ieds.back(), kShots, seed, kNow + i);
        run.transcript.push_back(format_enrollment(rec));
    }
    for (const auto& ied : ieds) {
        const auto d = rtu.authenticate(ied, 0, kShots, seed, kNow + 100);
        run.genuine_accepts += d.accepted;
        run.transcript.push_back(fmt("%s %d %d %s", d.device_id.c_str(), d.accepted, d.hd, d.fresh_response.c_str()));
    }
    if (!tamper) return run;

    for (const auto& ied : ieds) {
        const std::string stored = db.find(ied.id, "rtu-01")->response.bits;
        for (std::size_t bit = 0; bit < 8; ++bit) {
            std::string bits = stored;
            bits[bit] = bits[bit] == '1' ? '0' : '1';
            db.overwrite_response(ied.id, "rtu-01", bits);
            const auto d = rtu.authenticate(ied, 0, kShots, seed, kNow + 200);
            run.tamper_rejects += !d.accepted;
            ++run.tamper_total;
        }
        db.overwrite_response(ied.id, "rtu-01", stored);
    }

    // Fake IED: a calibrated device answers a stored challenge whose oracle
    // response on that device clears the margin and differs from the record.
    const double margin = default_enroll_margin(kShots);
    for (int probe = 0; probe < 200 && !run.fake_found; ++probe) {
        DeviceIdentity extra{fmt("probe-%04d", probe + 1), Role::Ied};
        const auto rec = rtu.enroll(extra, kShots, seed, kNow + 300 + probe);
        for (const auto& fake : noise::builtin_profiles()) {
            if (fake.ideal) continue;
            const auto dist = circuit::block_oracle(rec.response.challenge, fake);
            std::array<double, 8> marg{};
            bool clear = true;
            for (int q = 0; q < 8; ++q) {
                marg[static_cast<std::size_t>(q)] = dist.marginal_one(q);
                clear = clear && std::abs(marg[static_cast<std::size_t>(q)] - 0.5) > margin;
            }
            if (!clear || crp::majority_bits(marg) == rec.response.bits) continue;
            run.fake_found = true;
            run.fake_rejected = !rtu.authenticate_on(extra, fake, 0, kShots, seed, kNow + 600).accepted;
            break;
        }
    }
    return run;
}

Outcome attestation_end_to_end() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto full = attestation_scenario(0xA77E57, true);
    const auto replay = attestation_scenario(0xA77E57, false);
    const double secs = seconds_since(t0);
    o.require(full.genuine_accepts == 50, fmt("%d/50 genuine accepts", full.genuine_accepts));
    o.require(full.tamper_rejects == full.tamper_total,
              fmt("%d/%d one-bit tampers rejected", full.tamper_rejects, full.tamper_total));
    o.require(full.fake_found, "no distinguishing fake-profile challenge found");
    o.require(full.fake_rejected, "fake-profile IED accepted");
    o.require(std::equal(replay.transcript.begin(), replay.transcript.end(), full.transcript.begin()),
              "rerun with the same seed diverged");
    o.require(secs < 10.0, fmt("runtime %.2f s >= 10 s", secs));
    if (o.pass) {
        o.detail = fmt("50/50 genuine accepts, %d/%d tampers rejected, fake IED rejected, replay identical, %.2f s",
                       full.tamper_rejects, full.tamper_total, secs);
    }
    return o;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome reproducibility() {
    Outcome o;
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / fmt("qpuf_acceptance_%llu", static_cast<unsigned long long>(
                                                                                       Clock::now().time_since_epoch().count()));
    std::ostringstream sink;
    for (const char* sub : {"a", "b"}) {
        const int code = cli::run({"crp", "run", "--profile", "ibm_sherbrooke", "--challenges", "20", "--shots", "1024",
                                   "--instances", "2", "--seed", "777", "--out", (root / sub).string()},
                                  sink, sink);
        o.require(code == 0, fmt("crp run exited %d: %s", code, sink.str().c_str()));
    }
    const std::string a = slurp(root / "a" / "crp.jsonl");
    o.require(!a.empty() && a == slurp(root / "b" / "crp.jsonl"), "store files differ between runs");

    // Round trip: the loaded records equal what a fresh in-memory run produces.
    const auto challenges = crp::random_challenges(20, 777);
    const auto instances = crp::run_experiment(challenges, builtin("ibm_sherbrooke"), 1024, 2, 777);
    std::vector<crp::ResponseRecord> expected;
    for (const auto& inst : instances) expected.insert(expected.end(), inst.responses.begin(), inst.responses.end());
    if (o.pass) {
        const auto loaded = crp::CrpStore::load(root / "a" / "crp.jsonl");
        o.require(loaded.records() == expected, "loaded records differ from the generated ones");
        bool theta_exact = loaded.size() == expected.size();
        for (std::size_t i = 0; theta_exact && i < expected.size(); ++i) {
            theta_exact = std::bit_cast<std::uint64_t>(loaded.records()[i].challenge.theta()) ==
                          std::bit_cast<std::uint64_t>(expected[i].challenge.theta());
        }
        o.require(theta_exact, "theta changed in the round trip");
    }
    std::error_code ec;
    fs::remove_all(root, ec);
    if (o.pass) o.detail = fmt("two seeded runs byte-identical (%zu bytes); 40 records round-trip with bit-exact theta", a.size());
    return o;
}

Outcome noise_monotonicity() {
    Outcome o;
    const circuit::Challenge controls_excited("11110000", pi / 2);  // X, Ry(π/2), H leaves each control in |1>
    int series = 0;
    for (const char* name : {"ibm_osaka", "ibm_kyoto", "ibm_sherbrooke"}) {
        noise::DeviceProfile p = builtin(name);
        for (int k = 0; k < circuit::kBlocks; ++k) {
            double prev = 2.0;
            for (int step = 0; step < 10; ++step) {
                p.idle_duration_us = 200.0 * step / 9.0;
                const auto d = circuit::block_distribution(controls_excited, p, k);
                const double survival = d[2] + d[3];
                o.require(survival < prev, fmt("%s control %d: P(1)=%.12f at %.1f us not below %.12f", name, k,
                                               survival, p.idle_duration_us, prev));
                prev = survival;
            }
            ++series;
        }
    }
    if (o.pass) o.detail = fmt("%d control qubits on 3 profiles strictly decreasing over 10 durations in [0, 200] us", series);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"physics checks", physics_checks},
        {"simulator metrics row", simulator_table_row},
        {"per-key reliability semantics", eq1_semantics},
        {"metric brute-force equivalence", metric_brute_force},
        {"attestation end-to-end", attestation_end_to_end},
        {"reproducibility", reproducibility},
        {"noise monotonicity", noise_monotonicity},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%s] criterion %zu: %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%s: %zu/%zu criteria passed\n", failed ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED",
                criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed ? 1 : 0;
}
