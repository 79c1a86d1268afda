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

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <thread>

#include <doctest.h>

#include "qpuf/crp.hpp"
#include "qpuf/errors.hpp"
#include "test_util.hpp"

using namespace qpuf;
using namespace qpuf::crp;
using circuit::Challenge;
using std::numbers::pi;

namespace {

const noise::DeviceProfile& builtin(std::string_view name) {
    const auto* p = noise::find_builtin(name);
    REQUIRE(p != nullptr);
    return *p;
}

// P(Binomial(n, p) <= n/2) for p > 1/2, summed in log space.
double majority_flip_probability(int n, double p) {
    double total = 0.0;
    for (int k = 0; k <= n / 2; ++k) {
        const double log_term = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                                k * std::log(p) + (n - k) * std::log1p(-p);
        total += std::exp(log_term);
    }
    return total;
}

ResponseRecord sample_record(std::mt19937_64& rng, int instance = 0, std::string profile = "ibm_osaka") {
    ResponseRecord r{circuit::random_challenge(rng()), "", {}, std::move(profile), 1024, instance, rng()};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& p : r.p1) p = std::floor(u(rng) * 1024) / 1024;
    r.bits = majority_bits(r.p1);
    return r;
}

}  // namespace

TEST_CASE("majority_bits") {
    CHECK(majority_bits({}) == "00000000");
    CHECK(majority_bits({1, 1, 1, 1, 0, 0, 0, 0}) == "11110000");
    CHECK(majority_bits({0.5, 0.5001, 0.4999, 0.5, 0.5, 0.5, 0.5, 1.0}) == "01000001");
}

TEST_CASE("complementing every shot complements the response except at ties") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        std::array<double, 8> p1{}, flipped{};
        for (std::size_t i = 0; i < 8; ++i) {
            const int ones = static_cast<int>(rng() % 1025);
            p1[i] = ones / 1024.0;
            flipped[i] = (1024 - ones) / 1024.0;
        }
        const auto a = majority_bits(p1), b = majority_bits(flipped);
        for (std::size_t i = 0; i < 8; ++i) {
            if (p1[i] == 0.5) {
                CHECK(a[i] == '0');
                CHECK(b[i] == '0');
            } else {
                CHECK(a[i] != b[i]);
            }
        }
    }
}

TEST_CASE("derive_response copies job fields") {
    const auto circuit = circuit::build_qpuf_circuit(Challenge("00000000", pi / 2));
    const auto job = circuit::execute_job(circuit, builtin("ideal"), 1024, 77);
    const auto r = derive_response(job, 3);
    CHECK(r.bits == "00000000");
    CHECK(r.p1 == job.p1);
    CHECK(r.challenge == job.challenge);
    CHECK(r.profile_name == "ideal");
    CHECK(r.shots == 1024);
    CHECK(r.instance_id == 3);
    CHECK(r.seed == 77);
}

TEST_CASE("run_experiment shape and determinism") {
    const auto challenges = random_challenges(75, 5);
    CHECK(challenges.size() == 75);
    CHECK(random_challenges(75, 5) == challenges);

    const auto one = run_experiment(challenges, builtin("ibm_kyoto"), 1024, 1, 99);
    REQUIRE(one.size() == 1);
    CHECK(one[0].responses.size() == 75);
    for (std::size_t i = 0; i < challenges.size(); ++i) {
        const auto& r = one[0].responses[i];
        CHECK(r.challenge == challenges[i]);
        CHECK(r.profile_name == "ibm_kyoto");
        CHECK(r.instance_id == 0);
        CHECK(r.shots == 1024);
        CHECK(r.bits == majority_bits(r.p1));
    }

    const auto small = std::vector<Challenge>(challenges.begin(), challenges.begin() + 6);
    const auto a = run_experiment(small, builtin("ibm_osaka"), 256, 3, 12345);
    const auto b = run_experiment(small, builtin("ibm_osaka"), 256, 3, 12345, 4);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].instance_id == static_cast<int>(i));
        CHECK(a[i].responses == b[i].responses);
    }
    // Adding instances never perturbs the earlier ones.
    const auto wider = run_experiment(small, builtin("ibm_osaka"), 256, 4, 12345);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(wider[i].responses == a[i].responses);

    std::set<std::uint64_t> seeds;
    for (const auto& inst : wider)
        for (const auto& r : inst.responses) seeds.insert(r.seed);
    CHECK(seeds.size() == 4 * small.size());

    CHECK_THROWS_AS(run_experiment({}, builtin("ideal"), 16, 1, 1), ArgumentError);
    CHECK_THROWS_AS(run_experiment(small, builtin("ideal"), 16, 0, 1), ArgumentError);
    CHECK_THROWS_AS(run_experiment(small, builtin("ideal"), 0, 1, 1), ArgumentError);
}

TEST_CASE("strongly biased qubits agree across instances") {
    const auto& ideal = builtin("ideal");
    std::vector<Challenge> strong;
    for (const auto& c : random_challenges(400, 8)) {
        const auto oracle = circuit::block_oracle(c, ideal);
        bool ok = true;
        for (int q = 0; q < 8; ++q) ok = ok && std::abs(oracle.marginal_one(q) - 0.5) > 0.1;
        if (ok) strong.push_back(c);
    }
    REQUIRE(strong.size() >= 20);
    CHECK(majority_flip_probability(1024, 0.6) < 1e-9);

    const auto runs = run_experiment(strong, ideal, 1024, 2, 31337);
    for (std::size_t i = 0; i < strong.size(); ++i) {
        CHECK(runs[0].responses[i].bits == runs[1].responses[i].bits);
        const auto oracle = circuit::block_oracle(strong[i], ideal);
        for (int q = 0; q < 8; ++q)
            CHECK(runs[0].responses[i].bits[static_cast<std::size_t>(q)] == (oracle.marginal_one(q) > 0.5 ? '1' : '0'));
    }
}

TEST_CASE("response bits follow oracle marginals beyond the 4-sigma margin") {
    const auto& ideal = builtin("ideal");
    const double margin = 4 * std::sqrt(0.25 / 1024);
    const auto challenges = random_challenges(60, 21);
    const auto runs = run_experiment(challenges, ideal, 1024, 1, 4);
    int checked = 0;
    for (std::size_t i = 0; i < challenges.size(); ++i) {
        const auto oracle = circuit::block_oracle(challenges[i], ideal);
        for (int q = 0; q < 8; ++q) {
            const double p = oracle.marginal_one(q);
            if (std::abs(p - 0.5) <= margin) continue;
            ++checked;
            CHECK(runs[0].responses[i].bits[static_cast<std::size_t>(q)] == (p > 0.5 ? '1' : '0'));
        }
    }
    CHECK(checked > 300);
}

TEST_CASE("record text round-trips exactly") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto r = sample_record(rng, i % 5);
        const auto line = format_record(r);
        CHECK(line.find('\n') == std::string::npos);
        CHECK(parse_record(line, 1) == r);
    }
}

TEST_CASE("parse_record reports the line") {
    std::mt19937_64 rng(3);
    const auto good = format_record(sample_record(rng));
    for (const std::string bad : {std::string("not json"), std::string("{}"), std::string("[1,2]"),
                                  good.substr(0, good.size() / 2)}) {
        try {
            parse_record(bad, 42);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 42);
        }
    }
}

TEST_CASE("CrpStore persistence") {
    testing::TempDir dir("crp");
    std::mt19937_64 rng(1);
    std::vector<ResponseRecord> written;
    {
        auto store = CrpStore::create(dir / "store.jsonl");
        for (int i = 0; i < 30; ++i) {
            written.push_back(sample_record(rng, i % 3));
            store.append(written.back());
        }
        CHECK(store.size() == 30);
        CHECK_THROWS_AS(store.append(written[7]), ConflictError);
        CHECK(store.size() == 30);

        // Same challenge under another instance or profile is a distinct key.
        auto other_instance = written[7];
        other_instance.instance_id = 99;
        store.append(other_instance);
        auto other_profile = written[7];
        other_profile.profile_name = "ibm_kyoto";
        store.append(other_profile);
        written.push_back(other_instance);
        written.push_back(other_profile);
    }
    const auto loaded = CrpStore::load(dir / "store.jsonl");
    CHECK(loaded.records() == written);
    REQUIRE(loaded.path().has_value());

    auto reopened = CrpStore::open(dir / "store.jsonl");
    CHECK_THROWS_AS(reopened.append(written[0]), ConflictError);
    auto fresh = sample_record(rng);
    reopened.append(fresh);
    CHECK(CrpStore::load(dir / "store.jsonl").size() == written.size() + 1);

    CHECK(CrpStore::create(dir / "store.jsonl").size() == 0);
    CHECK(CrpStore::load(dir / "store.jsonl").size() == 0);

    std::ofstream(dir / "empty.jsonl").close();
    CHECK(CrpStore::load(dir / "empty.jsonl").size() == 0);
    CHECK_THROWS_AS(CrpStore::load(dir / "missing.jsonl"), IoError);
    CHECK(CrpStore::open(dir / "missing.jsonl").size() == 0);

    CrpStore memory;
    memory.append(fresh);
    CHECK_THROWS_AS(memory.append(fresh), ConflictError);
    CHECK_FALSE(memory.path().has_value());
}

TEST_CASE("CrpStore load rejects bad lines with their line number") {
    testing::TempDir dir("crp_bad");
    std::mt19937_64 rng(2);
    const auto r = sample_record(rng);
    {
        std::ofstream out(dir / "bad.jsonl");
        out << format_record(r) << "\n\n" << format_record(sample_record(rng)) << "\n{\"profile\": 3}\n";
    }
    try {
        CrpStore::load(dir / "bad.jsonl");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
    }
    {
        std::ofstream out(dir / "dup.jsonl");
        out << format_record(r) << "\n" << format_record(r) << "\n";
    }
    CHECK_THROWS_AS(CrpStore::load(dir / "dup.jsonl"), ConflictError);
}

TEST_CASE("concurrent appends are serialized") {
    testing::TempDir dir("crp_threads");
    auto store = CrpStore::create(dir / "store.jsonl");
    std::vector<std::vector<ResponseRecord>> batches(4);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 4; ++t)
        for (int i = 0; i < 50; ++i) batches[static_cast<std::size_t>(t)].push_back(sample_record(rng, t));
    {
        std::vector<std::jthread> workers;
        for (const auto& batch : batches)
            workers.emplace_back([&store, &batch] {
                for (const auto& r : batch) store.append(r);
            });
    }
    CHECK(store.size() == 200);
    const auto loaded = CrpStore::load(dir / "store.jsonl");
    CHECK(loaded.size() == 200);
    CHECK(group_instances(loaded.records()).at("ibm_osaka").size() == 4);
}

TEST_CASE("group_instances") {
    const auto challenges = random_challenges(4, 6);
    std::vector<ResponseRecord> all;
    for (const auto* name : {"ibm_kyoto", "ideal"})
        for (const auto& inst : run_experiment(challenges, builtin(name), 64, 2, 10))
            all.insert(all.end(), inst.responses.begin(), inst.responses.end());
    std::reverse(all.begin(), all.end());
    const auto grouped = group_instances(all);
    REQUIRE(grouped.size() == 2);
    for (const auto& [name, instances] : grouped) {
        REQUIRE(instances.size() == 2);
        CHECK(instances[0].instance_id == 0);
        CHECK(instances[1].instance_id == 1);
        for (const auto& inst : instances) {
            CHECK(inst.profile_name == name);
            CHECK(inst.responses.size() == 4);
        }
    }
}
