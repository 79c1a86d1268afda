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

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "qpuf/attestation.hpp"
#include "qpuf/circuit.hpp"
#include "qpuf/crp.hpp"
#include "qpuf/errors.hpp"
#include "qpuf/metrics.hpp"
#include "qpuf/noise.hpp"
#include "qpuf/seed.hpp"

namespace qpuf::cli {

namespace fs = std::filesystem;

namespace {

// Signals a failure with a specific exit code after the message is printed.
struct Exit {
    int code;
    std::string message;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

std::vector<fs::path> profile_search_dirs() {
    std::vector<fs::path> dirs;
    if (const char* env = std::getenv("QPUF_PROFILE_DIR"); env && *env) {
        std::stringstream ss(env);
        std::string item;
        while (std::getline(ss, item, ':')) {
            if (!item.empty()) dirs.emplace_back(item);
        }
    }
    return dirs;
}

noise::DeviceProfile resolve(const std::string& name) {
    try {
        return noise::resolve_profile(name, profile_search_dirs());
    } catch (const ArgumentError& e) {
        throw Exit{kUsage, e.what()};
    } catch (const SchemaError& e) {
        throw Exit{kUsage, e.what()};
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw IoError("cannot write " + path.string());
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, std::ostream& out) {
    if (seed) return *seed;
    std::random_device rd;
    const std::uint64_t chosen = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    out << "seed: " << chosen << " (pass --seed " << chosen << " to replay)\n";
    return chosen;
}

// ---------------------------------------------------------------- profile

void cmd_profile_list(std::ostream& out) {
    for (const auto& p : noise::builtin_profiles()) out << p.name << '\n';
}

void cmd_profile_show(const std::string& name, bool as_json, std::ostream& out) {
    const noise::DeviceProfile p = resolve(name);
    if (as_json) {
        out << noise::serialize_profile(p);
        return;
    }
    out << "profile " << p.name << (p.ideal ? " (ideal: noiseless idle, no readout error)" : "") << '\n';
    out << fmt("idle_duration_us=%g\n", p.idle_duration_us);
    for (const auto& q : p.qubits) {
        out << fmt("qubit %d: t1=%g t2=%g f=%g readout=%g\n", q.index, q.t1_us, q.t2_us, q.frequency_ghz,
                   q.readout_error);
    }
}

// ---------------------------------------------------------------- crp run

struct CrpRunOptions {
    std::string profile = "ideal";
    std::string challenges = "75";
    int shots = 1024;
    int instances = 5;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    int jobs = 1;
    bool gnuplot = false;
};

std::vector<circuit::Challenge> load_challenges(const std::string& source, std::uint64_t seed) {
    if (!source.empty() && std::all_of(source.begin(), source.end(), [](unsigned char c) { return std::isdigit(c); })) {
        const int count = std::stoi(source);
        if (count < 1) throw Exit{kUsage, "--challenges must be >= 1"};
        return crp::random_challenges(count, seed);
    }
    std::ifstream in(source);
    if (!in) throw IoError("cannot open challenge file " + source);
    try {
        auto list = circuit::read_challenges(in);
        if (list.empty()) throw Exit{kUsage, "challenge file " + source + " is empty"};
        return list;
    } catch (const ParseError& e) {
        throw Exit{kUsage, source + ": " + e.what()};
    }
}

std::string gnuplot_script() {
    std::string s =
        "set datafile separator ','\n"
        "set key outside\n"
        "set xlabel 'job'\n"
        "set ylabel 'P(1)'\n"
        "set yrange [0:1]\n"
        "plot ";
    for (int q = 0; q < circuit::kQubits; ++q) {
        if (q) s += ", \\\n     ";
        s += fmt("'p1.csv' every ::1 using 0:%d with linespoints title 'q%d'", q + 1, q);
    }
    return s + "\n";
}

void cmd_crp_run(const CrpRunOptions& opt, std::ostream& out) {
    if (opt.shots < 1) throw Exit{kUsage, "--shots must be >= 1"};
    if (opt.instances < 1) throw Exit{kUsage, "--instances must be >= 1"};
    if (opt.jobs < 1) throw Exit{kUsage, "--jobs must be >= 1"};
    const noise::DeviceProfile profile = resolve(opt.profile);
    const std::uint64_t seed = resolve_seed(opt.seed, out);
    const auto challenges = load_challenges(opt.challenges, seed);

    const fs::path dir(opt.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

    const auto instances = crp::run_experiment(challenges, profile, opt.shots, opt.instances, seed, opt.jobs);

    crp::CrpStore store = crp::CrpStore::create(dir / "crp.jsonl");
    std::string jobs_csv = "instance,job,init_bits,theta,seed,shots,response\n";
    std::string p1_csv = "q0,q1,q2,q3,q4,q5,q6,q7\n";
    for (const auto& inst : instances) {
        for (std::size_t j = 0; j < inst.responses.size(); ++j) {
            const auto& r = inst.responses[j];
            store.append(r);
            jobs_csv += fmt("%d,%zu,%s,%.17g,%llu,%d,%s\n", inst.instance_id, j, r.challenge.init_bits().c_str(),
                            r.challenge.theta(), static_cast<unsigned long long>(r.seed), r.shots, r.bits.c_str());
        }
        const std::string series = metrics::series_csv(metrics::probability_series(inst));
        p1_csv += series.substr(series.find('\n') + 1);
    }
    std::ostringstream challenge_text;
    circuit::write_challenges(challenge_text, challenges);
    write_file(dir / "challenges.txt", challenge_text.str());
    write_file(dir / "jobs.csv", jobs_csv);
    write_file(dir / "p1.csv", p1_csv);
    if (opt.gnuplot) write_file(dir / "p1.gp", gnuplot_script());

    out << fmt("profile %s: %d instances x %zu challenges x %d shots -> %zu responses\n", profile.name.c_str(),
               opt.instances, challenges.size(), opt.shots, store.size());
    out << "wrote " << (dir / "crp.jsonl").string() << '\n';
}

// ---------------------------------------------------------------- metrics

void cmd_metrics(const std::vector<std::string>& stores, const std::string& out_dir, std::ostream& out,
                 std::ostream& err) {
    std::vector<crp::ResponseRecord> all;
    for (const auto& path : stores) {
        try {
            const crp::CrpStore store = crp::CrpStore::load(path);
            all.insert(all.end(), store.records().begin(), store.records().end());
        } catch (const ParseError& e) {
            throw Exit{kUsage, path + ": " + e.what()};
        } catch (const ConflictError& e) {
            throw Exit{kUsage, path + ": " + e.what()};
        }
    }
    if (all.empty()) throw Exit{kUsage, "no records in the given stores"};

    metrics::MetricsReport report;
    try {
        report = metrics::build_report(crp::group_instances(all));
    } catch (const ArgumentError& e) {
        throw Exit{kUsage, e.what()};
    }
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';

    const auto opt_pct = [](const std::optional<double>& v) { return v ? fmt("%.2f", *v) : std::string("n/a"); };
    for (const auto& m : report.profiles) {
        out << fmt("%s: instances=%d challenges=%d randomness=%.2f%% diffuseness=%s%% reliability=%s%%\n",
                   m.profile.c_str(), m.instances, m.challenges, m.randomness_pct, opt_pct(m.diffuseness_pct).c_str(),
                   opt_pct(m.reliability_fraction_pct).c_str());
    }
    if (report.uniqueness_pct) out << fmt("uniqueness=%.2f%%\n", *report.uniqueness_pct);

    if (!out_dir.empty()) {
        const fs::path dir(out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory " + dir.string());
        write_file(dir / "metrics.csv", metrics::report_csv(report));
        write_file(dir / "metrics.json", metrics::report_json(report));
        for (const auto& m : report.profiles) {
            write_file(dir / ("p1_" + m.profile + ".csv"), metrics::series_csv(m.per_qubit_p1));
        }
    }
}

// ---------------------------------------------------------------- oracle

int cmd_oracle_check(int trials, std::uint64_t seed, bool corrupt_cnot, std::ostream& out) {
    if (trials < 1) throw Exit{kUsage, "--trials must be >= 1"};
    constexpr double kMaxTv = 1e-9;
    const auto challenges = crp::random_challenges(trials, seed);
    int failures = 0;
    for (const auto& profile : noise::builtin_profiles()) {
        double worst = 0.0;
        for (const auto& c : challenges) {
            circuit::Circuit circ = circuit::build_qpuf_circuit(c);
            if (corrupt_cnot) {
                for (auto& op : circ.ops) {
                    if (op.kind == circuit::OpKind::Cnot && op.qubits[0] == 0) op.qubits[1] = 5;
                }
            }
            const double tv =
                qstate::total_variation(circuit::engine_distribution(circ, profile), circuit::block_oracle(c, profile));
            worst = std::max(worst, tv);
            if (!(tv < kMaxTv)) {
                ++failures;
                out << fmt("FAIL %s challenge '%s' tv=%.3e\n", profile.name.c_str(),
                           circuit::format_challenge(c).c_str(), tv);
            }
        }
        out << fmt("%-15s trials=%d max_tv=%.3e %s\n", profile.name.c_str(), trials, worst,
                   worst < kMaxTv ? "ok" : "FAIL");
    }
    out << (failures ? fmt("oracle check failed: %d mismatches\n", failures) : std::string("oracle check passed\n"));
    return failures ? kCheckFailed : kOk;
}

// ---------------------------------------------------------------- attest

struct AttestOptions {
    int ieds = 10;
    int threshold = 0;
    int shots = 1024;
    std::optional<std::uint64_t> seed;
    std::string profile = "ideal";
};

std::string oracle_response(const circuit::Challenge& c, const noise::DeviceProfile& p, double* min_margin) {
    const auto dist = circuit::block_oracle(c, p);
    std::array<double, circuit::kQubits> marg{};
    double m = 1.0;
    for (int q = 0; q < circuit::kQubits; ++q) {
        marg[static_cast<std::size_t>(q)] = dist.marginal_one(q);
        m = std::min(m, std::abs(marg[static_cast<std::size_t>(q)] - 0.5));
    }
    if (min_margin) *min_margin = m;
    return crp::majority_bits(marg);
}

int cmd_attest_demo(const AttestOptions& opt, std::ostream& out) {
    if (opt.ieds < 1) throw Exit{kUsage, "--ieds must be >= 1"};
    if (opt.threshold < 0 || opt.threshold > circuit::kQubits) throw Exit{kUsage, "--threshold must be in 0..8"};
    if (opt.shots < 1) throw Exit{kUsage, "--shots must be >= 1"};
    const noise::DeviceProfile profile = resolve(opt.profile);
    const std::uint64_t seed = resolve_seed(opt.seed, out);
    constexpr std::int64_t kEpoch = 1718900000;  // fixed clock keeps transcripts replayable
    std::int64_t clock = kEpoch;

    attest::AttestationDb db;
    attest::Rtu rtu({"rtu-01", attest::Role::Rtu}, profile, db);
    attest::Mtu mtu({"mtu-00", attest::Role::Mtu}, db);

    int unexpected = 0;
    out << fmt("%-12s %-10s %-15s %3s %3s  %-8s %-8s\n", "device", "scenario", "run_on", "hd", "tau", "decision",
               "expected");
    const auto row = [&](const std::string& dev, const char* scenario, const std::string& run_on,
                         const attest::AuthDecision& d, bool expect_accept) {
        const bool ok = d.accepted == expect_accept;
        unexpected += !ok;
        out << fmt("%-12s %-10s %-15s %3d %3d  %-8s %-8s%s\n", dev.c_str(), scenario, run_on.c_str(), d.hd,
                   d.threshold, d.accepted ? "accept" : "reject", expect_accept ? "accept" : "reject",
                   ok ? "" : "  UNEXPECTED");
    };

    std::vector<attest::DeviceIdentity> ieds;
    for (int i = 0; i < opt.ieds; ++i) {
        ieds.push_back({fmt("ied-%04d", i + 1), attest::Role::Ied});
        rtu.enroll(ieds.back(), opt.shots, seed, clock++);
    }
    out << fmt("enrolled %d IEDs at %s on %s\n", opt.ieds, rtu.identity().id.c_str(), profile.name.c_str());

    for (const auto& ied : ieds) {
        row(ied.id, "genuine", profile.name, rtu.authenticate(ied, opt.threshold, opt.shots, seed, clock++), true);
    }

    // Tamper: one stored response bit flipped by an attacker with DB access.
    {
        const auto& victim = ieds.front();
        std::string bits = db.find(victim.id, rtu.identity().id)->response.bits;
        bits[0] = bits[0] == '1' ? '0' : '1';
        db.overwrite_response(victim.id, rtu.identity().id, bits);
        const auto d = rtu.authenticate(victim, opt.threshold, opt.shots, seed, clock++);
        row(victim.id, "tamper", profile.name, d, 1 <= opt.threshold);
    }

    // Fake device: the stored challenge is answered by a different quantum system.
    {
        const double margin = attest::default_enroll_margin(opt.shots);
        std::optional<std::pair<attest::DeviceIdentity, const noise::DeviceProfile*>> pick;
        int predicted_hd = 0;
        const auto consider = [&](const attest::DeviceIdentity& ied) {
            const auto rec = db.find(ied.id, rtu.identity().id);
            for (const auto& fake : noise::builtin_profiles()) {
                if (fake.name == profile.name) continue;
                double m = 0.0;
                const std::string predicted = oracle_response(rec->response.challenge, fake, &m);
                const int hd = metrics::hamming(predicted, rec->response.bits).distance;
                if (hd > 0 && m > margin) {
                    pick.emplace(ied, &fake);
                    predicted_hd = hd;
                    return true;
                }
            }
            return false;
        };
        for (std::size_t i = 1; i < ieds.size() && !pick; ++i) consider(ieds[i]);
        for (int probe = 0; probe < 64 && !pick; ++probe) {
            attest::DeviceIdentity extra{fmt("probe-%04d", probe + 1), attest::Role::Ied};
            rtu.enroll(extra, opt.shots, seed, clock++);
            consider(extra);
        }
        if (pick) {
            const auto d = rtu.authenticate_on(pick->first, *pick->second, opt.threshold, opt.shots, seed, clock++);
            row(pick->first.id, "fake", pick->second->name, d, predicted_hd <= opt.threshold);
        } else {
            ++unexpected;
            out << "fake-profile scenario: no distinguishing device found\n";
        }
    }

    // MTU tier: register the RTU on its own quantum device, then attest it.
    mtu.register_rtu(rtu.identity(), profile, opt.shots, seed, clock++);
    row(rtu.identity().id, "rtu@mtu", profile.name,
        mtu.authenticate_rtu(rtu.identity(), profile, opt.threshold, opt.shots, seed, clock++), true);

    // Integrity tag on one IED message.
    {
        const auto rec = db.find(ieds.back().id, rtu.identity().id);
        const std::string data = "feeder-7 V=229.8 I=41.2";
        const auto tag = attest::integrity_tag(data, rec->response.bits, clock);
        const bool good = attest::verify_tag(data, rec->response.bits, tag);
        const bool forged = attest::verify_tag("feeder-7 V=229.8 I=41.3", rec->response.bits, tag);
        unexpected += !good + forged;
        out << fmt("integrity tag %s: verify=%s altered-data=%s\n", attest::to_hex(std::string_view(
                       reinterpret_cast<const char*>(tag.digest.data()), tag.digest.size())).substr(0, 16).c_str(),
                   good ? "ok" : "FAIL", forged ? "accepted(FAIL)" : "rejected");
    }

    out << (unexpected ? fmt("attestation demo: %d unexpected outcomes\n", unexpected)
                       : std::string("attestation demo: all outcomes as expected\n"));
    return unexpected ? kCheckFailed : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"qpuf: quantum PUF simulator, CRP experiments, metrics and attestation"};
    app.require_subcommand(1);

    int result = kOk;
    std::function<int()> action;

    // profile
    auto* profile_cmd = app.add_subcommand("profile", "inspect device calibration profiles");
    profile_cmd->require_subcommand(1);
    auto* list_cmd = profile_cmd->add_subcommand("list", "list built-in profiles");
    list_cmd->callback([&] { action = [&] { cmd_profile_list(out); return int{kOk}; }; });
    std::string show_name;
    bool show_json = false;
    auto* show_cmd = profile_cmd->add_subcommand("show", "print per-qubit calibration");
    show_cmd->add_option("name", show_name, "built-in name, file path, or name in $QPUF_PROFILE_DIR")->required();
    show_cmd->add_flag("--json", show_json, "print the profile document");
    show_cmd->callback([&] { action = [&] { cmd_profile_show(show_name, show_json, out); return int{kOk}; }; });

    // crp run
    auto* crp_cmd = app.add_subcommand("crp", "challenge-response experiments");
    crp_cmd->require_subcommand(1);
    CrpRunOptions crp_opt;
    auto* run_cmd = crp_cmd->add_subcommand("run", "run the multi-instance CRP experiment");
    run_cmd->add_option("--profile", crp_opt.profile, "profile name or file")->capture_default_str();
    run_cmd->add_option("--challenges", crp_opt.challenges, "challenge count or challenge file")->capture_default_str();
    run_cmd->add_option("--shots", crp_opt.shots, "shots per job")->capture_default_str();
    run_cmd->add_option("--instances", crp_opt.instances, "repeated instances")->capture_default_str();
    run_cmd->add_option("--seed", crp_opt.seed, "base seed");
    run_cmd->add_option("--out", crp_opt.out_dir, "output directory")->capture_default_str();
    run_cmd->add_option("--jobs", crp_opt.jobs, "parallel jobs")->capture_default_str();
    run_cmd->add_flag("--gnuplot", crp_opt.gnuplot, "also write p1.gp");
    run_cmd->callback([&] { action = [&] { cmd_crp_run(crp_opt, out); return int{kOk}; }; });

    // metrics
    std::vector<std::string> metric_stores;
    std::string metrics_out;
    auto* metrics_cmd = app.add_subcommand("metrics", "compute PUF metrics from CRP stores");
    metrics_cmd->add_option("stores", metric_stores, "CRP store files")->required();
    metrics_cmd->add_option("--out", metrics_out, "write metrics.csv, metrics.json and p1 series here");
    metrics_cmd->callback([&] {
        action = [&] { cmd_metrics(metric_stores, metrics_out, out, err); return int{kOk}; };
    });

    // oracle check
    auto* oracle_cmd = app.add_subcommand("oracle", "engine vs. block-oracle cross-checks");
    oracle_cmd->require_subcommand(1);
    int trials = 20;
    std::uint64_t oracle_seed = 1;
    bool corrupt_cnot = false;
    auto* check_cmd = oracle_cmd->add_subcommand("check", "compare distributions on random challenges");
    check_cmd->add_option("--trials", trials, "challenges per profile")->capture_default_str();
    check_cmd->add_option("--seed", oracle_seed, "challenge seed")->capture_default_str();
    check_cmd->add_flag("--corrupt-cnot", corrupt_cnot, "negative control: rewire CNOT 0->4 to 0->5 in the engine run");
    check_cmd->callback([&] { action = [&] { return cmd_oracle_check(trials, oracle_seed, corrupt_cnot, out); }; });

    // attest demo
    auto* attest_cmd = app.add_subcommand("attest", "IED/RTU/MTU attestation");
    attest_cmd->require_subcommand(1);
    AttestOptions attest_opt;
    auto* demo_cmd = attest_cmd->add_subcommand("demo", "enroll, authenticate, tamper and spoof scenarios");
    demo_cmd->add_option("--ieds", attest_opt.ieds, "number of IEDs")->capture_default_str();
    demo_cmd->add_option("--threshold", attest_opt.threshold, "accepted Hamming distance")->capture_default_str();
    demo_cmd->add_option("--shots", attest_opt.shots, "shots per job")->capture_default_str();
    demo_cmd->add_option("--seed", attest_opt.seed, "seed");
    demo_cmd->add_option("--profile", attest_opt.profile, "RTU quantum device")->capture_default_str();
    demo_cmd->callback([&] { action = [&] { return cmd_attest_demo(attest_opt, out); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        result = action ? action() : kUsage;
    } catch (const Exit& e) {
        err << "error: " << e.message << '\n';
        return e.code;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return result;
}

}  // namespace qpuf::cli
