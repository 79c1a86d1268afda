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

#include "qpuf/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "qpuf/errors.hpp"
#include "qpuf/records.hpp"

namespace qpuf::metrics {

namespace {

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void require_same_challenges(const InstanceRecord& a, const InstanceRecord& b) {
    if (!same_challenges(a, b)) {
        throw ArgumentError("instances '" + a.profile_name + "#" + std::to_string(a.instance_id) + "' and '" +
                            b.profile_name + "#" + std::to_string(b.instance_id) +
                            "' were run on different challenge lists");
    }
}

}  // namespace

Hamming hamming(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) {
        throw ArgumentError("hamming: length mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    Hamming h;
    for (std::size_t i = 0; i < a.size(); ++i) h.distance += a[i] != b[i];
    h.percent = a.empty() ? 0.0 : 100.0 * h.distance / static_cast<double>(a.size());
    return h;
}

double randomness(std::string_view response) {
    if (response.empty()) throw ArgumentError("randomness of an empty response");
    const auto ones = std::count(response.begin(), response.end(), '1');
    return 100.0 * static_cast<double>(ones) / static_cast<double>(response.size());
}

double diffuseness(const InstanceRecord& instance) {
    const auto& rs = instance.responses;
    if (rs.size() < 2) throw ArgumentError("diffuseness needs at least two responses");
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        for (std::size_t j = i + 1; j < rs.size(); ++j) {
            sum += hamming(rs[i].bits, rs[j].bits).percent;
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

bool same_challenges(const InstanceRecord& a, const InstanceRecord& b) {
    return std::equal(a.responses.begin(), a.responses.end(), b.responses.begin(), b.responses.end(),
                      [](const auto& x, const auto& y) { return x.challenge == y.challenge; });
}

Reliability reliability(const InstanceRecord& a, const InstanceRecord& b) {
    require_same_challenges(a, b);
    Reliability out;
    out.per_key.reserve(a.responses.size());
    int reliable = 0;
    for (std::size_t k = 0; k < a.responses.size(); ++k) {
        const bool exact = hamming(a.responses[k].bits, b.responses[k].bits).distance == 0;
        out.per_key.push_back(exact ? 100 : 0);
        reliable += exact;
    }
    out.fraction_pct = a.responses.empty() ? 0.0 : 100.0 * reliable / static_cast<double>(a.responses.size());
    return out;
}

double uniqueness(const InstanceRecord& a, const InstanceRecord& b) {
    if (a.profile_name == b.profile_name) {
        throw ArgumentError("uniqueness compares different devices, got '" + a.profile_name + "' twice");
    }
    require_same_challenges(a, b);
    if (a.responses.empty()) throw ArgumentError("uniqueness of empty instances");
    double sum = 0.0;
    for (std::size_t k = 0; k < a.responses.size(); ++k) {
        sum += hamming(a.responses[k].bits, b.responses[k].bits).percent;
    }
    return sum / static_cast<double>(a.responses.size());
}

ProbabilityTable probability_series(const InstanceRecord& instance) {
    ProbabilityTable table;
    for (int q = 0; q < circuit::kQubits; ++q) {
        auto& row = table[static_cast<std::size_t>(q)];
        row.reserve(instance.responses.size());
        for (const auto& r : instance.responses) row.push_back(r.p1[static_cast<std::size_t>(q)]);
    }
    return table;
}

MetricsReport build_report(const std::map<std::string, std::vector<InstanceRecord>>& by_profile) {
    MetricsReport report;
    const InstanceRecord* reference = nullptr;
    for (const auto& [name, instances] : by_profile) {
        if (instances.empty()) continue;
        for (const auto& inst : instances) {
            if (reference) {
                require_same_challenges(*reference, inst);
            } else {
                reference = &inst;
            }
        }

        ProfileMetrics m;
        m.profile = name;
        m.instances = static_cast<int>(instances.size());
        m.challenges = static_cast<int>(instances.front().responses.size());

        double rand_sum = 0.0;
        std::size_t n_responses = 0;
        double diff_sum = 0.0;
        for (const auto& inst : instances) {
            for (const auto& r : inst.responses) {
                rand_sum += randomness(r.bits);
                ++n_responses;
            }
            if (inst.responses.size() >= 2) diff_sum += diffuseness(inst);
        }
        m.randomness_pct = n_responses ? rand_sum / static_cast<double>(n_responses) : 0.0;
        if (m.challenges >= 2) {
            m.diffuseness_pct = diff_sum / static_cast<double>(instances.size());
        } else {
            report.warnings.push_back(name + ": diffuseness needs at least two challenges, omitted");
        }

        if (instances.size() >= 2) {
            double frac_sum = 0.0;
            std::size_t pairs = 0;
            m.per_key_reliability.assign(static_cast<std::size_t>(m.challenges), 100);
            for (std::size_t i = 0; i < instances.size(); ++i) {
                for (std::size_t j = i + 1; j < instances.size(); ++j) {
                    const Reliability r = reliability(instances[i], instances[j]);
                    frac_sum += r.fraction_pct;
                    ++pairs;
                    for (std::size_t k = 0; k < r.per_key.size(); ++k) {
                        m.per_key_reliability[k] = std::min(m.per_key_reliability[k], r.per_key[k]);
                    }
                }
            }
            m.reliability_fraction_pct = frac_sum / static_cast<double>(pairs);
        } else {
            report.warnings.push_back(name + ": reliability needs at least two instances, omitted");
        }
        m.per_qubit_p1 = probability_series(instances.front());
        report.profiles.push_back(std::move(m));
    }

    if (by_profile.size() >= 2) {
        double sum = 0.0;
        std::size_t n = 0;
        for (auto a = by_profile.begin(); a != by_profile.end(); ++a) {
            for (auto b = std::next(a); b != by_profile.end(); ++b) {
                const std::size_t shared = std::min(a->second.size(), b->second.size());
                for (std::size_t k = 0; k < shared; ++k) {
                    sum += uniqueness(a->second[k], b->second[k]);
                    ++n;
                }
            }
        }
        if (n) report.uniqueness_pct = sum / static_cast<double>(n);
    }
    return report;
}

std::string report_csv(const MetricsReport& report) {
    std::string out;
    out += "# summary\nprofile,instances,challenges,randomness_pct,diffuseness_pct,reliability_fraction_pct\n";
    for (const auto& m : report.profiles) {
        out += m.profile + "," + std::to_string(m.instances) + "," + std::to_string(m.challenges) + "," +
               pct(m.randomness_pct) + "," + (m.diffuseness_pct ? pct(*m.diffuseness_pct) : "") + "," +
               (m.reliability_fraction_pct ? pct(*m.reliability_fraction_pct) : "") + "\n";
    }
    out += "\n# per_key_reliability\nprofile,key,reliability_pct\n";
    for (const auto& m : report.profiles) {
        for (std::size_t k = 0; k < m.per_key_reliability.size(); ++k) {
            out += m.profile + "," + std::to_string(k) + "," + std::to_string(m.per_key_reliability[k]) + "\n";
        }
    }
    if (report.uniqueness_pct) {
        out += "\n# uniqueness\nuniqueness_pct\n" + pct(*report.uniqueness_pct) + "\n";
    }
    return out;
}

std::string report_json(const MetricsReport& report) {
    nlohmann::ordered_json doc;
    doc["profiles"] = nlohmann::ordered_json::array();
    for (const auto& m : report.profiles) {
        nlohmann::ordered_json p;
        p["profile"] = m.profile;
        p["instances"] = m.instances;
        p["challenges"] = m.challenges;
        p["randomness_pct"] = m.randomness_pct;
        p["diffuseness_pct"] = m.diffuseness_pct ? nlohmann::ordered_json(*m.diffuseness_pct) : nullptr;
        p["reliability_fraction_pct"] =
            m.reliability_fraction_pct ? nlohmann::ordered_json(*m.reliability_fraction_pct) : nullptr;
        p["per_key_reliability"] = m.per_key_reliability;
        p["per_qubit_p1"] = m.per_qubit_p1;
        doc["profiles"].push_back(std::move(p));
    }
    doc["uniqueness_pct"] = report.uniqueness_pct ? nlohmann::ordered_json(*report.uniqueness_pct) : nullptr;
    doc["warnings"] = report.warnings;
    return doc.dump(2) + "\n";
}

std::string series_csv(const ProbabilityTable& table) {
    std::string out = "q0,q1,q2,q3,q4,q5,q6,q7\n";
    const std::size_t jobs = table[0].size();
    for (std::size_t j = 0; j < jobs; ++j) {
        for (std::size_t q = 0; q < table.size(); ++q) {
            if (q) out += ',';
            out += records::format_double(table[q][j]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace qpuf::metrics
