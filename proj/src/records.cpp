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

#include "qpuf/records.hpp"

#include <cstdio>

#include <json.hpp>

namespace qpuf::records {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void LineWriter::key(std::string_view k) {
    if (line_.size() > 1) line_ += ',';
    line_ += nlohmann::json(std::string(k)).dump();
    line_ += ':';
}

LineWriter& LineWriter::field(std::string_view k, std::string_view value) {
    key(k);
    line_ += nlohmann::json(std::string(value)).dump();
    return *this;
}

LineWriter& LineWriter::field(std::string_view k, double value) {
    key(k);
    line_ += format_double(value);
    return *this;
}

LineWriter& LineWriter::field(std::string_view k, std::int64_t value) {
    key(k);
    line_ += std::to_string(value);
    return *this;
}

LineWriter& LineWriter::field(std::string_view k, std::uint64_t value) {
    key(k);
    line_ += std::to_string(value);
    return *this;
}

LineWriter& LineWriter::field(std::string_view k, std::span<const double> values) {
    key(k);
    line_ += '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) line_ += ',';
        line_ += format_double(values[i]);
    }
    line_ += ']';
    return *this;
}

}  // namespace qpuf::records
