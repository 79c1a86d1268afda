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

// Line-delimited JSON records with a fixed field order. Doubles are written
// with 17 significant digits so they parse back to the same bits.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace qpuf::records {

class LineWriter {
public:
    LineWriter& field(std::string_view key, std::string_view value);
    LineWriter& field(std::string_view key, const char* value) { return field(key, std::string_view(value)); }
    LineWriter& field(std::string_view key, double value);
    LineWriter& field(std::string_view key, std::int64_t value);
    LineWriter& field(std::string_view key, int value) { return field(key, static_cast<std::int64_t>(value)); }
    LineWriter& field(std::string_view key, std::uint64_t value);
    LineWriter& field(std::string_view key, std::span<const double> values);

    /// The finished record, no trailing newline.
    std::string str() const { return line_ + "}"; }

private:
    void key(std::string_view k);
    std::string line_ = "{";
};

std::string format_double(double v);

}  // namespace qpuf::records
