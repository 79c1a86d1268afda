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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qpuf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Qubit count or register size outside what the engine supports.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Bad argument: index out of range, equal control/target, zero shots.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Structurally invalid input object (incomplete Kraus set, malformed circuit).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Profile document does not match the schema. `field()` names the offender.
class SchemaError : public Error {
public:
    SchemaError(std::string field, const std::string& what)
        : Error("profile schema error at '" + field + "': " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Duplicate key on an append-only store.
class ConflictError : public Error {
public:
    using Error::Error;
};

/// Malformed record line. Line numbers are 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class NotEnrolledError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace qpuf
