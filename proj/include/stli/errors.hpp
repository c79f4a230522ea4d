// Copyright 2026 The stli Authors
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

#ifndef STLI_ERRORS_HPP
#define STLI_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace stli {

/// Coarse failure class; the CLI maps each class to an exit code.
enum class ErrorClass { Config, Data, Numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

#define STLI_DEFINE_ERROR(Name, Class)                                                    \
    class Name : public Error {                                                           \
    public:                                                                               \
        explicit Name(const std::string& what) : Error(ErrorClass::Class, #Name ": " + what) {} \
    };

// numerics
STLI_DEFINE_ERROR(NotPositiveDefinite, Numeric)
STLI_DEFINE_ERROR(NotSymmetric, Numeric)
STLI_DEFINE_ERROR(DimensionMismatch, Numeric)
// models
STLI_DEFINE_ERROR(NonPositiveVariance, Config)
STLI_DEFINE_ERROR(SizeExceedsDataset, Config)
STLI_DEFINE_ERROR(MissingColumn, Data)
STLI_DEFINE_ERROR(FileNotFound, Data)
// lsnr
STLI_DEFINE_ERROR(BatchTooSmall, Numeric)
STLI_DEFINE_ERROR(InsufficientBatch, Numeric)
STLI_DEFINE_ERROR(SingularCovariance, Numeric)
// samplers
STLI_DEFINE_ERROR(NonFiniteGradient, Numeric)
STLI_DEFINE_ERROR(DegenerateCovariance, Numeric)
STLI_DEFINE_ERROR(IllConditionedKernel, Numeric)
STLI_DEFINE_ERROR(EmptyShard, Config)
STLI_DEFINE_ERROR(SimulatorFailure, Data)
// io
STLI_DEFINE_ERROR(EmptyTrace, Data)
STLI_DEFINE_ERROR(InvalidArgument, Config)

#undef STLI_DEFINE_ERROR

class MalformedRow : public Error {
public:
    MalformedRow(std::size_t line, const std::string& what)
        : Error(ErrorClass::Data, "MalformedRow: line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Carries every violation found while validating a config, not just the first.
class ConfigInvalid : public Error {
public:
    explicit ConfigInvalid(std::vector<std::string> violations)
        : Error(ErrorClass::Config, join(violations)), violations_(std::move(violations)) {}
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "ConfigInvalid:";
        for (const auto& s : v) out += "\n  - " + s;
        return out;
    }
    std::vector<std::string> violations_;
};

}  // namespace stli

#endif  // STLI_ERRORS_HPP
