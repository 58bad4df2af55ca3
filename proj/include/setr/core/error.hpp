// Copyright 2026-present the setr project
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

#include <stdexcept>
#include <string>

namespace setr {

enum class ErrorCode {
    ZeroVector,
    NonFinite,
    DimensionMismatch,
    DuplicateId,
    EmptyIndex,
    IoFailure,
    FormatVersionMismatch,
    ChecksumMismatch,
    MissingPlaceholderBinding,
    UnknownMode,
    EndpointUnavailable,
    Timeout,
    MalformedResponse,
    EmptyCompletion,
    UnparseableAnswer,
    MissingScore,
    ExtraneousScore,
    ParseFailure,
    DanglingTargetId,
    MalformedSubset,
    MissingSubset,
    SubsetMemberUnscored,
    InvalidConfig,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace setr
