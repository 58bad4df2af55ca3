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

#include "setr/core/error.hpp"

namespace setr {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::EmptyIndex: return "EmptyIndex";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
        case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
        case ErrorCode::MissingPlaceholderBinding: return "MissingPlaceholderBinding";
        case ErrorCode::UnknownMode: return "UnknownMode";
        case ErrorCode::EndpointUnavailable: return "EndpointUnavailable";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::MalformedResponse: return "MalformedResponse";
        case ErrorCode::EmptyCompletion: return "EmptyCompletion";
        case ErrorCode::UnparseableAnswer: return "UnparseableAnswer";
        case ErrorCode::MissingScore: return "MissingScore";
        case ErrorCode::ExtraneousScore: return "ExtraneousScore";
        case ErrorCode::ParseFailure: return "ParseFailure";
        case ErrorCode::DanglingTargetId: return "DanglingTargetId";
        case ErrorCode::MalformedSubset: return "MalformedSubset";
        case ErrorCode::MissingSubset: return "MissingSubset";
        case ErrorCode::SubsetMemberUnscored: return "SubsetMemberUnscored";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "UnknownError";
}

}  // namespace setr
