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

#include "setr/core/vector_math.hpp"

#include <cmath>

#include "setr/core/error.hpp"
#include "setr/core/kernels.hpp"

namespace setr {

namespace {

template <typename T>
EmbeddingVector normalize_impl(std::span<const T> v) {
    if (v.empty()) throw_error(ErrorCode::ZeroVector, "cannot normalize an empty vector");
    double sumsq = 0.0;
    for (const T x : v) {
        if (!std::isfinite(static_cast<double>(x))) {
            throw_error(ErrorCode::NonFinite, "vector has a NaN/Inf component");
        }
        double d = static_cast<double>(x);
        sumsq += d * d;
    }
    double norm = std::sqrt(sumsq);
    if (norm <= kZeroNormThreshold) {
        throw_error(ErrorCode::ZeroVector, "vector norm below 1e-12");
    }
    EmbeddingVector out;
    out.values.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.values[i] = static_cast<float>(static_cast<double>(v[i]) / norm);
    }
    return out;
}

}  // namespace

EmbeddingVector normalize(std::span<const float> v) { return normalize_impl(v); }
EmbeddingVector normalize(std::span<const double> v) { return normalize_impl(v); }

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw_error(ErrorCode::DimensionMismatch,
                    "dot over dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
    }
    return kernels::dot_f32(a.values.data(), b.values.data(), a.dim());
}

}  // namespace setr
