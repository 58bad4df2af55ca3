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

#include <span>

#include "setr/core/types.hpp"

namespace setr {

inline constexpr double kZeroNormThreshold = 1e-12;
inline constexpr double kScoreSlack = 1e-6;

// Scales v to unit L2 norm. Throws NonFinite on NaN/Inf components and
// ZeroVector when the norm is <= 1e-12. The norm is computed in fp64.
EmbeddingVector normalize(std::span<const float> v);
EmbeddingVector normalize(std::span<const double> v);
inline EmbeddingVector normalize(const EmbeddingVector& v) { return normalize(v.span()); }

// Inner product in the fixed kernel accumulation order (see kernels.hpp).
// Throws DimensionMismatch when dims differ.
double dot(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace setr
