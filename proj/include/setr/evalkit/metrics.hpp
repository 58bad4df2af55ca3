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

#include "setr/core/types.hpp"

namespace setr::evalkit {

// 1 iff any target id appears in the first min(k, length) entries.
int recall_at_k(const RankedList& ranked, const GroundTruth& gt, int k);

// Restricts the ranking to the 6 subset members (preserving relative order),
// then applies recall_at_k. Throws MissingSubset when gt has no subset and
// SubsetMemberUnscored when a member is absent from the ranking.
int recall_subset_at_k(const RankedList& ranked, const GroundTruth& gt, int k);

// AP@k = (1 / min(|targets|, k)) * sum_i Precision@i * rel(i).
double map_at_k(const RankedList& ranked, const GroundTruth& gt, int k);

}  // namespace setr::evalkit
