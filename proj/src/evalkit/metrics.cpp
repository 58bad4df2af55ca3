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

#include "setr/evalkit/metrics.hpp"

#include <algorithm>

#include "setr/core/error.hpp"

namespace setr::evalkit {

namespace {

void require_k(int k) {
    if (k < 1) throw_error(ErrorCode::InvalidConfig, "k must be >= 1");
}

}  // namespace

int recall_at_k(const RankedList& ranked, const GroundTruth& gt, int k) {
    require_k(k);
    std::size_t limit = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.candidates.size());
    for (std::size_t i = 0; i < limit; ++i) {
        if (gt.target_ids.count(ranked.candidates[i].image_id) > 0) return 1;
    }
    return 0;
}

int recall_subset_at_k(const RankedList& ranked, const GroundTruth& gt, int k) {
    require_k(k);
    if (!gt.subset_ids) {
        throw_error(ErrorCode::MissingSubset, "query " + gt.query_id + " has no subset");
    }
    if (gt.subset_ids->size() != 6) {
        throw_error(ErrorCode::MalformedSubset,
                    "subset for " + gt.query_id + " has " + std::to_string(gt.subset_ids->size()) +
                        " members, expected 6");
    }

    RankedList restricted;
    restricted.query_id = ranked.query_id;
    for (const auto& c : ranked.candidates) {
        if (gt.subset_ids->count(c.image_id) > 0) restricted.candidates.push_back(c);
    }
    if (restricted.candidates.size() != gt.subset_ids->size()) {
        for (const auto& id : *gt.subset_ids) {
            bool found = std::any_of(restricted.candidates.begin(), restricted.candidates.end(),
                                     [&](const ScoredCandidate& c) { return c.image_id == id; });
            if (!found) {
                throw_error(ErrorCode::SubsetMemberUnscored,
                            "subset member '" + id + "' missing from the ranking of " + gt.query_id);
            }
        }
    }
    return recall_at_k(restricted, gt, k);
}

double map_at_k(const RankedList& ranked, const GroundTruth& gt, int k) {
    require_k(k);
    if (gt.target_ids.empty()) {
        throw_error(ErrorCode::InvalidConfig, "ground truth for " + gt.query_id + " has no targets");
    }
    std::size_t limit = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.candidates.size());
    double ap = 0.0;
    int hits = 0;
    for (std::size_t i = 0; i < limit; ++i) {
        if (gt.target_ids.count(ranked.candidates[i].image_id) > 0) {
            ++hits;
            ap += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    double denom = static_cast<double>(std::min<std::size_t>(gt.target_ids.size(),
                                                             static_cast<std::size_t>(k)));
    return ap / denom;
}

}  // namespace setr::evalkit
