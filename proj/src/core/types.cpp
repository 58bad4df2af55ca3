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

#include "setr/core/types.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "setr/core/error.hpp"

namespace setr {

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

void validate_query(const CompositeQuery& query) {
    if (query.query_id.empty()) throw_error(ErrorCode::InvalidConfig, "query_id is empty");
    if (trim(query.relative_text).empty()) {
        throw_error(ErrorCode::InvalidConfig, "relative_text is blank for query " + query.query_id);
    }
}

const char* prompt_mode_name(PromptMode mode) {
    switch (mode) {
        case PromptMode::Union: return "union";
        case PromptMode::LlmGenerated: return "llm-generated";
        case PromptMode::InstructedFiltered: return "instructed-filtered";
        case PromptMode::Intersection: return "intersection";
        case PromptMode::RelevanceJudgment: return "relevance-judgment";
    }
    return "unknown";
}

PromptMode prompt_mode_from_name(const std::string& name) {
    if (name == "union") return PromptMode::Union;
    if (name == "llm-generated") return PromptMode::LlmGenerated;
    if (name == "instructed-filtered") return PromptMode::InstructedFiltered;
    if (name == "intersection") return PromptMode::Intersection;
    if (name == "relevance-judgment") return PromptMode::RelevanceJudgment;
    throw_error(ErrorCode::UnknownMode, "no prompt mode named '" + name + "'");
}

bool candidate_order(const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.fused_score != b.fused_score) return a.fused_score > b.fused_score;
    if (a.coarse_rank != b.coarse_rank) return a.coarse_rank < b.coarse_rank;
    return a.image_id < b.image_id;
}

void sort_candidates(std::vector<ScoredCandidate>& candidates) {
    std::sort(candidates.begin(), candidates.end(), candidate_order);
}

void validate_ranked_list(const RankedList& list) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < list.candidates.size(); ++i) {
        const auto& c = list.candidates[i];
        if (!seen.insert(c.image_id).second) {
            throw_error(ErrorCode::DuplicateId,
                        "image_id '" + c.image_id + "' repeated in ranked list " + list.query_id);
        }
        if (i > 0 && candidate_order(c, list.candidates[i - 1])) {
            throw_error(ErrorCode::InvalidConfig,
                        "ranked list " + list.query_id + " out of order at position " + std::to_string(i));
        }
    }
}

void validate_ground_truth(const GroundTruth& gt) {
    if (gt.target_ids.empty()) {
        throw_error(ErrorCode::InvalidConfig, "ground truth for " + gt.query_id + " has no targets");
    }
    if (gt.subset_ids) {
        if (gt.subset_ids->size() != 6) {
            throw_error(ErrorCode::MalformedSubset,
                        "subset for " + gt.query_id + " has " + std::to_string(gt.subset_ids->size()) +
                            " members, expected 6");
        }
        bool intersects = std::any_of(gt.target_ids.begin(), gt.target_ids.end(),
                                      [&](const std::string& t) { return gt.subset_ids->count(t) > 0; });
        if (!intersects) {
            throw_error(ErrorCode::MalformedSubset,
                        "subset for " + gt.query_id + " does not contain any target");
        }
    }
}

}  // namespace setr
