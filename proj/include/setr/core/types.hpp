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

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace setr {

// Unit-norm embedding. Components are stored as 32-bit floats; all score
// arithmetic accumulates in 64-bit (see kernels.hpp).
struct EmbeddingVector {
    std::vector<float> values;

    std::size_t dim() const { return values.size(); }
    std::span<const float> span() const { return {values.data(), values.size()}; }
};

struct CompositeQuery {
    std::string query_id;
    std::string reference_image_id;
    std::string relative_text;
    std::vector<std::string> reference_captions;
};

// Throws InvalidConfig if query_id is empty or relative_text is blank.
void validate_query(const CompositeQuery& query);

enum class PromptMode {
    Union,
    LlmGenerated,
    InstructedFiltered,
    Intersection,
    RelevanceJudgment,  // re-ranking prompt, not a pseudo-target mode
};

const char* prompt_mode_name(PromptMode mode);
PromptMode prompt_mode_from_name(const std::string& name);

struct PseudoTarget {
    std::string query_id;
    PromptMode mode = PromptMode::Intersection;
    std::vector<std::string> descriptions;
};

struct ScoredCandidate {
    std::string image_id;
    double coarse_score = 0.0;
    int coarse_rank = 0;
    std::optional<double> relevance_score;
    double fused_score = 0.0;
};

struct RankedList {
    std::string query_id;
    std::vector<ScoredCandidate> candidates;
};

// Total order on candidates: fused_score descending, then coarse_rank
// ascending, then image_id ascending. Ties never depend on input order.
bool candidate_order(const ScoredCandidate& a, const ScoredCandidate& b);

void sort_candidates(std::vector<ScoredCandidate>& candidates);

// Checks RankedList invariants (sorted, distinct ids); throws InvalidConfig.
void validate_ranked_list(const RankedList& list);

struct GroundTruth {
    std::string query_id;
    std::set<std::string> target_ids;
    std::optional<std::set<std::string>> subset_ids;  // exactly 6 when present
    std::optional<std::string> category;
};

void validate_ground_truth(const GroundTruth& gt);

std::string trim(const std::string& s);

}  // namespace setr
