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

#include <map>
#include <string>

#include <json.hpp>

#include "setr/clients/interfaces.hpp"
#include "setr/prompts/templates.hpp"
#include "setr/vindex/gallery_index.hpp"

namespace setr::pipeline {

enum class ScorerFailPolicy { ScoreAsZero, CoarseScaled, AbortQuery };

const char* scorer_fail_policy_name(ScorerFailPolicy policy);
ScorerFailPolicy scorer_fail_policy_from_name(const std::string& name);

struct PipelineConfig {
    int coarse_k = 50;    // stage-1 candidate set size
    int rerank_m = 10;    // candidates sent to the relevance scorer
    double alpha = 1.0;   // weight on the coarse cosine score
    double beta = 1.0;    // weight on the relevance score
    PromptMode prompt_mode = PromptMode::Intersection;
    int captions_n = 15;  // reference captions per query
    bool normalize_coarse_scores = false;  // min-max S_c over the coarse list before fusion
    bool rerank_enabled = true;
    bool llm_rewrite = true;        // rewrite each caption into a pseudo-target description
    bool union_via_llm = false;     // route Union-mode compositions through the captioner
    bool single_consolidated_rewrite = false;  // one rewrite over all captions instead of one each
    ScorerFailPolicy scorer_fail_policy = ScorerFailPolicy::ScoreAsZero;
    std::string caption_prompt = "Describe the image in one short sentence.";
    int search_shards = 1;   // parallel scan shards inside search_topk
    int scoring_jobs = 8;    // fan-out cap for per-candidate scoring calls

    // Throws InvalidConfig; notably rerank_m must not exceed coarse_k.
    void validate() const;

    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
};

// Late fusion: candidates at coarse ranks 1..m get alpha*S_c + beta*S_r,
// the tail keeps S_c, and the whole list is re-sorted under the candidate
// total order. scores must cover exactly the first min(rerank_m, size)
// candidates (MissingScore / ExtraneousScore otherwise).
RankedList fuse(const RankedList& ranked, const std::map<std::string, double>& scores,
                const PipelineConfig& config);

struct PipelineResult {
    RankedList final_list;
    RankedList coarse_list;
    EmbeddingVector query_embedding;
    PseudoTarget pseudo_target;
    std::map<std::string, double> relevance_scores;
    struct Calls {
        int embed_text = 0;
        int embed_image = 0;
        int caption = 0;
        int score = 0;
    } calls;
    std::vector<std::string> incidents;  // per-candidate scorer failures etc.
    double elapsed_ms = 0.0;
};

class Pipeline {
public:
    Pipeline(clients::ClientSet clients, const prompts::TemplateSet* templates, PipelineConfig config);

    const PipelineConfig& config() const { return config_; }

    // Stage 0: reference captions -> pseudo-target descriptions.
    PseudoTarget build_pseudo_targets(const CompositeQuery& query) const;

    // Stage 1: embed descriptions, ensemble, exact top-K scan.
    RankedList coarse_retrieve(const PseudoTarget& pt, const GalleryIndex& index) const;

    // Stage 2: score the top-m candidates and fuse.
    RankedList rerank(const RankedList& ranked, const CompositeQuery& query) const;

    // Full two-stage run; equals rerank(coarse_retrieve(build_pseudo_targets(q))).
    PipelineResult run(const CompositeQuery& query, const GalleryIndex& index) const;

private:
    PseudoTarget build_pseudo_targets_impl(const CompositeQuery& query,
                                           PipelineResult::Calls& calls) const;
    void score_candidates(const RankedList& ranked, const CompositeQuery& query,
                          std::map<std::string, double>& scores, PipelineResult::Calls& calls,
                          std::vector<std::string>& incidents) const;

    clients::ClientSet clients_;
    const prompts::TemplateSet* templates_;
    PipelineConfig config_;
};

// Spec-level convenience: the final ranked list only.
RankedList run_pipeline(const CompositeQuery& query, const GalleryIndex& index,
                        const PipelineConfig& config, const clients::ClientSet& clients,
                        const prompts::TemplateSet& templates);

// Per-query run report; "timing_ms" appears only when include_timing is set so
// that seeded runs stay byte-identical.
nlohmann::json query_report_json(const CompositeQuery& query, const PipelineResult& result,
                                 const PipelineConfig& config, bool include_timing);

}  // namespace setr::pipeline
