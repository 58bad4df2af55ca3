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

#include "setr/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "setr/core/error.hpp"
#include "setr/core/vector_math.hpp"
#include "setr/util/parallel.hpp"

namespace setr::pipeline {

const char* scorer_fail_policy_name(ScorerFailPolicy policy) {
    switch (policy) {
        case ScorerFailPolicy::ScoreAsZero: return "score-as-zero";
        case ScorerFailPolicy::CoarseScaled: return "coarse-scaled";
        case ScorerFailPolicy::AbortQuery: return "abort-query";
    }
    return "unknown";
}

ScorerFailPolicy scorer_fail_policy_from_name(const std::string& name) {
    if (name == "score-as-zero") return ScorerFailPolicy::ScoreAsZero;
    if (name == "coarse-scaled") return ScorerFailPolicy::CoarseScaled;
    if (name == "abort-query") return ScorerFailPolicy::AbortQuery;
    throw_error(ErrorCode::InvalidConfig, "unknown scorer fail policy '" + name + "'");
}

void PipelineConfig::validate() const {
    if (coarse_k < 1) throw_error(ErrorCode::InvalidConfig, "coarse_k must be >= 1");
    if (rerank_m < 1) throw_error(ErrorCode::InvalidConfig, "rerank_m must be >= 1");
    if (rerank_m > coarse_k) {
        throw_error(ErrorCode::InvalidConfig, "rerank_m (" + std::to_string(rerank_m) +
                                                  ") must not exceed coarse_k (" +
                                                  std::to_string(coarse_k) + ")");
    }
    if (alpha < 0.0 || beta < 0.0) throw_error(ErrorCode::InvalidConfig, "alpha/beta must be >= 0");
    if (captions_n < 1) throw_error(ErrorCode::InvalidConfig, "captions_n must be >= 1");
    if (prompt_mode == PromptMode::RelevanceJudgment) {
        throw_error(ErrorCode::InvalidConfig, "relevance-judgment is not a pseudo-target mode");
    }
    if (scoring_jobs < 1) throw_error(ErrorCode::InvalidConfig, "scoring_jobs must be >= 1");
    if (search_shards < 0) throw_error(ErrorCode::InvalidConfig, "search_shards must be >= 0");
}

nlohmann::json PipelineConfig::to_json() const {
    return nlohmann::json{{"coarse_k", coarse_k},
                          {"rerank_m", rerank_m},
                          {"alpha", alpha},
                          {"beta", beta},
                          {"prompt_mode", prompt_mode_name(prompt_mode)},
                          {"captions_n", captions_n},
                          {"normalize_coarse_scores", normalize_coarse_scores},
                          {"rerank_enabled", rerank_enabled},
                          {"llm_rewrite", llm_rewrite},
                          {"union_via_llm", union_via_llm},
                          {"single_consolidated_rewrite", single_consolidated_rewrite},
                          {"scorer_fail_policy", scorer_fail_policy_name(scorer_fail_policy)},
                          {"caption_prompt", caption_prompt},
                          {"search_shards", search_shards},
                          {"scoring_jobs", scoring_jobs}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig c;
    if (j.contains("coarse_k")) c.coarse_k = j["coarse_k"].get<int>();
    if (j.contains("rerank_m")) c.rerank_m = j["rerank_m"].get<int>();
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("beta")) c.beta = j["beta"].get<double>();
    if (j.contains("prompt_mode")) c.prompt_mode = prompt_mode_from_name(j["prompt_mode"].get<std::string>());
    if (j.contains("captions_n")) c.captions_n = j["captions_n"].get<int>();
    if (j.contains("normalize_coarse_scores")) c.normalize_coarse_scores = j["normalize_coarse_scores"].get<bool>();
    if (j.contains("rerank_enabled")) c.rerank_enabled = j["rerank_enabled"].get<bool>();
    if (j.contains("llm_rewrite")) c.llm_rewrite = j["llm_rewrite"].get<bool>();
    if (j.contains("union_via_llm")) c.union_via_llm = j["union_via_llm"].get<bool>();
    if (j.contains("single_consolidated_rewrite")) c.single_consolidated_rewrite = j["single_consolidated_rewrite"].get<bool>();
    if (j.contains("scorer_fail_policy")) c.scorer_fail_policy = scorer_fail_policy_from_name(j["scorer_fail_policy"].get<std::string>());
    if (j.contains("caption_prompt")) c.caption_prompt = j["caption_prompt"].get<std::string>();
    if (j.contains("search_shards")) c.search_shards = j["search_shards"].get<int>();
    if (j.contains("scoring_jobs")) c.scoring_jobs = j["scoring_jobs"].get<int>();
    return c;
}

RankedList fuse(const RankedList& ranked, const std::map<std::string, double>& scores,
                const PipelineConfig& config) {
    const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(config.rerank_m),
                                                ranked.candidates.size());

    for (std::size_t i = 0; i < m; ++i) {
        if (scores.find(ranked.candidates[i].image_id) == scores.end()) {
            throw_error(ErrorCode::MissingScore,
                        "no relevance score for top-m candidate '" + ranked.candidates[i].image_id + "'");
        }
    }
    if (scores.size() != m) {
        for (const auto& [id, p] : scores) {
            bool in_top = false;
            for (std::size_t i = 0; i < m; ++i) {
                if (ranked.candidates[i].image_id == id) { in_top = true; break; }
            }
            if (!in_top) {
                throw_error(ErrorCode::ExtraneousScore,
                            "relevance score for '" + id + "' outside the top-m candidates");
            }
        }
    }

    // Optional min-max normalization of S_c over the coarse list. Monotone,
    // so the beta=0 ordering and the tail order are unchanged.
    std::vector<double> base(ranked.candidates.size());
    if (config.normalize_coarse_scores && !ranked.candidates.empty()) {
        double lo = ranked.candidates.front().coarse_score;
        double hi = lo;
        for (const auto& c : ranked.candidates) {
            lo = std::min(lo, c.coarse_score);
            hi = std::max(hi, c.coarse_score);
        }
        for (std::size_t i = 0; i < ranked.candidates.size(); ++i) {
            base[i] = hi > lo ? (ranked.candidates[i].coarse_score - lo) / (hi - lo) : 0.5;
        }
    } else {
        for (std::size_t i = 0; i < ranked.candidates.size(); ++i) {
            base[i] = ranked.candidates[i].coarse_score;
        }
    }

    RankedList out;
    out.query_id = ranked.query_id;
    out.candidates = ranked.candidates;
    for (std::size_t i = 0; i < out.candidates.size(); ++i) {
        auto& c = out.candidates[i];
        if (i < m) {
            double s_r = scores.at(c.image_id);
            c.relevance_score = s_r;
            c.fused_score = config.alpha * base[i] + config.beta * s_r;
        } else {
            c.relevance_score.reset();
            c.fused_score = base[i];
        }
    }
    sort_candidates(out.candidates);
    return out;
}

Pipeline::Pipeline(clients::ClientSet clients, const prompts::TemplateSet* templates,
                   PipelineConfig config)
    : clients_(std::move(clients)), templates_(templates), config_(std::move(config)) {
    config_.validate();
}

PseudoTarget Pipeline::build_pseudo_targets(const CompositeQuery& query) const {
    PipelineResult::Calls calls;
    return build_pseudo_targets_impl(query, calls);
}

PseudoTarget Pipeline::build_pseudo_targets_impl(const CompositeQuery& query,
                                                 PipelineResult::Calls& calls) const {
    validate_query(query);

    std::vector<std::string> captions;
    if (!query.reference_captions.empty()) {
        std::size_t take = std::min<std::size_t>(query.reference_captions.size(),
                                                 static_cast<std::size_t>(config_.captions_n));
        captions.assign(query.reference_captions.begin(), query.reference_captions.begin() + take);
    } else {
        captions = clients_.captioner->caption(query.reference_image_id, config_.caption_prompt,
                                               config_.captions_n);
        ++calls.caption;
    }
    for (const auto& c : captions) {
        if (trim(c).empty()) throw_error(ErrorCode::EmptyCompletion, "blank reference caption");
    }

    PseudoTarget pt;
    pt.query_id = query.query_id;
    pt.mode = config_.prompt_mode;

    if (!config_.llm_rewrite) {
        pt.descriptions = captions;  // pass-through
        return pt;
    }

    const bool union_compose = config_.prompt_mode == PromptMode::Union && !config_.union_via_llm;

    if (config_.single_consolidated_rewrite) {
        std::string joined;
        for (const auto& c : captions) {
            if (!joined.empty()) joined.push_back(' ');
            joined.append(c);
        }
        captions.assign(1, joined);
    }

    pt.descriptions.reserve(captions.size());
    for (const auto& caption : captions) {
        std::string rendered = templates_->render_pseudo_target_prompt(config_.prompt_mode, caption,
                                                                       query.relative_text);
        if (union_compose) {
            // Union baseline: the caption+instruction composition itself is
            // the text query; no model call.
            pt.descriptions.push_back(trim(rendered));
            continue;
        }
        auto completions = clients_.captioner->caption(query.reference_image_id, rendered, 1);
        ++calls.caption;
        if (completions.empty() || trim(completions.front()).empty()) {
            throw_error(ErrorCode::EmptyCompletion,
                        "empty pseudo-target description for query " + query.query_id);
        }
        pt.descriptions.push_back(trim(completions.front()));
    }
    return pt;
}

RankedList Pipeline::coarse_retrieve(const PseudoTarget& pt, const GalleryIndex& index) const {
    if (pt.descriptions.empty()) {
        throw_error(ErrorCode::EmptyCompletion, "pseudo-target has no descriptions");
    }
    auto vectors = clients_.embedder->embed_text(pt.descriptions);
    EmbeddingVector q = ensemble_embed(vectors);

    SearchOptions options;
    options.num_shards = static_cast<std::size_t>(config_.search_shards);
    auto candidates = search_topk(index, q, static_cast<std::size_t>(config_.coarse_k), options);

    RankedList list;
    list.query_id = pt.query_id;
    list.candidates = std::move(candidates);
    return list;
}

void Pipeline::score_candidates(const RankedList& ranked, const CompositeQuery& query,
                                std::map<std::string, double>& scores, PipelineResult::Calls& calls,
                                std::vector<std::string>& incidents) const {
    const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(config_.rerank_m),
                                                ranked.candidates.size());
    std::string reference_caption =
        query.reference_captions.empty() ? std::string() : query.reference_captions.front();

    std::vector<double> per_slot(m, 0.0);
    std::vector<std::string> slot_incident(m);

    util::parallel_for(m, std::min<std::size_t>(m, static_cast<std::size_t>(config_.scoring_jobs)),
                       [&](std::size_t i) {
        const auto& candidate = ranked.candidates[i];
        std::string prompt = templates_->render_relevance_prompt(query.relative_text, reference_caption,
                                                                 candidate.image_id);
        std::vector<std::string> image_refs;
        if (!query.reference_image_id.empty()) image_refs.push_back(query.reference_image_id);
        image_refs.push_back(candidate.image_id);

        try {
            per_slot[i] = clients_.scorer->score_yes_probability(prompt, image_refs);
        } catch (const Error& e) {
            if (config_.scorer_fail_policy == ScorerFailPolicy::AbortQuery) throw;
            double fallback = 0.0;
            if (config_.scorer_fail_policy == ScorerFailPolicy::CoarseScaled) {
                fallback = std::clamp((candidate.coarse_score + 1.0) / 2.0, 0.0, 1.0);
            }
            per_slot[i] = fallback;
            slot_incident[i] = "scorer failed for '" + candidate.image_id + "' (" + e.what() +
                               "), used " + scorer_fail_policy_name(config_.scorer_fail_policy);
        }
    });
    calls.score += static_cast<int>(m);

    for (std::size_t i = 0; i < m; ++i) {
        scores[ranked.candidates[i].image_id] = per_slot[i];
        if (!slot_incident[i].empty()) incidents.push_back(slot_incident[i]);
    }
}

RankedList Pipeline::rerank(const RankedList& ranked, const CompositeQuery& query) const {
    std::map<std::string, double> scores;
    PipelineResult::Calls calls;
    std::vector<std::string> incidents;
    score_candidates(ranked, query, scores, calls, incidents);
    return fuse(ranked, scores, config_);
}

PipelineResult Pipeline::run(const CompositeQuery& query, const GalleryIndex& index) const {
    auto start = std::chrono::steady_clock::now();

    PipelineResult result;
    result.pseudo_target = build_pseudo_targets_impl(query, result.calls);

    auto vectors = clients_.embedder->embed_text(result.pseudo_target.descriptions);
    ++result.calls.embed_text;
    result.query_embedding = ensemble_embed(vectors);

    SearchOptions options;
    options.num_shards = static_cast<std::size_t>(config_.search_shards);
    result.coarse_list.query_id = query.query_id;
    result.coarse_list.candidates =
        search_topk(index, result.query_embedding, static_cast<std::size_t>(config_.coarse_k), options);

    if (config_.rerank_enabled) {
        score_candidates(result.coarse_list, query, result.relevance_scores, result.calls,
                         result.incidents);
        result.final_list = fuse(result.coarse_list, result.relevance_scores, config_);
    } else {
        result.final_list = result.coarse_list;
    }

    result.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
}

RankedList run_pipeline(const CompositeQuery& query, const GalleryIndex& index,
                        const PipelineConfig& config, const clients::ClientSet& clients,
                        const prompts::TemplateSet& templates) {
    Pipeline p(clients, &templates, config);
    return p.run(query, index).final_list;
}

nlohmann::json query_report_json(const CompositeQuery& query, const PipelineResult& result,
                                 const PipelineConfig& config, bool include_timing) {
    nlohmann::json coarse = nlohmann::json::array();
    for (const auto& c : result.coarse_list.candidates) {
        coarse.push_back({{"image_id", c.image_id},
                          {"coarse_score", c.coarse_score},
                          {"coarse_rank", c.coarse_rank}});
    }

    nlohmann::json final_list = nlohmann::json::array();
    for (const auto& c : result.final_list.candidates) {
        nlohmann::json item{{"image_id", c.image_id},
                            {"coarse_score", c.coarse_score},
                            {"coarse_rank", c.coarse_rank},
                            {"fused_score", c.fused_score}};
        if (c.relevance_score) item["relevance_score"] = *c.relevance_score;
        final_list.push_back(std::move(item));
    }

    nlohmann::json report{{"query_id", query.query_id},
                          {"mode", prompt_mode_name(config.prompt_mode)},
                          {"config", config.to_json()},
                          {"pseudo_target", result.pseudo_target.descriptions},
                          {"coarse", std::move(coarse)},
                          {"relevance_scores", result.relevance_scores},
                          {"final", std::move(final_list)},
                          {"client_calls",
                           {{"embed_text", result.calls.embed_text},
                            {"embed_image", result.calls.embed_image},
                            {"caption", result.calls.caption},
                            {"score", result.calls.score}}},
                          {"incidents", result.incidents}};
    if (include_timing) report["timing_ms"] = result.elapsed_ms;
    return report;
}

}  // namespace setr::pipeline
