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

#include <memory>
#include <string>

#include "setr/clients/cache.hpp"
#include "setr/clients/interfaces.hpp"

namespace setr::clients {

// Content-addressed read-through caches. Responses are stored only after the
// inner client validated them, so retries never persist garbage; warm runs
// reach the inner client zero times.

class CachedEmbedder : public Embedder {
public:
    CachedEmbedder(std::shared_ptr<Embedder> inner, std::shared_ptr<ResponseCache> cache,
                   std::string model_id);

    std::vector<EmbeddingVector> embed_text(std::span<const std::string> texts) override;
    std::vector<EmbeddingVector> embed_image(std::span<const std::string> image_refs) override;

private:
    std::vector<EmbeddingVector> embed(std::span<const std::string> inputs, bool text);

    std::shared_ptr<Embedder> inner_;
    std::shared_ptr<ResponseCache> cache_;
    std::string model_id_;
};

class CachedCaptioner : public Captioner {
public:
    CachedCaptioner(std::shared_ptr<Captioner> inner, std::shared_ptr<ResponseCache> cache,
                    std::string model_id);

    std::vector<std::string> caption(const std::string& image_ref, const std::string& prompt,
                                     int n) override;

private:
    std::shared_ptr<Captioner> inner_;
    std::shared_ptr<ResponseCache> cache_;
    std::string model_id_;
};

class CachedRelevanceScorer : public RelevanceScorer {
public:
    CachedRelevanceScorer(std::shared_ptr<RelevanceScorer> inner, std::shared_ptr<ResponseCache> cache,
                          std::string model_id);

    double score_yes_probability(const std::string& prompt,
                                 std::span<const std::string> image_refs) override;

private:
    std::shared_ptr<RelevanceScorer> inner_;
    std::shared_ptr<ResponseCache> cache_;
    std::string model_id_;
};

// Wraps every member of the set when a cache is configured.
ClientSet with_cache(ClientSet inner, std::shared_ptr<ResponseCache> cache,
                     const std::string& embedder_model, const std::string& captioner_model,
                     const std::string& scorer_model);

}  // namespace setr::clients
