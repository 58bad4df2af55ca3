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

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "setr/core/types.hpp"

namespace setr::clients {

struct ModelEndpointConfig {
    std::string base_url;
    std::string model_id;
    int timeout_ms = 30000;
    int max_parallel = 4;
    int max_retries = 2;
    int retry_backoff_ms = 100;
    std::string api_key_env;
};

// Throws InvalidConfig on non-positive timeout or max_parallel < 1.
void validate_endpoint_config(const ModelEndpointConfig& config);

// Counts actual backend invocations (mock or HTTP). Cache wrappers sit above
// these, so a warm cache shows zero increments here.
struct CallCounters {
    std::atomic<uint64_t> embed_text{0};
    std::atomic<uint64_t> embed_image{0};
    std::atomic<uint64_t> caption{0};
    std::atomic<uint64_t> score{0};

    uint64_t total() const {
        return embed_text.load() + embed_image.load() + caption.load() + score.load();
    }

    void reset() {
        embed_text = 0;
        embed_image = 0;
        caption = 0;
        score = 0;
    }
};

class Embedder {
public:
    virtual ~Embedder() = default;

    // One unit-norm vector per input, all the same dimension.
    // Throws EndpointUnavailable, Timeout, MalformedResponse, DimensionMismatch.
    virtual std::vector<EmbeddingVector> embed_text(std::span<const std::string> texts) = 0;
    virtual std::vector<EmbeddingVector> embed_image(std::span<const std::string> image_refs) = 0;
};

class Captioner {
public:
    virtual ~Captioner() = default;

    // Exactly n non-empty completions for (image_ref, prompt).
    // Throws EndpointUnavailable, Timeout, MalformedResponse, EmptyCompletion.
    virtual std::vector<std::string> caption(const std::string& image_ref, const std::string& prompt,
                                             int n) = 0;
};

class RelevanceScorer {
public:
    virtual ~RelevanceScorer() = default;

    // p(yes) in [0,1] from first-answer-token log-probabilities; prompt must
    // demand a one-token Yes/No answer.
    // Throws EndpointUnavailable, Timeout, UnparseableAnswer.
    virtual double score_yes_probability(const std::string& prompt,
                                         std::span<const std::string> image_refs) = 0;
};

struct ClientSet {
    std::shared_ptr<Embedder> embedder;
    std::shared_ptr<Captioner> captioner;
    std::shared_ptr<RelevanceScorer> scorer;
};

// Two-token softmax over the Yes/No first-token log-probabilities. A missing
// token counts as probability zero: only-yes gives 1.0, only-no gives 0.0.
// Equal log-probabilities give exactly 0.5.
double yes_probability_from_logprobs(std::optional<double> lp_yes, std::optional<double> lp_no);

}  // namespace setr::clients
