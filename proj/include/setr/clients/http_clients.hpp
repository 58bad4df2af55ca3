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
#include <optional>
#include <string>

#include <json.hpp>

#include "setr/clients/interfaces.hpp"
#include "setr/util/parallel.hpp"

namespace setr::clients {

// JSON-over-HTTP clients speaking the common embeddings / chat-completions
// shapes; request and response schemas are documented in docs/wire_protocol.md.
// Each client caps in-flight requests at config.max_parallel and retries
// EndpointUnavailable/Timeout up to config.max_retries times with linear
// backoff. Responses are validated strictly; anything off-schema raises
// MalformedResponse without a retry.

class HttpEndpoint {
public:
    explicit HttpEndpoint(ModelEndpointConfig config);
    ~HttpEndpoint();

    // POSTs body to path (relative to the base URL) and returns parsed JSON.
    nlohmann::json post_json(const std::string& path, const nlohmann::json& body);

    const ModelEndpointConfig& config() const { return config_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    ModelEndpointConfig config_;
    util::Semaphore semaphore_;
};

class HttpEmbedder : public Embedder {
public:
    HttpEmbedder(ModelEndpointConfig config, std::shared_ptr<CallCounters> counters = nullptr);

    std::vector<EmbeddingVector> embed_text(std::span<const std::string> texts) override;
    std::vector<EmbeddingVector> embed_image(std::span<const std::string> image_refs) override;

private:
    std::vector<EmbeddingVector> parse_embeddings(const nlohmann::json& response, std::size_t expected);

    HttpEndpoint endpoint_;
    std::shared_ptr<CallCounters> counters_;
};

class HttpCaptioner : public Captioner {
public:
    HttpCaptioner(ModelEndpointConfig config, std::shared_ptr<CallCounters> counters = nullptr);

    std::vector<std::string> caption(const std::string& image_ref, const std::string& prompt,
                                     int n) override;

private:
    HttpEndpoint endpoint_;
    std::shared_ptr<CallCounters> counters_;
};

class HttpRelevanceScorer : public RelevanceScorer {
public:
    HttpRelevanceScorer(ModelEndpointConfig config, std::shared_ptr<CallCounters> counters = nullptr);

    double score_yes_probability(const std::string& prompt,
                                 std::span<const std::string> image_refs) override;

private:
    HttpEndpoint endpoint_;
    std::shared_ptr<CallCounters> counters_;
};

// Resolves an image reference for a JSON image part: URLs and data URIs pass
// through; an existing local file is inlined as a base64 data URI; anything
// else raises EndpointUnavailable naming the ref.
std::string resolve_image_ref(const std::string& image_ref);

// Extracts p(yes) from a chat-completions choice: first-token top_logprobs
// when present (two-token softmax over Yes/No, case-insensitive, leading
// space accepted), else the plain-text answer. Throws UnparseableAnswer.
double yes_probability_from_choice(const nlohmann::json& choice);

}  // namespace setr::clients
