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

#include "setr/clients/cached_clients.hpp"

#include "setr/core/error.hpp"
#include "setr/util/jsonl.hpp"

namespace setr::clients {

namespace {

// Embeddings are cached as JSON float arrays. fp32 components widen to fp64
// exactly and nlohmann emits shortest-round-trip numbers, so the store/load
// cycle is bit-exact.
std::string encode_embedding(const EmbeddingVector& v) {
    nlohmann::json body;
    body["embedding"] = nlohmann::json::array();
    for (float x : v.values) body["embedding"].push_back(static_cast<double>(x));
    return body.dump();
}

EmbeddingVector decode_embedding(const std::string& bytes) {
    nlohmann::json body = util::parse_json(bytes, "cached embedding");
    EmbeddingVector v;
    for (const auto& x : body.at("embedding")) v.values.push_back(x.get<float>());
    return v;
}

}  // namespace

CachedEmbedder::CachedEmbedder(std::shared_ptr<Embedder> inner, std::shared_ptr<ResponseCache> cache,
                               std::string model_id)
    : inner_(std::move(inner)), cache_(std::move(cache)), model_id_(std::move(model_id)) {}

std::vector<EmbeddingVector> CachedEmbedder::embed(std::span<const std::string> inputs, bool text) {
    const char* role = text ? "embed-text" : "embed-image";

    std::vector<EmbeddingVector> out(inputs.size());
    std::vector<std::size_t> miss_positions;
    std::vector<std::string> miss_inputs;
    std::vector<CacheKey> keys(inputs.size());

    for (std::size_t i = 0; i < inputs.size(); ++i) {
        keys[i] = CacheKey::for_request(role, model_id_, nlohmann::json{{"input", inputs[i]}});
        if (auto hit = cache_->get(keys[i])) {
            out[i] = decode_embedding(*hit);
        } else {
            miss_positions.push_back(i);
            miss_inputs.push_back(inputs[i]);
        }
    }

    if (!miss_inputs.empty()) {
        auto fresh = text ? inner_->embed_text(miss_inputs) : inner_->embed_image(miss_inputs);
        if (fresh.size() != miss_inputs.size()) {
            throw_error(ErrorCode::MalformedResponse, "embedder returned wrong batch size");
        }
        for (std::size_t m = 0; m < miss_positions.size(); ++m) {
            std::size_t i = miss_positions[m];
            cache_->put(keys[i], encode_embedding(fresh[m]), role, model_id_);
            out[i] = std::move(fresh[m]);
        }
    }

    for (const auto& v : out) {
        if (v.dim() != out.front().dim()) {
            throw_error(ErrorCode::DimensionMismatch, "embedding batch has mixed dimensions");
        }
    }
    return out;
}

std::vector<EmbeddingVector> CachedEmbedder::embed_text(std::span<const std::string> texts) {
    return embed(texts, true);
}

std::vector<EmbeddingVector> CachedEmbedder::embed_image(std::span<const std::string> image_refs) {
    return embed(image_refs, false);
}

CachedCaptioner::CachedCaptioner(std::shared_ptr<Captioner> inner, std::shared_ptr<ResponseCache> cache,
                                 std::string model_id)
    : inner_(std::move(inner)), cache_(std::move(cache)), model_id_(std::move(model_id)) {}

std::vector<std::string> CachedCaptioner::caption(const std::string& image_ref,
                                                  const std::string& prompt, int n) {
    auto key = CacheKey::for_request(
        "caption", model_id_, nlohmann::json{{"image_ref", image_ref}, {"prompt", prompt}, {"n", n}});
    if (auto hit = cache_->get(key)) {
        nlohmann::json body = util::parse_json(*hit, "cached captions");
        std::vector<std::string> captions;
        for (const auto& c : body.at("captions")) captions.push_back(c.get<std::string>());
        return captions;
    }

    auto captions = inner_->caption(image_ref, prompt, n);
    nlohmann::json body;
    body["captions"] = captions;
    cache_->put(key, body.dump(), "caption", model_id_);
    return captions;
}

CachedRelevanceScorer::CachedRelevanceScorer(std::shared_ptr<RelevanceScorer> inner,
                                             std::shared_ptr<ResponseCache> cache, std::string model_id)
    : inner_(std::move(inner)), cache_(std::move(cache)), model_id_(std::move(model_id)) {}

double CachedRelevanceScorer::score_yes_probability(const std::string& prompt,
                                                    std::span<const std::string> image_refs) {
    nlohmann::json payload;
    payload["prompt"] = prompt;
    payload["image_refs"] = std::vector<std::string>(image_refs.begin(), image_refs.end());
    auto key = CacheKey::for_request("score", model_id_, payload);

    if (auto hit = cache_->get(key)) {
        nlohmann::json body = util::parse_json(*hit, "cached score");
        return body.at("p").get<double>();
    }

    double p = inner_->score_yes_probability(prompt, image_refs);
    cache_->put(key, nlohmann::json{{"p", p}}.dump(), "score", model_id_);
    return p;
}

ClientSet with_cache(ClientSet inner, std::shared_ptr<ResponseCache> cache,
                     const std::string& embedder_model, const std::string& captioner_model,
                     const std::string& scorer_model) {
    ClientSet wrapped;
    wrapped.embedder = std::make_shared<CachedEmbedder>(inner.embedder, cache, embedder_model);
    wrapped.captioner = std::make_shared<CachedCaptioner>(inner.captioner, cache, captioner_model);
    wrapped.scorer = std::make_shared<CachedRelevanceScorer>(inner.scorer, cache, scorer_model);
    return wrapped;
}

}  // namespace setr::clients
