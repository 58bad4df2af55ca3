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

#include "setr/clients/mock_clients.hpp"

#include <cmath>

#include "setr/core/error.hpp"
#include "setr/core/vector_math.hpp"
#include "setr/util/bytes.hpp"
#include "setr/util/sha256.hpp"

namespace setr::clients {

namespace {

constexpr char kSep = '\x1f';

util::Sha256::Digest keyed_block(uint64_t seed, std::string_view role, std::string_view input,
                                 uint32_t block) {
    unsigned char seed_le[8];
    util::store_u64_le(seed, seed_le);
    unsigned char block_le[4];
    util::store_u32_le(block, block_le);

    util::Sha256 h;
    h.update(seed_le, 8);
    h.update(role);
    h.update(&kSep, 1);
    h.update(input);
    h.update(&kSep, 1);
    h.update(block_le, 4);
    return h.finish();
}

}  // namespace

EmbeddingVector mock_unit_vector(uint64_t seed, std::string_view role, std::string_view input,
                                 std::size_t dim) {
    std::string salted(input);
    for (;;) {
        std::vector<double> raw(dim);
        util::Sha256::Digest block{};
        std::size_t block_pos = 32;  // force a fetch on first use
        uint32_t block_index = 0;
        for (std::size_t i = 0; i < dim; ++i) {
            if (block_pos + 4 > 32) {
                block = keyed_block(seed, role, salted, block_index++);
                block_pos = 0;
            }
            uint32_t w = util::load_u32_le(block.data() + block_pos);
            block_pos += 4;
            raw[i] = static_cast<double>(w >> 8) * 0x1.0p-23 - 1.0;
        }
        double sumsq = 0.0;
        for (double x : raw) sumsq += x * x;
        if (sumsq > kZeroNormThreshold * kZeroNormThreshold) {
            return normalize(std::span<const double>{raw.data(), raw.size()});
        }
        salted.push_back('\0');  // all-but-impossible degenerate draw
    }
}

MockEmbedder::MockEmbedder(std::size_t dim, uint64_t seed, std::shared_ptr<CallCounters> counters)
    : dim_(dim), seed_(seed), counters_(std::move(counters)) {}

void MockEmbedder::set_text_fixture(const std::string& text, std::vector<float> vector) {
    text_fixtures_[text] = normalize(std::span<const float>{vector.data(), vector.size()});
}

void MockEmbedder::set_image_fixture(const std::string& image_ref, std::vector<float> vector) {
    image_fixtures_[image_ref] = normalize(std::span<const float>{vector.data(), vector.size()});
}

std::vector<EmbeddingVector> MockEmbedder::embed(std::span<const std::string> inputs,
                                                 std::string_view role,
                                                 const std::map<std::string, EmbeddingVector>& fixtures) {
    std::vector<EmbeddingVector> out;
    out.reserve(inputs.size());
    for (const auto& input : inputs) {
        auto it = fixtures.find(input);
        if (it != fixtures.end()) {
            out.push_back(it->second);
            continue;
        }
        if (fixture_only_) {
            throw_error(ErrorCode::EndpointUnavailable,
                        "mock embedder has no fixture for '" + input + "'");
        }
        out.push_back(mock_unit_vector(seed_, role, input, dim_));
    }
    return out;
}

std::vector<EmbeddingVector> MockEmbedder::embed_text(std::span<const std::string> texts) {
    for (const auto& t : texts) {
        if (t.empty()) throw_error(ErrorCode::InvalidConfig, "embed_text input is empty");
    }
    if (counters_) counters_->embed_text.fetch_add(1);
    return embed(texts, "embed-text", text_fixtures_);
}

std::vector<EmbeddingVector> MockEmbedder::embed_image(std::span<const std::string> image_refs) {
    if (counters_) counters_->embed_image.fetch_add(1);
    return embed(image_refs, "embed-image", image_fixtures_);
}

MockCaptioner::MockCaptioner(uint64_t seed, std::shared_ptr<CallCounters> counters)
    : seed_(seed), counters_(std::move(counters)) {}

std::vector<std::string> MockCaptioner::caption(const std::string& image_ref,
                                                const std::string& prompt, int n) {
    if (n < 1) throw_error(ErrorCode::InvalidConfig, "caption count must be >= 1");
    if (counters_) counters_->caption.fetch_add(1);

    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        auto block = keyed_block(seed_, "caption", image_ref + std::string(1, kSep) + prompt,
                                 static_cast<uint32_t>(k));
        std::string token = util::to_hex(block.data(), 4);
        out.push_back("mock caption " + std::to_string(k) + " [" + token + "] of " + image_ref);
    }
    return out;
}

MockRelevanceScorer::MockRelevanceScorer(uint64_t seed, std::shared_ptr<CallCounters> counters)
    : seed_(seed), counters_(std::move(counters)) {}

void MockRelevanceScorer::set_candidate_fixture(const std::string& candidate_ref, double p) {
    candidate_fixtures_[candidate_ref] = p;
}

double MockRelevanceScorer::score_yes_probability(const std::string& prompt,
                                                  std::span<const std::string> image_refs) {
    if (counters_) counters_->score.fetch_add(1);
    if (fixture_fn_) {
        auto hit = fixture_fn_(prompt, image_refs);
        if (hit) return *hit;
    }
    if (!image_refs.empty()) {
        auto it = candidate_fixtures_.find(image_refs.back());
        if (it != candidate_fixtures_.end()) return it->second;
    }
    std::string joined = prompt;
    for (const auto& ref : image_refs) {
        joined.push_back(kSep);
        joined.append(ref);
    }
    auto block = keyed_block(seed_, "score", joined, 0);
    uint32_t w = util::load_u32_le(block.data());
    return static_cast<double>(w) / 4294967295.0;
}

}  // namespace setr::clients
