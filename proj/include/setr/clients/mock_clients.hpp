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

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>

#include "setr/clients/interfaces.hpp"

namespace setr::clients {

// Deterministic unit vector from a keyed hash of the input string. Stable
// across platforms; the byte-level construction is:
//   block_j = SHA256( LE64(seed) || role || 0x1F || input || 0x1F || LE32(j) )
//   stream  = block_0 || block_1 || ...
//   component_i = (LE_u32(stream[4i..4i+4)) >> 8) * 2^-23 - 1.0   in [-1, 1)
// then the vector is L2-normalized. Any reimplementation that follows this
// recipe reproduces the exact floats.
EmbeddingVector mock_unit_vector(uint64_t seed, std::string_view role, std::string_view input,
                                 std::size_t dim);

class MockEmbedder : public Embedder {
public:
    MockEmbedder(std::size_t dim, uint64_t seed, std::shared_ptr<CallCounters> counters = nullptr);

    std::vector<EmbeddingVector> embed_text(std::span<const std::string> texts) override;
    std::vector<EmbeddingVector> embed_image(std::span<const std::string> image_refs) override;

    // Fixture entries take precedence over the hash construction. Vectors are
    // normalized on insertion, matching the "unit on receipt" contract.
    void set_text_fixture(const std::string& text, std::vector<float> vector);
    void set_image_fixture(const std::string& image_ref, std::vector<float> vector);

    // When set, inputs without a fixture entry raise EndpointUnavailable
    // naming the offending input instead of falling back to the hash.
    void set_fixture_only(bool on) { fixture_only_ = on; }

private:
    std::vector<EmbeddingVector> embed(std::span<const std::string> inputs, std::string_view role,
                                       const std::map<std::string, EmbeddingVector>& fixtures);

    std::size_t dim_;
    uint64_t seed_;
    bool fixture_only_ = false;
    std::map<std::string, EmbeddingVector> text_fixtures_;
    std::map<std::string, EmbeddingVector> image_fixtures_;
    std::shared_ptr<CallCounters> counters_;
};

class MockCaptioner : public Captioner {
public:
    explicit MockCaptioner(uint64_t seed, std::shared_ptr<CallCounters> counters = nullptr);

    std::vector<std::string> caption(const std::string& image_ref, const std::string& prompt,
                                     int n) override;

private:
    uint64_t seed_;
    std::shared_ptr<CallCounters> counters_;
};

class MockRelevanceScorer : public RelevanceScorer {
public:
    using FixtureFn =
        std::function<std::optional<double>(const std::string& prompt,
                                            std::span<const std::string> image_refs)>;

    explicit MockRelevanceScorer(uint64_t seed, std::shared_ptr<CallCounters> counters = nullptr);

    double score_yes_probability(const std::string& prompt,
                                 std::span<const std::string> image_refs) override;

    // Consulted first; a nullopt falls through to the next rule.
    void set_fixture_fn(FixtureFn fn) { fixture_fn_ = std::move(fn); }

    // Keyed by the candidate ref (last element of image_refs).
    void set_candidate_fixture(const std::string& candidate_ref, double p);

private:
    uint64_t seed_;
    FixtureFn fixture_fn_;
    std::map<std::string, double> candidate_fixtures_;
    std::shared_ptr<CallCounters> counters_;
};

}  // namespace setr::clients
