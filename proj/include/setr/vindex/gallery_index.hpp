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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "setr/core/types.hpp"

namespace setr {

// Immutable gallery embedding store. Rows are unit-normalized at build time
// and stored row-major as fp32.
class GalleryIndex {
public:
    GalleryIndex() = default;

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }

    std::span<const float> row(std::size_t r) const {
        return {data_.data() + r * dim_, dim_};
    }

    std::optional<std::size_t> find(const std::string& id) const {
        auto it = id_to_row_.find(id);
        if (it == id_to_row_.end()) return std::nullopt;
        return it->second;
    }

    const std::vector<float>& raw_data() const { return data_; }

private:
    friend GalleryIndex build_index(std::vector<std::pair<std::string, std::vector<float>>> items);
    friend GalleryIndex load_index(const std::filesystem::path& path);

    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> data_;  // size() * dim_, row-major
    std::unordered_map<std::string, std::size_t> id_to_row_;
};

struct SearchOptions {
    // Number of contiguous row shards scanned in parallel. 0 picks a value
    // from the hardware; results are identical for every shard count.
    std::size_t num_shards = 1;
};

// Normalizes every vector and builds the id -> row map.
// Throws DuplicateId, DimensionMismatch, ZeroVector, NonFinite.
GalleryIndex build_index(std::vector<std::pair<std::string, std::vector<float>>> items);

// Exact top-k by cosine (dot of unit vectors). Candidates come back sorted by
// score descending with ties broken by ascending image_id; coarse_rank is
// 1-based and fused_score starts equal to coarse_score.
// Throws EmptyIndex, DimensionMismatch.
std::vector<ScoredCandidate> search_topk(const GalleryIndex& index, const EmbeddingVector& query,
                                         std::size_t k, const SearchOptions& options = {});

// Mean of the inputs, renormalized. Throws DimensionMismatch on ragged input
// and ZeroVector when the mean collapses (antipodal inputs).
EmbeddingVector ensemble_embed(std::span<const EmbeddingVector> vectors);

// Binary file format "SETRIDX1"; see docs/index_format.md. A save/load round
// trip is bit-exact over ids and fp32 payload.
void save_index(const GalleryIndex& index, const std::filesystem::path& path);
GalleryIndex load_index(const std::filesystem::path& path);

// Embedding manifest row for JSON-lines interop: {image_id, image_ref?, vector?}.
struct ManifestEntry {
    std::string image_id;
    std::optional<std::string> image_ref;
    std::optional<std::vector<float>> vector;
};

std::vector<ManifestEntry> load_embedding_manifest(const std::filesystem::path& path);

}  // namespace setr
