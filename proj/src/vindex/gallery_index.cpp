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

#include "setr/vindex/gallery_index.hpp"

#include <algorithm>
#include <cstring>
#include <thread>

#include "setr/core/error.hpp"
#include "setr/core/kernels.hpp"
#include "setr/core/vector_math.hpp"
#include "setr/util/bytes.hpp"
#include "setr/util/crc32.hpp"
#include "setr/util/fs.hpp"
#include "setr/util/jsonl.hpp"
#include "setr/util/parallel.hpp"

namespace setr {

namespace {

constexpr char kMagic[8] = {'S', 'E', 'T', 'R', 'I', 'D', 'X', '1'};

struct ScanHit {
    double score;
    std::size_t row;
};

// "Better" means earlier in the result list: higher score, then smaller id.
bool hit_better(const ScanHit& a, const ScanHit& b, const std::vector<std::string>& ids) {
    if (a.score != b.score) return a.score > b.score;
    return ids[a.row] < ids[b.row];
}

// Bounded selector: keeps the k best hits seen so far as a binary heap whose
// root is the worst kept hit.
class TopKSelector {
public:
    TopKSelector(std::size_t k, const std::vector<std::string>& ids) : k_(k), ids_(ids) {}

    // std::push_heap keeps the max element (per cmp) at the front; with
    // cmp = hit_better the front is the worst kept hit.
    auto cmp() const {
        return [this](const ScanHit& a, const ScanHit& b) { return hit_better(a, b, ids_); };
    }

    void offer(double score, std::size_t row) {
        ScanHit hit{score, row};
        if (heap_.size() < k_) {
            heap_.push_back(hit);
            std::push_heap(heap_.begin(), heap_.end(), cmp());
            return;
        }
        if (hit_better(hit, heap_.front(), ids_)) {
            std::pop_heap(heap_.begin(), heap_.end(), cmp());
            heap_.back() = hit;
            std::push_heap(heap_.begin(), heap_.end(), cmp());
        }
    }

    std::vector<ScanHit>&& take() { return std::move(heap_); }

private:
    std::size_t k_;
    const std::vector<std::string>& ids_;
    std::vector<ScanHit> heap_;
};

}  // namespace

GalleryIndex build_index(std::vector<std::pair<std::string, std::vector<float>>> items) {
    GalleryIndex index;
    if (items.empty()) return index;

    index.dim_ = items.front().second.size();
    index.ids_.reserve(items.size());
    index.data_.reserve(items.size() * index.dim_);
    index.id_to_row_.reserve(items.size());

    for (auto& [id, vec] : items) {
        if (vec.size() != index.dim_) {
            throw_error(ErrorCode::DimensionMismatch,
                        "vector for '" + id + "' has dim " + std::to_string(vec.size()) +
                            ", expected " + std::to_string(index.dim_));
        }
        if (!index.id_to_row_.emplace(id, index.ids_.size()).second) {
            throw_error(ErrorCode::DuplicateId, "image_id '" + id + "' appears twice");
        }
        EmbeddingVector unit = normalize(std::span<const float>{vec.data(), vec.size()});
        index.data_.insert(index.data_.end(), unit.values.begin(), unit.values.end());
        index.ids_.push_back(std::move(id));
    }
    return index;
}

std::vector<ScoredCandidate> search_topk(const GalleryIndex& index, const EmbeddingVector& query,
                                         std::size_t k, const SearchOptions& options) {
    if (index.size() == 0) throw_error(ErrorCode::EmptyIndex, "search over an empty index");
    if (query.dim() != index.dim()) {
        throw_error(ErrorCode::DimensionMismatch,
                    "query dim " + std::to_string(query.dim()) + " vs index dim " +
                        std::to_string(index.dim()));
    }
    if (k == 0) throw_error(ErrorCode::InvalidConfig, "k must be >= 1");

    const std::size_t count = index.size();
    std::size_t shards = options.num_shards;
    if (shards == 0) {
        std::size_t hw = std::thread::hardware_concurrency();
        if (hw == 0) hw = 1;
        // One shard per ~4096 rows, capped by the hardware.
        shards = std::min(hw, count / 4096 + 1);
    }
    shards = std::min(shards, count);

    const float* qdata = query.values.data();
    const std::size_t dim = index.dim();
    std::vector<std::vector<ScanHit>> shard_hits(shards);

    util::parallel_for(shards, shards, [&](std::size_t s) {
        std::size_t begin = count * s / shards;
        std::size_t end = count * (s + 1) / shards;
        TopKSelector selector(k, index.ids());
        for (std::size_t r = begin; r < end; ++r) {
            double score = kernels::dot_f32(index.row(r).data(), qdata, dim);
            selector.offer(score, r);
        }
        shard_hits[s] = selector.take();
    });

    std::vector<ScanHit> merged;
    for (auto& hits : shard_hits) {
        merged.insert(merged.end(), hits.begin(), hits.end());
    }
    std::sort(merged.begin(), merged.end(),
              [&](const ScanHit& a, const ScanHit& b) { return hit_better(a, b, index.ids()); });
    if (merged.size() > k) merged.resize(k);

    std::vector<ScoredCandidate> out;
    out.reserve(merged.size());
    for (std::size_t i = 0; i < merged.size(); ++i) {
        ScoredCandidate c;
        c.image_id = index.ids()[merged[i].row];
        c.coarse_score = merged[i].score;
        c.coarse_rank = static_cast<int>(i + 1);
        c.fused_score = merged[i].score;
        out.push_back(std::move(c));
    }
    return out;
}

EmbeddingVector ensemble_embed(std::span<const EmbeddingVector> vectors) {
    if (vectors.empty()) throw_error(ErrorCode::ZeroVector, "ensemble of zero vectors");
    const std::size_t dim = vectors.front().dim();
    std::vector<double> mean(dim, 0.0);
    for (const auto& v : vectors) {
        if (v.dim() != dim) {
            throw_error(ErrorCode::DimensionMismatch, "ensemble inputs have mixed dimensions");
        }
        for (std::size_t i = 0; i < dim; ++i) mean[i] += static_cast<double>(v.values[i]);
    }
    const double inv = 1.0 / static_cast<double>(vectors.size());
    for (double& x : mean) x *= inv;
    return normalize(std::span<const double>{mean.data(), mean.size()});
}

void save_index(const GalleryIndex& index, const std::filesystem::path& path) {
    std::string payload;
    payload.reserve(12 + index.size() * (8 + index.dim() * 4));

    util::append_u32_le(payload, static_cast<uint32_t>(index.dim()));
    util::append_u64_le(payload, static_cast<uint64_t>(index.size()));
    for (const auto& id : index.ids()) {
        util::append_u32_le(payload, static_cast<uint32_t>(id.size()));
        payload.append(id);
    }
    for (std::size_t r = 0; r < index.size(); ++r) {
        auto row = index.row(r);
        for (float f : row) {
            unsigned char tmp[4];
            util::store_f32_le(f, tmp);
            payload.append(reinterpret_cast<const char*>(tmp), 4);
        }
    }

    std::string file;
    file.reserve(8 + payload.size() + 4);
    file.append(kMagic, 8);
    file.append(payload);
    util::append_u32_le(file, util::crc32(payload));

    util::atomic_write_file(path, file);
}

GalleryIndex load_index(const std::filesystem::path& path) {
    std::string file = util::read_file(path);
    if (file.size() < 8 || std::memcmp(file.data(), kMagic, 7) != 0) {
        throw_error(ErrorCode::FormatVersionMismatch, path.string() + " is not a SETRIDX file");
    }
    if (file[7] != kMagic[7]) {
        throw_error(ErrorCode::FormatVersionMismatch,
                    path.string() + " has unsupported version byte '" + file[7] + "'");
    }
    if (file.size() < 8 + 12 + 4) {
        throw_error(ErrorCode::ChecksumMismatch, path.string() + " is truncated");
    }

    const auto* bytes = reinterpret_cast<const unsigned char*>(file.data());
    std::size_t payload_len = file.size() - 8 - 4;
    uint32_t stored_crc = util::load_u32_le(bytes + 8 + payload_len);
    uint32_t actual_crc = util::crc32(file.data() + 8, payload_len);
    if (stored_crc != actual_crc) {
        throw_error(ErrorCode::ChecksumMismatch, path.string() + " failed CRC32 verification");
    }

    std::size_t pos = 8;
    auto need = [&](std::size_t n) {
        if (pos + n > 8 + payload_len) {
            throw_error(ErrorCode::ChecksumMismatch, path.string() + " has inconsistent structure");
        }
    };

    need(12);
    uint32_t dim = util::load_u32_le(bytes + pos);
    pos += 4;
    uint64_t count = util::load_u64_le(bytes + pos);
    pos += 8;

    GalleryIndex index;
    index.dim_ = dim;
    index.ids_.reserve(count);
    index.id_to_row_.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        need(4);
        uint32_t len = util::load_u32_le(bytes + pos);
        pos += 4;
        need(len);
        std::string id(file.data() + pos, len);
        pos += len;
        if (!index.id_to_row_.emplace(id, index.ids_.size()).second) {
            throw_error(ErrorCode::DuplicateId, "image_id '" + id + "' appears twice in " + path.string());
        }
        index.ids_.push_back(std::move(id));
    }

    std::size_t row_bytes = static_cast<std::size_t>(count) * dim * 4;
    need(row_bytes);
    index.data_.resize(static_cast<std::size_t>(count) * dim);
    for (std::size_t i = 0; i < index.data_.size(); ++i) {
        index.data_[i] = util::load_f32_le(bytes + pos + i * 4);
    }
    pos += row_bytes;
    if (pos != 8 + payload_len) {
        throw_error(ErrorCode::ChecksumMismatch, path.string() + " has trailing bytes");
    }
    return index;
}

std::vector<ManifestEntry> load_embedding_manifest(const std::filesystem::path& path) {
    std::vector<ManifestEntry> entries;
    util::for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& record) {
        auto where = path.string() + ":" + std::to_string(line_no);
        if (!record.is_object() || !record.contains("image_id") || !record["image_id"].is_string()) {
            throw_error(ErrorCode::ParseFailure, where + ": expected object with string image_id");
        }
        ManifestEntry entry;
        entry.image_id = record["image_id"].get<std::string>();
        if (record.contains("image_ref")) {
            if (!record["image_ref"].is_string()) {
                throw_error(ErrorCode::ParseFailure, where + ": image_ref must be a string");
            }
            entry.image_ref = record["image_ref"].get<std::string>();
        }
        if (record.contains("vector")) {
            if (!record["vector"].is_array()) {
                throw_error(ErrorCode::ParseFailure, where + ": vector must be an array");
            }
            std::vector<float> vec;
            vec.reserve(record["vector"].size());
            for (const auto& x : record["vector"]) {
                if (!x.is_number()) {
                    throw_error(ErrorCode::ParseFailure, where + ": vector components must be numbers");
                }
                vec.push_back(x.get<float>());
            }
            entry.vector = std::move(vec);
        }
        entries.push_back(std::move(entry));
    });
    return entries;
}

}  // namespace setr
