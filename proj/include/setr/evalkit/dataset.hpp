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
#include <map>
#include <set>
#include <string>
#include <vector>

#include "setr/core/types.hpp"
#include "setr/vindex/gallery_index.hpp"

namespace setr::evalkit {

struct BenchmarkDataset {
    std::string name;
    std::vector<CompositeQuery> queries;  // sorted by query_id
    std::map<std::string, GroundTruth> ground_truths;
    std::vector<ManifestEntry> gallery;
    std::set<std::string> gallery_ids;

    // Enforces: unique query ids, one ground truth per query, targets and
    // subsets inside the gallery, subsets of exactly 6.
    // Throws DuplicateId, DanglingTargetId, MalformedSubset, InvalidConfig.
    void validate() const;
};

enum class DatasetFormat { Canonical, CirrLike, CircoLike, FashionIqLike };

DatasetFormat dataset_format_from_name(const std::string& name);
const char* dataset_format_name(DatasetFormat format);

struct IngestPaths {
    std::vector<std::filesystem::path> query_files;
    std::vector<std::filesystem::path> gallery_files;
    std::vector<std::string> categories;  // FashionIQ: one per query file
    std::string dataset_name = "dataset";
};

// Reads one of the supported annotation layouts into the canonical schema;
// adapters are pinned by the fixture files under tests/fixtures.
// Throws ParseFailure with file/position context plus the validate() set.
BenchmarkDataset ingest(DatasetFormat format, const IngestPaths& paths);

// Canonical JSON-lines serialization: queries.jsonl and gallery.jsonl.
void write_canonical(const BenchmarkDataset& dataset, const std::filesystem::path& out_dir);
BenchmarkDataset load_canonical_dir(const std::filesystem::path& dir, const std::string& name);

}  // namespace setr::evalkit
