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

#include "setr/evalkit/dataset.hpp"

#include <algorithm>

#include "setr/core/error.hpp"
#include "setr/util/fs.hpp"
#include "setr/util/jsonl.hpp"

namespace setr::evalkit {

namespace {

std::string id_to_string(const nlohmann::json& value, const std::string& where) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<int64_t>());
    throw_error(ErrorCode::ParseFailure, where + ": id must be a string or integer");
}

nlohmann::json parse_json_file(const std::filesystem::path& path) {
    return util::parse_json(util::read_file(path), path.string());
}

const nlohmann::json& require_field(const nlohmann::json& obj, const char* field,
                                    const std::string& where) {
    if (!obj.is_object() || !obj.contains(field)) {
        throw_error(ErrorCode::ParseFailure, where + ": missing field '" + field + "'");
    }
    return obj[field];
}

void add_query(BenchmarkDataset& ds, CompositeQuery query, GroundTruth gt) {
    if (ds.ground_truths.count(query.query_id) > 0) {
        throw_error(ErrorCode::DuplicateId, "query_id '" + query.query_id + "' appears twice");
    }
    gt.query_id = query.query_id;
    ds.ground_truths.emplace(query.query_id, std::move(gt));
    ds.queries.push_back(std::move(query));
}

void add_gallery_entry(BenchmarkDataset& ds, ManifestEntry entry) {
    if (!ds.gallery_ids.insert(entry.image_id).second) {
        throw_error(ErrorCode::DuplicateId, "gallery image_id '" + entry.image_id + "' appears twice");
    }
    ds.gallery.push_back(std::move(entry));
}

void ingest_canonical(BenchmarkDataset& ds, const IngestPaths& paths) {
    for (const auto& file : paths.gallery_files) {
        for (auto& entry : load_embedding_manifest(file)) add_gallery_entry(ds, std::move(entry));
    }
    for (const auto& file : paths.query_files) {
        util::for_each_jsonl(file, [&](std::size_t line_no, const nlohmann::json& record) {
            std::string where = file.string() + ":" + std::to_string(line_no);
            CompositeQuery query;
            query.query_id = id_to_string(require_field(record, "query_id", where), where);
            query.reference_image_id =
                id_to_string(require_field(record, "reference_image_id", where), where);
            query.relative_text = require_field(record, "relative_text", where).get<std::string>();
            if (record.contains("reference_captions")) {
                for (const auto& c : record["reference_captions"]) {
                    query.reference_captions.push_back(c.get<std::string>());
                }
            }

            GroundTruth gt;
            for (const auto& t : require_field(record, "target_ids", where)) {
                gt.target_ids.insert(id_to_string(t, where));
            }
            if (record.contains("subset_ids") && !record["subset_ids"].is_null()) {
                std::set<std::string> subset;
                for (const auto& s : record["subset_ids"]) subset.insert(id_to_string(s, where));
                gt.subset_ids = std::move(subset);
            }
            if (record.contains("category") && !record["category"].is_null()) {
                gt.category = record["category"].get<std::string>();
            }
            add_query(ds, std::move(query), std::move(gt));
        });
    }
}

void ingest_cirr_like(BenchmarkDataset& ds, const IngestPaths& paths) {
    // Gallery: image split map {image_name: relative_path}.
    for (const auto& file : paths.gallery_files) {
        nlohmann::json split = parse_json_file(file);
        if (!split.is_object()) {
            throw_error(ErrorCode::ParseFailure, file.string() + ": expected {image_name: path} map");
        }
        for (auto it = split.begin(); it != split.end(); ++it) {
            ManifestEntry entry;
            entry.image_id = it.key();
            if (it.value().is_string()) entry.image_ref = it.value().get<std::string>();
            add_gallery_entry(ds, std::move(entry));
        }
    }
    // Queries: [{pairid, reference, caption, target_hard, img_set:{members}}].
    for (const auto& file : paths.query_files) {
        nlohmann::json records = parse_json_file(file);
        if (!records.is_array()) {
            throw_error(ErrorCode::ParseFailure, file.string() + ": expected an array of annotations");
        }
        std::size_t idx = 0;
        for (const auto& record : records) {
            std::string where = file.string() + "[" + std::to_string(idx++) + "]";
            CompositeQuery query;
            query.query_id = id_to_string(require_field(record, "pairid", where), where);
            query.reference_image_id = id_to_string(require_field(record, "reference", where), where);
            query.relative_text = require_field(record, "caption", where).get<std::string>();

            GroundTruth gt;
            gt.target_ids.insert(id_to_string(require_field(record, "target_hard", where), where));
            const auto& img_set = require_field(record, "img_set", where);
            const auto& members = require_field(img_set, "members", where);
            if (!members.is_array() || members.size() != 6) {
                throw_error(ErrorCode::MalformedSubset,
                            where + ": img_set.members must have exactly 6 entries, found " +
                                std::to_string(members.size()));
            }
            std::set<std::string> subset;
            for (const auto& m : members) subset.insert(id_to_string(m, where));
            if (subset.size() != 6) {
                throw_error(ErrorCode::MalformedSubset, where + ": img_set.members has duplicates");
            }
            gt.subset_ids = std::move(subset);
            add_query(ds, std::move(query), std::move(gt));
        }
    }
}

void ingest_circo_like(BenchmarkDataset& ds, const IngestPaths& paths) {
    // Gallery: array of image ids.
    for (const auto& file : paths.gallery_files) {
        nlohmann::json listing = parse_json_file(file);
        if (!listing.is_array()) {
            throw_error(ErrorCode::ParseFailure, file.string() + ": expected an array of image ids");
        }
        std::size_t idx = 0;
        for (const auto& item : listing) {
            std::string where = file.string() + "[" + std::to_string(idx++) + "]";
            ManifestEntry entry;
            if (item.is_object()) {
                entry.image_id = id_to_string(require_field(item, "image_id", where), where);
                if (item.contains("image_ref")) entry.image_ref = item["image_ref"].get<std::string>();
            } else {
                entry.image_id = id_to_string(item, where);
            }
            add_gallery_entry(ds, std::move(entry));
        }
    }
    // Queries: [{id, reference_img_id, relative_caption, target_img_id, gt_img_ids}].
    for (const auto& file : paths.query_files) {
        nlohmann::json records = parse_json_file(file);
        if (!records.is_array()) {
            throw_error(ErrorCode::ParseFailure, file.string() + ": expected an array of annotations");
        }
        std::size_t idx = 0;
        for (const auto& record : records) {
            std::string where = file.string() + "[" + std::to_string(idx++) + "]";
            CompositeQuery query;
            query.query_id = id_to_string(require_field(record, "id", where), where);
            query.reference_image_id =
                id_to_string(require_field(record, "reference_img_id", where), where);
            query.relative_text = require_field(record, "relative_caption", where).get<std::string>();

            GroundTruth gt;
            gt.target_ids.insert(id_to_string(require_field(record, "target_img_id", where), where));
            for (const auto& t : require_field(record, "gt_img_ids", where)) {
                gt.target_ids.insert(id_to_string(t, where));
            }
            add_query(ds, std::move(query), std::move(gt));
        }
    }
}

void ingest_fashioniq_like(BenchmarkDataset& ds, const IngestPaths& paths) {
    if (paths.categories.size() != paths.query_files.size()) {
        throw_error(ErrorCode::InvalidConfig,
                    "fashioniq-like ingestion needs one --category per query file");
    }
    static const std::set<std::string> kCategories = {"dress", "shirt", "toptee"};
    for (const auto& cat : paths.categories) {
        if (kCategories.count(cat) == 0) {
            throw_error(ErrorCode::InvalidConfig,
                        "category '" + cat + "' is not one of dress/shirt/toptee");
        }
    }
    // Gallery: array of image names per category split.
    for (const auto& file : paths.gallery_files) {
        nlohmann::json listing = parse_json_file(file);
        if (!listing.is_array()) {
            throw_error(ErrorCode::ParseFailure, file.string() + ": expected an array of image names");
        }
        std::size_t idx = 0;
        for (const auto& item : listing) {
            ManifestEntry entry;
            entry.image_id = id_to_string(item, file.string() + "[" + std::to_string(idx++) + "]");
            add_gallery_entry(ds, std::move(entry));
        }
    }
    // Queries: [{candidate, target, captions:[...]}].
    for (std::size_t f = 0; f < paths.query_files.size(); ++f) {
        const auto& file = paths.query_files[f];
        const std::string& category = paths.categories[f];
        nlohmann::json records = parse_json_file(file);
        if (!records.is_array()) {
            throw_error(ErrorCode::ParseFailure, file.string() + ": expected an array of annotations");
        }
        std::size_t idx = 0;
        for (const auto& record : records) {
            std::string where = file.string() + "[" + std::to_string(idx) + "]";
            CompositeQuery query;
            query.query_id = "fiq-" + category + "-" + std::to_string(idx);
            query.reference_image_id = id_to_string(require_field(record, "candidate", where), where);

            const auto& captions = require_field(record, "captions", where);
            if (!captions.is_array() || captions.empty()) {
                throw_error(ErrorCode::ParseFailure, where + ": captions must be a non-empty array");
            }
            // The two relative captions join into one relative text.
            std::string joined;
            for (const auto& c : captions) {
                std::string part = trim(c.get<std::string>());
                if (part.empty()) continue;
                if (!joined.empty()) joined += " and ";
                joined += part;
            }
            query.relative_text = joined;

            GroundTruth gt;
            gt.target_ids.insert(id_to_string(require_field(record, "target", where), where));
            gt.category = category;
            add_query(ds, std::move(query), std::move(gt));
            ++idx;
        }
    }
}

}  // namespace

DatasetFormat dataset_format_from_name(const std::string& name) {
    if (name == "canonical") return DatasetFormat::Canonical;
    if (name == "cirr-like") return DatasetFormat::CirrLike;
    if (name == "circo-like") return DatasetFormat::CircoLike;
    if (name == "fashioniq-like") return DatasetFormat::FashionIqLike;
    throw_error(ErrorCode::InvalidConfig, "unknown dataset format '" + name + "'");
}

const char* dataset_format_name(DatasetFormat format) {
    switch (format) {
        case DatasetFormat::Canonical: return "canonical";
        case DatasetFormat::CirrLike: return "cirr-like";
        case DatasetFormat::CircoLike: return "circo-like";
        case DatasetFormat::FashionIqLike: return "fashioniq-like";
    }
    return "unknown";
}

void BenchmarkDataset::validate() const {
    if (queries.size() != ground_truths.size()) {
        throw_error(ErrorCode::InvalidConfig, "query/ground-truth count mismatch");
    }
    for (const auto& query : queries) {
        validate_query(query);
        auto it = ground_truths.find(query.query_id);
        if (it == ground_truths.end()) {
            throw_error(ErrorCode::InvalidConfig, "query " + query.query_id + " has no ground truth");
        }
        const GroundTruth& gt = it->second;
        validate_ground_truth(gt);
        for (const auto& target : gt.target_ids) {
            if (gallery_ids.count(target) == 0) {
                throw_error(ErrorCode::DanglingTargetId,
                            "target '" + target + "' of query " + query.query_id +
                                " is not in the gallery");
            }
        }
        if (gt.subset_ids) {
            for (const auto& member : *gt.subset_ids) {
                if (gallery_ids.count(member) == 0) {
                    throw_error(ErrorCode::DanglingTargetId,
                                "subset member '" + member + "' of query " + query.query_id +
                                    " is not in the gallery");
                }
            }
        }
    }
}

BenchmarkDataset ingest(DatasetFormat format, const IngestPaths& paths) {
    BenchmarkDataset ds;
    ds.name = paths.dataset_name;
    switch (format) {
        case DatasetFormat::Canonical: ingest_canonical(ds, paths); break;
        case DatasetFormat::CirrLike: ingest_cirr_like(ds, paths); break;
        case DatasetFormat::CircoLike: ingest_circo_like(ds, paths); break;
        case DatasetFormat::FashionIqLike: ingest_fashioniq_like(ds, paths); break;
    }
    std::sort(ds.queries.begin(), ds.queries.end(),
              [](const CompositeQuery& a, const CompositeQuery& b) { return a.query_id < b.query_id; });
    ds.validate();
    return ds;
}

void write_canonical(const BenchmarkDataset& dataset, const std::filesystem::path& out_dir) {
    util::ensure_dir(out_dir);

    std::string queries;
    for (const auto& query : dataset.queries) {
        const GroundTruth& gt = dataset.ground_truths.at(query.query_id);
        nlohmann::json record{{"query_id", query.query_id},
                              {"reference_image_id", query.reference_image_id},
                              {"relative_text", query.relative_text},
                              {"target_ids", gt.target_ids}};
        if (!query.reference_captions.empty()) record["reference_captions"] = query.reference_captions;
        if (gt.subset_ids) record["subset_ids"] = *gt.subset_ids;
        if (gt.category) record["category"] = *gt.category;
        queries += record.dump();
        queries += "\n";
    }
    util::atomic_write_file(out_dir / "queries.jsonl", queries);

    std::string gallery;
    for (const auto& entry : dataset.gallery) {
        nlohmann::json record{{"image_id", entry.image_id}};
        if (entry.image_ref) record["image_ref"] = *entry.image_ref;
        if (entry.vector) record["vector"] = *entry.vector;
        gallery += record.dump();
        gallery += "\n";
    }
    util::atomic_write_file(out_dir / "gallery.jsonl", gallery);
}

BenchmarkDataset load_canonical_dir(const std::filesystem::path& dir, const std::string& name) {
    IngestPaths paths;
    paths.query_files = {dir / "queries.jsonl"};
    paths.gallery_files = {dir / "gallery.jsonl"};
    paths.dataset_name = name;
    return ingest(DatasetFormat::Canonical, paths);
}

}  // namespace setr::evalkit
