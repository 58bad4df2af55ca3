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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "setr/core/error.hpp"
#include "setr/core/vector_math.hpp"
#include "setr/util/fs.hpp"
#include "setr/vindex/gallery_index.hpp"
#include "test_util.hpp"

using namespace setr;

namespace {

std::vector<std::pair<std::string, std::vector<float>>> random_items(std::mt19937_64& rng,
                                                                     std::size_t count,
                                                                     std::size_t dim) {
    std::vector<std::pair<std::string, std::vector<float>>> items;
    items.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "img_%04zu", i);
        items.emplace_back(id, testing::random_vector(rng, dim));
    }
    return items;
}

// Brute-force oracle: score every row with a long-double accumulation, full
// sort by (score desc, id asc), take k. Independent of the scan/heap path.
std::vector<std::string> brute_force_topk(const GalleryIndex& index, const EmbeddingVector& q,
                                          std::size_t k) {
    struct Hit {
        double score;
        std::string id;
    };
    std::vector<Hit> hits;
    for (std::size_t r = 0; r < index.size(); ++r) {
        long double s = 0.0L;
        auto row = index.row(r);
        for (std::size_t i = 0; i < index.dim(); ++i) {
            s += static_cast<long double>(row[i]) * static_cast<long double>(q.values[i]);
        }
        hits.push_back({static_cast<double>(s), index.ids()[r]});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (hits.size() > k) hits.resize(k);
    std::vector<std::string> ids;
    for (auto& h : hits) ids.push_back(h.id);
    return ids;
}

}  // namespace

TEST_CASE("build_index: basic shape and row normalization") {
    std::mt19937_64 rng(20);
    auto index = build_index(random_items(rng, 3, 4));
    CHECK(index.size() == 3);
    CHECK(index.dim() == 4);

    auto big = build_index(random_items(rng, 1000, 256));
    for (std::size_t r = 0; r < big.size(); ++r) {
        long double s = 0.0L;
        for (float x : big.row(r)) s += static_cast<long double>(x) * x;
        CHECK(std::abs(static_cast<double>(std::sqrt(s)) - 1.0) < 1e-6);
    }
}

TEST_CASE("build_index: duplicate id rejected") {
    std::vector<std::pair<std::string, std::vector<float>>> items = {
        {"img_7", {1.0f, 0.0f}}, {"img_8", {0.0f, 1.0f}}, {"img_7", {1.0f, 1.0f}}};
    try {
        build_index(items);
        FAIL("expected DuplicateId");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DuplicateId);
    }
}

TEST_CASE("build_index: ragged dims and zero vectors rejected") {
    try {
        build_index({{"a", {1.0f, 0.0f}}, {"b", {1.0f, 0.0f, 0.0f}}});
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
    try {
        build_index({{"a", {0.0f, 0.0f}}});
        FAIL("expected ZeroVector");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroVector);
    }
}

TEST_CASE("search_topk: self-retrieval puts the row first with score 1") {
    std::mt19937_64 rng(21);
    auto index = build_index(random_items(rng, 100, 32));
    std::size_t row = 3;
    EmbeddingVector q;
    q.values.assign(index.row(row).begin(), index.row(row).end());

    auto result = search_topk(index, q, 5);
    REQUIRE(result.size() == 5);
    CHECK(result[0].image_id == "img_0003");
    CHECK(result[0].coarse_score == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(result[0].coarse_rank == 1);
}

TEST_CASE("search_topk: k=50 over a gallery of 100 returns exactly 50, strictly ordered") {
    std::mt19937_64 rng(22);
    auto index = build_index(random_items(rng, 100, 16));
    auto q = normalize(std::span<const float>{testing::random_unit_vector(rng, 16)});
    auto result = search_topk(index, q, 50);
    REQUIRE(result.size() == 50);
    for (std::size_t i = 1; i < result.size(); ++i) {
        CHECK(result[i - 1].coarse_score >= result[i].coarse_score);
        CHECK(result[i].coarse_rank == static_cast<int>(i + 1));
    }
}

TEST_CASE("search_topk: equals the brute-force full-sort oracle") {
    std::mt19937_64 rng(23);
    for (std::size_t dim : {8u, 64u, 256u}) {
        std::size_t count = 200 + rng() % 800;
        auto index = build_index(random_items(rng, count, dim));
        for (std::size_t k : {1u, 5u, 10u, 50u}) {
            auto q = normalize(std::span<const float>{testing::random_unit_vector(rng, dim)});
            auto got = search_topk(index, q, k);
            auto want = brute_force_topk(index, q, k);
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].image_id == want[i]);
        }
    }
}

TEST_CASE("search_topk: ordering is invariant under the shard count") {
    std::mt19937_64 rng(24);
    auto index = build_index(random_items(rng, 777, 64));
    auto q = normalize(std::span<const float>{testing::random_unit_vector(rng, 64)});

    SearchOptions one;
    one.num_shards = 1;
    auto baseline = search_topk(index, q, 50, one);
    for (std::size_t shards : {2u, 3u, 7u, 16u, 64u, 777u}) {
        SearchOptions options;
        options.num_shards = shards;
        auto result = search_topk(index, q, 50, options);
        REQUIRE(result.size() == baseline.size());
        for (std::size_t i = 0; i < result.size(); ++i) {
            CHECK(result[i].image_id == baseline[i].image_id);
            CHECK(result[i].coarse_score == baseline[i].coarse_score);
        }
    }
}

TEST_CASE("search_topk: results for k are a prefix of results for larger k") {
    std::mt19937_64 rng(25);
    auto index = build_index(random_items(rng, 300, 32));
    auto q = normalize(std::span<const float>{testing::random_unit_vector(rng, 32)});
    auto big = search_topk(index, q, 80);
    for (std::size_t k : {1u, 5u, 20u, 79u}) {
        auto small = search_topk(index, q, k);
        REQUIRE(small.size() == k);
        for (std::size_t i = 0; i < k; ++i) CHECK(small[i].image_id == big[i].image_id);
    }
}

TEST_CASE("search_topk: tie-break by ascending image_id") {
    // Duplicate rows produce exactly equal scores.
    std::vector<std::pair<std::string, std::vector<float>>> items = {
        {"zed", {1.0f, 0.0f}}, {"alpha", {1.0f, 0.0f}}, {"mid", {0.0f, 1.0f}}};
    auto index = build_index(items);
    EmbeddingVector q{{1.0f, 0.0f}};
    auto result = search_topk(index, q, 3);
    REQUIRE(result.size() == 3);
    CHECK(result[0].image_id == "alpha");
    CHECK(result[1].image_id == "zed");
    CHECK(result[2].image_id == "mid");
}

TEST_CASE("search_topk: error cases") {
    GalleryIndex empty;
    EmbeddingVector q{{1.0f, 0.0f}};
    try {
        search_topk(empty, q, 5);
        FAIL("expected EmptyIndex");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyIndex);
    }

    std::mt19937_64 rng(26);
    auto index = build_index(random_items(rng, 10, 8));
    try {
        search_topk(index, q, 5);
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("ensemble_embed: singleton and orthogonal pair") {
    std::mt19937_64 rng(27);
    auto v = normalize(std::span<const float>{testing::random_unit_vector(rng, 24)});
    auto single = ensemble_embed(std::span<const EmbeddingVector>{&v, 1});
    for (std::size_t i = 0; i < v.dim(); ++i) CHECK(std::abs(single.values[i] - v.values[i]) < 1e-7);

    EmbeddingVector e1{{1.0f, 0.0f}};
    EmbeddingVector e2{{0.0f, 1.0f}};
    std::vector<EmbeddingVector> pair = {e1, e2};
    auto mean = ensemble_embed(pair);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(mean.values[0] == doctest::Approx(inv_sqrt2).epsilon(1e-6));
    CHECK(mean.values[1] == doctest::Approx(inv_sqrt2).epsilon(1e-6));
}

TEST_CASE("ensemble_embed: 15 vectors match an independent mean oracle") {
    std::mt19937_64 rng(28);
    std::vector<EmbeddingVector> inputs;
    for (int i = 0; i < 15; ++i) {
        inputs.push_back(normalize(std::span<const float>{testing::random_unit_vector(rng, 48)}));
    }
    auto got = ensemble_embed(inputs);

    // Oracle: long-double component mean, then normalize.
    std::vector<long double> mean(48, 0.0L);
    for (const auto& v : inputs) {
        for (std::size_t i = 0; i < 48; ++i) mean[i] += v.values[i];
    }
    long double norm = 0.0L;
    for (auto& x : mean) {
        x /= 15.0L;
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < 48; ++i) {
        CHECK(std::abs(got.values[i] - static_cast<double>(mean[i] / norm)) < 1e-6);
    }
}

TEST_CASE("ensemble_embed: permutation-invariant within 1e-7") {
    std::mt19937_64 rng(29);
    std::vector<EmbeddingVector> inputs;
    for (int i = 0; i < 9; ++i) {
        inputs.push_back(normalize(std::span<const float>{testing::random_unit_vector(rng, 32)}));
    }
    auto base = ensemble_embed(inputs);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(inputs.begin(), inputs.end(), rng);
        auto shuffled = ensemble_embed(inputs);
        for (std::size_t i = 0; i < base.dim(); ++i) {
            CHECK(std::abs(base.values[i] - shuffled.values[i]) < 1e-7);
        }
    }
}

TEST_CASE("ensemble_embed: antipodal inputs collapse to ZeroVector") {
    EmbeddingVector plus{{1.0f, 0.0f}};
    EmbeddingVector minus{{-1.0f, 0.0f}};
    std::vector<EmbeddingVector> pair = {plus, minus};
    try {
        ensemble_embed(pair);
        FAIL("expected ZeroVector");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroVector);
    }
}

TEST_CASE("index save/load round trip is bit-exact") {
    testing::TempDir tmp("vindex");
    std::mt19937_64 rng(30);
    auto path = tmp.path() / "gallery.setridx";

    for (int trial = 0; trial < 10; ++trial) {
        std::size_t dim = 1 + rng() % 64;
        std::size_t count = 1 + rng() % 40;
        auto index = build_index(random_items(rng, count, dim));
        save_index(index, path);
        auto loaded = load_index(path);
        CHECK(loaded.ids() == index.ids());
        REQUIRE(loaded.raw_data().size() == index.raw_data().size());
        // Bit-exact fp32 payload.
        CHECK(std::memcmp(loaded.raw_data().data(), index.raw_data().data(),
                          index.raw_data().size() * sizeof(float)) == 0);
    }
}

TEST_CASE("index load: corruption and version errors") {
    testing::TempDir tmp("vindex-corrupt");
    std::mt19937_64 rng(31);
    auto index = build_index(random_items(rng, 12, 8));
    auto path = tmp.path() / "x.setridx";
    save_index(index, path);

    auto bytes = util::read_file(path);

    // Truncated file.
    util::atomic_write_file(path, std::string_view(bytes).substr(0, bytes.size() - 9));
    try {
        load_index(path);
        FAIL("expected ChecksumMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ChecksumMismatch);
    }

    // Flipped payload byte.
    {
        std::string corrupted = bytes;
        corrupted[30] = static_cast<char>(corrupted[30] ^ 0x40);
        util::atomic_write_file(path, corrupted);
        try {
            load_index(path);
            FAIL("expected ChecksumMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ChecksumMismatch);
        }
    }

    // Unknown version byte.
    {
        std::string wrong_version = bytes;
        wrong_version[7] = '9';
        util::atomic_write_file(path, wrong_version);
        try {
            load_index(path);
            FAIL("expected FormatVersionMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::FormatVersionMismatch);
        }
    }

    // Not our file at all.
    util::atomic_write_file(path, "definitely not an index");
    try {
        load_index(path);
        FAIL("expected FormatVersionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::FormatVersionMismatch);
    }
}

TEST_CASE("embedding manifest: parses ids, refs and vectors") {
    testing::TempDir tmp("manifest");
    auto path = tmp.path() / "gallery.jsonl";
    util::atomic_write_file(path,
                            "{\"image_id\":\"a\",\"vector\":[1.0,0.0]}\n"
                            "\n"
                            "{\"image_id\":\"b\",\"image_ref\":\"/img/b.png\"}\n");
    auto entries = load_embedding_manifest(path);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].image_id == "a");
    REQUIRE(entries[0].vector.has_value());
    CHECK((*entries[0].vector)[0] == 1.0f);
    CHECK(entries[1].image_ref == "/img/b.png");

    util::atomic_write_file(path, "{\"image_id\":\"a\"}\nnot json\n");
    try {
        load_embedding_manifest(path);
        FAIL("expected ParseFailure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseFailure);
        CHECK(std::string(e.what()).find(":2") != std::string::npos);  // line number named
    }
}
