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

#include "setr/clients/cached_clients.hpp"
#include "setr/clients/mock_clients.hpp"
#include "setr/core/error.hpp"
#include "setr/pipeline/pipeline.hpp"
#include "test_util.hpp"

using namespace setr;
using namespace setr::pipeline;

namespace {

const prompts::TemplateSet& templates() {
    static prompts::TemplateSet set = prompts::TemplateSet::load(testing::prompts_dir());
    return set;
}

clients::ClientSet mock_clients(uint64_t seed, std::size_t dim = 16,
                                std::shared_ptr<clients::CallCounters> counters = nullptr) {
    clients::ClientSet set;
    set.embedder = std::make_shared<clients::MockEmbedder>(dim, seed, counters);
    set.captioner = std::make_shared<clients::MockCaptioner>(seed, counters);
    set.scorer = std::make_shared<clients::MockRelevanceScorer>(seed, counters);
    return set;
}

RankedList make_list(const std::vector<double>& coarse_scores) {
    RankedList list;
    list.query_id = "q";
    for (std::size_t i = 0; i < coarse_scores.size(); ++i) {
        ScoredCandidate c;
        char id[16];
        std::snprintf(id, sizeof(id), "c%03zu", i);
        c.image_id = id;
        c.coarse_score = coarse_scores[i];
        c.coarse_rank = static_cast<int>(i + 1);
        c.fused_score = coarse_scores[i];
        list.candidates.push_back(std::move(c));
    }
    return list;
}

RankedList random_coarse_list(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> scores(n);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& s : scores) s = dist(rng);
    std::sort(scores.begin(), scores.end(), std::greater<>());
    return make_list(scores);
}

std::map<std::string, double> random_scores(std::mt19937_64& rng, const RankedList& list,
                                            std::size_t m) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::map<std::string, double> scores;
    for (std::size_t i = 0; i < std::min(m, list.candidates.size()); ++i) {
        scores[list.candidates[i].image_id] = dist(rng);
    }
    return scores;
}

// Independent fusion oracle: compute every fused value directly, then a
// stable sort of (index, fused) pairs under the documented total order.
std::vector<std::string> fuse_oracle(const RankedList& list,
                                     const std::map<std::string, double>& scores,
                                     const PipelineConfig& config) {
    std::size_t m = std::min<std::size_t>(config.rerank_m, list.candidates.size());
    double lo = 0.0, hi = 0.0;
    if (config.normalize_coarse_scores && !list.candidates.empty()) {
        lo = hi = list.candidates.front().coarse_score;
        for (const auto& c : list.candidates) {
            lo = std::min(lo, c.coarse_score);
            hi = std::max(hi, c.coarse_score);
        }
    }
    struct Row {
        std::string id;
        int coarse_rank;
        double fused;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < list.candidates.size(); ++i) {
        const auto& c = list.candidates[i];
        double base = c.coarse_score;
        if (config.normalize_coarse_scores) base = hi > lo ? (base - lo) / (hi - lo) : 0.5;
        double fused = i < m ? config.alpha * base + config.beta * scores.at(c.image_id) : base;
        rows.push_back({c.image_id, c.coarse_rank, fused});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.fused != b.fused) return a.fused > b.fused;
        if (a.coarse_rank != b.coarse_rank) return a.coarse_rank < b.coarse_rank;
        return a.id < b.id;
    });
    std::vector<std::string> ids;
    for (auto& r : rows) ids.push_back(r.id);
    return ids;
}

struct ThrowingScorer : clients::RelevanceScorer {
    std::string failing_candidate;
    double score_yes_probability(const std::string&, std::span<const std::string> refs) override {
        if (!refs.empty() && refs.back() == failing_candidate) {
            throw_error(ErrorCode::Timeout, "injected timeout");
        }
        return 0.25;
    }
};

struct EmptyCaptioner : clients::Captioner {
    std::vector<std::string> caption(const std::string&, const std::string&, int n) override {
        return std::vector<std::string>(static_cast<std::size_t>(n), "");
    }
};

}  // namespace

TEST_CASE("fuse: worked example promotes the rescored candidate") {
    auto list = make_list({0.90, 0.80, 0.70});
    PipelineConfig config;
    config.rerank_m = 2;
    config.coarse_k = 3;
    std::map<std::string, double> scores = {{"c000", 0.0}, {"c001", 0.9}};

    auto fused = fuse(list, scores, config);
    REQUIRE(fused.candidates.size() == 3);
    CHECK(fused.candidates[0].image_id == "c001");
    CHECK(fused.candidates[0].fused_score == doctest::Approx(1.70).epsilon(1e-12));
    CHECK(fused.candidates[1].image_id == "c000");
    CHECK(fused.candidates[1].fused_score == doctest::Approx(0.90).epsilon(1e-12));
    CHECK(fused.candidates[2].image_id == "c002");
    CHECK(fused.candidates[2].fused_score == doctest::Approx(0.70).epsilon(1e-12));
    CHECK(fused.candidates[0].relevance_score == 0.9);
    CHECK(!fused.candidates[2].relevance_score.has_value());
}

TEST_CASE("fuse: beta=0 keeps the coarse ordering") {
    std::mt19937_64 rng(70);
    PipelineConfig config;
    config.beta = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        auto list = random_coarse_list(rng, 1 + rng() % 60);
        auto scores = random_scores(rng, list, config.rerank_m);
        auto fused = fuse(list, scores, config);
        REQUIRE(fused.candidates.size() == list.candidates.size());
        for (std::size_t i = 0; i < list.candidates.size(); ++i) {
            CHECK(fused.candidates[i].image_id == list.candidates[i].image_id);
        }
    }
}

TEST_CASE("fuse: matches the brute-force score-all stable-sort oracle") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 200; ++trial) {
        PipelineConfig config;
        config.rerank_m = 1 + rng() % 10;
        config.coarse_k = 60;
        config.alpha = double(rng() % 30) / 10.0;
        config.beta = double(rng() % 30) / 10.0;
        config.normalize_coarse_scores = (rng() % 2) == 0;
        auto list = random_coarse_list(rng, 1 + rng() % 60);
        auto scores = random_scores(rng, list, config.rerank_m);
        auto fused = fuse(list, scores, config);
        auto want = fuse_oracle(list, scores, config);
        REQUIRE(fused.candidates.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(fused.candidates[i].image_id == want[i]);
        }
        CHECK_NOTHROW(validate_ranked_list(fused));
    }
}

TEST_CASE("fuse: tail candidates keep raw scores and relative order") {
    std::mt19937_64 rng(72);
    PipelineConfig config;  // rerank_m = 10, defaults
    auto list = random_coarse_list(rng, 50);
    auto scores = random_scores(rng, list, 10);
    auto fused = fuse(list, scores, config);

    std::vector<std::string> want_tail;
    for (std::size_t i = 10; i < list.candidates.size(); ++i) {
        want_tail.push_back(list.candidates[i].image_id);
    }
    std::vector<std::string> got_tail;
    std::set<std::string> tail_set(want_tail.begin(), want_tail.end());
    for (const auto& c : fused.candidates) {
        if (tail_set.count(c.image_id)) {
            got_tail.push_back(c.image_id);
            CHECK(c.fused_score == c.coarse_score);  // untouched S_c
        }
    }
    CHECK(got_tail == want_tail);
}

TEST_CASE("fuse: missing and extraneous scores rejected") {
    auto list = make_list({0.9, 0.8, 0.7});
    PipelineConfig config;
    config.rerank_m = 2;

    std::map<std::string, double> missing = {{"c000", 0.5}};
    try {
        fuse(list, missing, config);
        FAIL("expected MissingScore");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingScore);
    }

    std::map<std::string, double> extra = {{"c000", 0.5}, {"c001", 0.5}, {"c002", 0.5}};
    try {
        fuse(list, extra, config);
        FAIL("expected ExtraneousScore");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ExtraneousScore);
    }
}

TEST_CASE("fuse: raising a candidate's relevance never demotes it") {
    std::mt19937_64 rng(73);
    PipelineConfig config;
    for (int trial = 0; trial < 100; ++trial) {
        auto list = random_coarse_list(rng, 10 + rng() % 40);
        auto scores = random_scores(rng, list, config.rerank_m);
        auto fused = fuse(list, scores, config);

        std::size_t m = std::min<std::size_t>(config.rerank_m, list.candidates.size());
        std::size_t pick = rng() % m;
        std::string id = list.candidates[pick].image_id;

        auto rank_of = [&](const RankedList& l) {
            for (std::size_t i = 0; i < l.candidates.size(); ++i) {
                if (l.candidates[i].image_id == id) return i;
            }
            return SIZE_MAX;
        };

        std::size_t before = rank_of(fused);
        auto raised = scores;
        std::uniform_real_distribution<double> up(0.0, 1.0 - raised[id]);
        raised[id] += up(rng);
        auto fused_after = fuse(list, raised, config);
        CHECK(rank_of(fused_after) <= before);
    }
}

TEST_CASE("build_pseudo_targets: 15 descriptions via mock captioner, mode recorded") {
    Pipeline pipe(mock_clients(11), &templates(), PipelineConfig{});

    CompositeQuery query;
    query.query_id = "q1";
    query.reference_image_id = "ref-img";
    query.relative_text = "make the dog run";

    auto pt = pipe.build_pseudo_targets(query);
    CHECK(pt.mode == PromptMode::Intersection);
    CHECK(pt.query_id == "q1");
    REQUIRE(pt.descriptions.size() == 15);
    for (const auto& d : pt.descriptions) CHECK(!d.empty());
}

TEST_CASE("build_pseudo_targets: pre-supplied captions pass through when rewrite is off") {
    PipelineConfig config;
    config.llm_rewrite = false;
    Pipeline pipe(mock_clients(12), &templates(), config);

    CompositeQuery query;
    query.query_id = "q1";
    query.reference_image_id = "ref-img";
    query.relative_text = "make the dog run";
    query.reference_captions = {"a dog stands in a field"};

    auto pt = pipe.build_pseudo_targets(query);
    REQUIRE(pt.descriptions.size() == 1);
    CHECK(pt.descriptions[0] == "a dog stands in a field");
}

TEST_CASE("build_pseudo_targets: union mode composes without model calls") {
    PipelineConfig config;
    config.prompt_mode = PromptMode::Union;
    auto counters = std::make_shared<clients::CallCounters>();
    Pipeline pipe(mock_clients(13, 16, counters), &templates(), config);

    CompositeQuery query;
    query.query_id = "q1";
    query.reference_image_id = "ref-img";
    query.relative_text = "add snow";
    query.reference_captions = {"a red barn", "a barn at dusk"};

    auto pt = pipe.build_pseudo_targets(query);
    REQUIRE(pt.descriptions.size() == 2);
    CHECK(pt.descriptions[0] == "a red barn add snow");
    CHECK(pt.descriptions[1] == "a barn at dusk add snow");
    CHECK(counters->caption.load() == 0);  // no captioner involvement
}

TEST_CASE("build_pseudo_targets: consolidated rewrite yields one description") {
    PipelineConfig config;
    config.single_consolidated_rewrite = true;
    Pipeline pipe(mock_clients(14), &templates(), config);

    CompositeQuery query;
    query.query_id = "q1";
    query.reference_image_id = "ref-img";
    query.relative_text = "add snow";
    query.reference_captions = {"a red barn", "a barn at dusk"};

    auto pt = pipe.build_pseudo_targets(query);
    CHECK(pt.descriptions.size() == 1);
}

TEST_CASE("build_pseudo_targets: empty captioner output raises EmptyCompletion") {
    auto set = mock_clients(15);
    set.captioner = std::make_shared<EmptyCaptioner>();
    Pipeline pipe(set, &templates(), PipelineConfig{});

    CompositeQuery query;
    query.query_id = "q1";
    query.reference_image_id = "ref-img";
    query.relative_text = "anything";

    try {
        pipe.build_pseudo_targets(query);
        FAIL("expected EmptyCompletion");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyCompletion);
    }
}

TEST_CASE("coarse_retrieve: self-retrieval and k clamping") {
    std::mt19937_64 rng(75);
    std::vector<std::pair<std::string, std::vector<float>>> items;
    for (int i = 0; i < 100; ++i) {
        items.emplace_back("img_" + std::to_string(i), testing::random_vector(rng, 16));
    }
    auto index = build_index(std::move(items));

    auto set = mock_clients(16);
    auto embedder = std::make_shared<clients::MockEmbedder>(16, 16);
    std::vector<float> row(index.row(7).begin(), index.row(7).end());
    embedder->set_text_fixture("locate target", row);
    set.embedder = embedder;

    PipelineConfig config;
    config.llm_rewrite = false;
    Pipeline pipe(set, &templates(), config);

    PseudoTarget pt;
    pt.query_id = "q1";
    pt.mode = PromptMode::Intersection;
    pt.descriptions = {"locate target"};

    auto ranked = pipe.coarse_retrieve(pt, index);
    REQUIRE(ranked.candidates.size() == 50);  // default coarse_k over 100 items
    CHECK(ranked.candidates[0].image_id == "img_7");
    CHECK(ranked.candidates[0].coarse_score == doctest::Approx(1.0).epsilon(1e-6));
    for (const auto& c : ranked.candidates) CHECK(c.fused_score == c.coarse_score);
}

TEST_CASE("rerank: fixture scorer promotes the target from rank 5 to rank 1") {
    // Orthonormal rows give exact control over coarse scores.
    std::vector<std::pair<std::string, std::vector<float>>> items;
    const std::size_t dim = 16;
    std::vector<double> profile = {0.9, 0.85, 0.8, 0.75, 0.5, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05, 0.04};
    for (std::size_t i = 0; i < profile.size(); ++i) {
        std::vector<float> row(dim, 0.0f);
        row[i] = 1.0f;
        items.emplace_back("g" + std::to_string(i), std::move(row));
    }
    auto index = build_index(std::move(items));

    std::vector<float> q(dim, 0.0f);
    for (std::size_t i = 0; i < profile.size(); ++i) q[i] = static_cast<float>(profile[i]);

    auto set = mock_clients(17, dim);
    auto embedder = std::make_shared<clients::MockEmbedder>(dim, 17);
    embedder->set_text_fixture("find it", q);
    set.embedder = embedder;
    auto scorer = std::make_shared<clients::MockRelevanceScorer>(17);
    scorer->set_fixture_fn([](const std::string&, std::span<const std::string> refs) {
        return std::optional<double>(refs.back() == "g4" ? 1.0 : 0.0);
    });
    set.scorer = scorer;

    PipelineConfig config;
    config.llm_rewrite = false;
    config.coarse_k = 12;
    config.rerank_m = 10;
    Pipeline pipe(set, &templates(), config);

    CompositeQuery query;
    query.query_id = "q1";
    query.reference_image_id = "ref";
    query.relative_text = "find it";
    query.reference_captions = {"find it"};

    auto result = pipe.run(query, index);
    CHECK(result.coarse_list.candidates[4].image_id == "g4");  // coarse rank 5
    CHECK(result.final_list.candidates[0].image_id == "g4");   // promoted to 1
    REQUIRE(result.final_list.candidates[0].relevance_score.has_value());
    CHECK(*result.final_list.candidates[0].relevance_score == 1.0);

    // Permutation bound: same id set before and after.
    std::set<std::string> before, after;
    for (const auto& c : result.coarse_list.candidates) before.insert(c.image_id);
    for (const auto& c : result.final_list.candidates) after.insert(c.image_id);
    CHECK(before == after);
}

TEST_CASE("rerank: rerank_m == coarse_k with beta=0 is the identity permutation") {
    std::mt19937_64 rng(76);
    std::vector<std::pair<std::string, std::vector<float>>> items;
    for (int i = 0; i < 30; ++i) {
        items.emplace_back("img_" + std::to_string(i), testing::random_vector(rng, 8));
    }
    auto index = build_index(std::move(items));

    PipelineConfig config;
    config.coarse_k = 30;
    config.rerank_m = 30;
    config.beta = 0.0;
    config.llm_rewrite = false;
    Pipeline pipe(mock_clients(18, 8), &templates(), config);

    CompositeQuery query;
    query.query_id = "q1";
    query.reference_image_id = "ref";
    query.relative_text = "whatever";
    query.reference_captions = {"some caption"};

    auto result = pipe.run(query, index);
    REQUIRE(result.final_list.candidates.size() == result.coarse_list.candidates.size());
    for (std::size_t i = 0; i < result.final_list.candidates.size(); ++i) {
        CHECK(result.final_list.candidates[i].image_id == result.coarse_list.candidates[i].image_id);
    }
}

TEST_CASE("rerank: scorer failure policies") {
    std::mt19937_64 rng(77);
    std::vector<std::pair<std::string, std::vector<float>>> items;
    for (int i = 0; i < 20; ++i) {
        items.emplace_back("img_" + std::to_string(i), testing::random_vector(rng, 8));
    }
    auto index = build_index(std::move(items));

    auto base_query = [] {
        CompositeQuery q;
        q.query_id = "q1";
        q.reference_image_id = "ref";
        q.relative_text = "whatever";
        q.reference_captions = {"cap"};
        return q;
    }();

    auto make_set = [&] {
        auto set = mock_clients(19, 8);
        auto scorer = std::make_shared<ThrowingScorer>();
        auto probe = mock_clients(19, 8);
        PipelineConfig probe_config;
        probe_config.llm_rewrite = false;
        probe_config.rerank_enabled = false;
        Pipeline probe_pipe(probe, &templates(), probe_config);
        auto coarse = probe_pipe.run(base_query, index).coarse_list;
        scorer->failing_candidate = coarse.candidates[2].image_id;  // a top-m candidate
        set.scorer = scorer;
        return std::pair{set, scorer->failing_candidate};
    };

    // score-as-zero (default): run completes, failing candidate gets 0, logged.
    {
        auto [set, failing] = make_set();
        PipelineConfig config;
        config.llm_rewrite = false;
        Pipeline pipe(set, &templates(), config);
        auto result = pipe.run(base_query, index);
        CHECK(result.relevance_scores.at(failing) == 0.0);
        REQUIRE(result.incidents.size() == 1);
        CHECK(result.incidents[0].find(failing) != std::string::npos);
    }

    // coarse-scaled: failing candidate gets (S_c+1)/2.
    {
        auto [set, failing] = make_set();
        PipelineConfig config;
        config.llm_rewrite = false;
        config.scorer_fail_policy = ScorerFailPolicy::CoarseScaled;
        Pipeline pipe(set, &templates(), config);
        auto result = pipe.run(base_query, index);
        double s_c = 0.0;
        for (const auto& c : result.coarse_list.candidates) {
            if (c.image_id == failing) s_c = c.coarse_score;
        }
        CHECK(result.relevance_scores.at(failing) ==
              doctest::Approx(std::clamp((s_c + 1.0) / 2.0, 0.0, 1.0)).epsilon(1e-12));
    }

    // abort-query: the error propagates.
    {
        auto [set, failing] = make_set();
        (void)failing;
        PipelineConfig config;
        config.llm_rewrite = false;
        config.scorer_fail_policy = ScorerFailPolicy::AbortQuery;
        Pipeline pipe(set, &templates(), config);
        try {
            pipe.run(base_query, index);
            FAIL("expected Timeout");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Timeout);
        }
    }
}

TEST_CASE("run_pipeline: deterministic across runs, scoring jobs, and shard counts") {
    std::mt19937_64 rng(78);
    std::vector<std::pair<std::string, std::vector<float>>> items;
    for (int i = 0; i < 200; ++i) {
        items.emplace_back("img_" + std::to_string(i), testing::random_vector(rng, 16));
    }
    auto index = build_index(std::move(items));

    CompositeQuery query;
    query.query_id = "q1";
    query.reference_image_id = "ref";
    query.relative_text = "turn the cat into a dog";

    std::string baseline;
    for (int scoring_jobs : {1, 4, 16}) {
        for (int shards : {1, 3, 8}) {
            PipelineConfig config;
            config.scoring_jobs = scoring_jobs;
            config.search_shards = shards;
            Pipeline pipe(mock_clients(21), &templates(), config);
            auto result = pipe.run(query, index);
            // Serialize with a fixed config echo so only pipeline outputs vary.
            PipelineConfig echo;
            std::string report = query_report_json(query, result, echo, false).dump();
            if (baseline.empty()) baseline = report;
            CHECK(report == baseline);
        }
    }
}

TEST_CASE("run_pipeline: rerank disabled equals coarse output; timing gated by flag") {
    std::mt19937_64 rng(79);
    std::vector<std::pair<std::string, std::vector<float>>> items;
    for (int i = 0; i < 60; ++i) {
        items.emplace_back("img_" + std::to_string(i), testing::random_vector(rng, 8));
    }
    auto index = build_index(std::move(items));

    CompositeQuery query;
    query.query_id = "q1";
    query.reference_image_id = "ref";
    query.relative_text = "something";

    PipelineConfig config;
    config.rerank_enabled = false;
    Pipeline pipe(mock_clients(22, 8), &templates(), config);
    auto result = pipe.run(query, index);
    REQUIRE(result.final_list.candidates.size() == result.coarse_list.candidates.size());
    for (std::size_t i = 0; i < result.final_list.candidates.size(); ++i) {
        CHECK(result.final_list.candidates[i].image_id == result.coarse_list.candidates[i].image_id);
    }
    CHECK(result.relevance_scores.empty());

    auto without = query_report_json(query, result, config, false);
    auto with = query_report_json(query, result, config, true);
    CHECK(!without.contains("timing_ms"));
    CHECK(with.contains("timing_ms"));
}

TEST_CASE("run_pipeline: warm cache rerun issues zero remote calls, identical output") {
    testing::TempDir tmp("pipe-cache");
    std::mt19937_64 rng(80);
    std::vector<std::pair<std::string, std::vector<float>>> items;
    for (int i = 0; i < 80; ++i) {
        items.emplace_back("img_" + std::to_string(i), testing::random_vector(rng, 16));
    }
    auto index = build_index(std::move(items));

    CompositeQuery query;
    query.query_id = "q1";
    query.reference_image_id = "ref";
    query.relative_text = "swap the sofa for a bench";

    auto run_once = [&](std::shared_ptr<clients::CallCounters> counters) {
        auto inner = mock_clients(23, 16, counters);
        auto cache = std::make_shared<clients::ResponseCache>(tmp.path() / "cache");
        auto set = clients::with_cache(inner, cache, "emb", "cap", "sco");
        Pipeline pipe(set, &templates(), PipelineConfig{});
        auto result = pipe.run(query, index);
        PipelineConfig echo;
        return query_report_json(query, result, echo, false).dump();
    };

    auto cold_counters = std::make_shared<clients::CallCounters>();
    auto cold = run_once(cold_counters);
    CHECK(cold_counters->total() > 0);

    auto warm_counters = std::make_shared<clients::CallCounters>();
    auto warm = run_once(warm_counters);
    CHECK(warm_counters->total() == 0);
    CHECK(warm == cold);
}

TEST_CASE("pipeline config validation") {
    PipelineConfig config;
    CHECK_NOTHROW(config.validate());
    config.rerank_m = 60;
    CHECK_THROWS_AS(config.validate(), Error);
    config = PipelineConfig{};
    config.alpha = -0.5;
    CHECK_THROWS_AS(config.validate(), Error);
    config = PipelineConfig{};
    config.prompt_mode = PromptMode::RelevanceJudgment;
    CHECK_THROWS_AS(config.validate(), Error);

    // JSON round trip preserves every field.
    PipelineConfig tweaked;
    tweaked.coarse_k = 70;
    tweaked.rerank_m = 3;
    tweaked.alpha = 0.5;
    tweaked.beta = 2.0;
    tweaked.prompt_mode = PromptMode::Union;
    tweaked.normalize_coarse_scores = true;
    tweaked.scorer_fail_policy = ScorerFailPolicy::CoarseScaled;
    auto round = PipelineConfig::from_json(tweaked.to_json());
    CHECK(round.to_json() == tweaked.to_json());
}
