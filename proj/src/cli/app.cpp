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

#include "setr/cli/app.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "setr/clients/cached_clients.hpp"
#include "setr/clients/http_clients.hpp"
#include "setr/clients/mock_clients.hpp"
#include "setr/core/error.hpp"
#include "setr/core/kernels.hpp"
#include "setr/evalkit/benchmark.hpp"
#include "setr/evalkit/dataset.hpp"
#include "setr/util/fs.hpp"
#include "setr/util/jsonl.hpp"
#include "setr/util/sha256.hpp"

namespace setr::cli {

namespace {

void check_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                const std::string& where) {
    if (!obj.is_object()) throw_error(ErrorCode::InvalidConfig, where + " must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw_error(ErrorCode::InvalidConfig, where + " has unknown key '" + it.key() + "'");
        }
    }
}

nlohmann::json endpoint_to_json(const std::string& kind, const clients::ModelEndpointConfig& c) {
    return nlohmann::json{{"kind", kind},
                          {"base_url", c.base_url},
                          {"model_id", c.model_id},
                          {"timeout_ms", c.timeout_ms},
                          {"max_parallel", c.max_parallel},
                          {"max_retries", c.max_retries},
                          {"retry_backoff_ms", c.retry_backoff_ms},
                          {"api_key_env", c.api_key_env}};
}

void endpoint_from_json(const nlohmann::json& j, const std::string& where, std::string& kind,
                        clients::ModelEndpointConfig& c) {
    check_keys(j, {"kind", "base_url", "model_id", "timeout_ms", "max_parallel", "max_retries",
                   "retry_backoff_ms", "api_key_env"}, where);
    if (j.contains("kind")) kind = j["kind"].get<std::string>();
    if (j.contains("base_url")) c.base_url = j["base_url"].get<std::string>();
    if (j.contains("model_id")) c.model_id = j["model_id"].get<std::string>();
    if (j.contains("timeout_ms")) c.timeout_ms = j["timeout_ms"].get<int>();
    if (j.contains("max_parallel")) c.max_parallel = j["max_parallel"].get<int>();
    if (j.contains("max_retries")) c.max_retries = j["max_retries"].get<int>();
    if (j.contains("retry_backoff_ms")) c.retry_backoff_ms = j["retry_backoff_ms"].get<int>();
    if (j.contains("api_key_env")) c.api_key_env = j["api_key_env"].get<std::string>();
}

std::string mock_model_tag(const std::string& role, const RunConfig& cfg) {
    std::string tag = "mock-" + role + ":seed=" + std::to_string(cfg.seed);
    if (role == "embedder") tag += ":dim=" + std::to_string(cfg.mock_dim);
    return tag;
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
    return nlohmann::json{{"pipeline", pipeline.to_json()},
                          {"embedder", endpoint_to_json(embedder_kind, embedder_http)},
                          {"captioner", endpoint_to_json(captioner_kind, captioner_http)},
                          {"scorer", endpoint_to_json(scorer_kind, scorer_http)},
                          {"mock_dim", mock_dim},
                          {"seed", seed},
                          {"cache_dir", cache_dir},
                          {"prompts_dir", prompts_dir},
                          {"jobs", jobs},
                          {"include_timing", include_timing}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    check_keys(j, {"pipeline", "embedder", "captioner", "scorer", "mock_dim", "seed", "cache_dir",
                   "prompts_dir", "jobs", "include_timing"}, "config");
    RunConfig cfg;
    if (j.contains("pipeline")) {
        check_keys(j["pipeline"],
                   {"coarse_k", "rerank_m", "alpha", "beta", "prompt_mode", "captions_n",
                    "normalize_coarse_scores", "rerank_enabled", "llm_rewrite", "union_via_llm",
                    "single_consolidated_rewrite", "scorer_fail_policy", "caption_prompt",
                    "search_shards", "scoring_jobs"},
                   "config.pipeline");
        cfg.pipeline = pipeline::PipelineConfig::from_json(j["pipeline"]);
    }
    if (j.contains("embedder")) endpoint_from_json(j["embedder"], "config.embedder", cfg.embedder_kind, cfg.embedder_http);
    if (j.contains("captioner")) endpoint_from_json(j["captioner"], "config.captioner", cfg.captioner_kind, cfg.captioner_http);
    if (j.contains("scorer")) endpoint_from_json(j["scorer"], "config.scorer", cfg.scorer_kind, cfg.scorer_http);
    if (j.contains("mock_dim")) cfg.mock_dim = j["mock_dim"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    if (j.contains("cache_dir")) cfg.cache_dir = j["cache_dir"].get<std::string>();
    if (j.contains("prompts_dir")) cfg.prompts_dir = j["prompts_dir"].get<std::string>();
    if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
    if (j.contains("include_timing")) cfg.include_timing = j["include_timing"].get<bool>();
    return cfg;
}

void RunConfig::validate() const {
    pipeline.validate();
    if (mock_dim < 1) throw_error(ErrorCode::InvalidConfig, "mock_dim must be >= 1");
    if (jobs < 1) throw_error(ErrorCode::InvalidConfig, "jobs must be >= 1");
    for (const auto& [kind, label] : {std::pair{embedder_kind, "embedder"},
                                      std::pair{captioner_kind, "captioner"},
                                      std::pair{scorer_kind, "scorer"}}) {
        if (kind != "mock" && kind != "http") {
            throw_error(ErrorCode::InvalidConfig,
                        std::string(label) + " kind must be 'mock' or 'http', got '" + kind + "'");
        }
    }
    if (embedder_kind == "http" && embedder_http.base_url.empty()) {
        throw_error(ErrorCode::InvalidConfig, "embedder.base_url required for kind=http");
    }
    if (captioner_kind == "http" && captioner_http.base_url.empty()) {
        throw_error(ErrorCode::InvalidConfig, "captioner.base_url required for kind=http");
    }
    if (scorer_kind == "http" && scorer_http.base_url.empty()) {
        throw_error(ErrorCode::InvalidConfig, "scorer.base_url required for kind=http");
    }
}

BuiltClients build_clients(const RunConfig& config) {
    BuiltClients built;
    built.remote_counters = std::make_shared<clients::CallCounters>();

    if (config.embedder_kind == "http") {
        built.set.embedder =
            std::make_shared<clients::HttpEmbedder>(config.embedder_http, built.remote_counters);
    } else {
        built.set.embedder = std::make_shared<clients::MockEmbedder>(
            static_cast<std::size_t>(config.mock_dim), config.seed, built.remote_counters);
    }
    if (config.captioner_kind == "http") {
        built.set.captioner =
            std::make_shared<clients::HttpCaptioner>(config.captioner_http, built.remote_counters);
    } else {
        built.set.captioner =
            std::make_shared<clients::MockCaptioner>(config.seed, built.remote_counters);
    }
    if (config.scorer_kind == "http") {
        built.set.scorer =
            std::make_shared<clients::HttpRelevanceScorer>(config.scorer_http, built.remote_counters);
    } else {
        built.set.scorer =
            std::make_shared<clients::MockRelevanceScorer>(config.seed, built.remote_counters);
    }

    if (!config.cache_dir.empty()) {
        built.cache = std::make_shared<clients::ResponseCache>(config.cache_dir);
        std::string embedder_model = config.embedder_kind == "http" ? config.embedder_http.model_id
                                                                    : mock_model_tag("embedder", config);
        std::string captioner_model = config.captioner_kind == "http"
                                          ? config.captioner_http.model_id
                                          : mock_model_tag("captioner", config);
        std::string scorer_model = config.scorer_kind == "http" ? config.scorer_http.model_id
                                                                : mock_model_tag("scorer", config);
        built.set = clients::with_cache(built.set, built.cache, embedder_model, captioner_model,
                                        scorer_model);
    }
    return built;
}

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::EndpointUnavailable:
        case ErrorCode::Timeout:
        case ErrorCode::MalformedResponse:
        case ErrorCode::EmptyCompletion:
        case ErrorCode::UnparseableAnswer:
            return 3;
        default:
            return 2;
    }
}

namespace {

struct CommandContext {
    std::ostream& out;
    std::ostream& err;
};

// Per-invocation option state shared by the subcommands.
struct CliState {
    RunConfig cfg;
    std::string prompt_mode_name;
    std::string fail_policy_name;

    // per-command arguments
    std::string format = "canonical";
    std::vector<std::string> query_files;
    std::vector<std::string> gallery_files;
    std::vector<std::string> categories;
    std::string dataset_name;
    std::string out_path;
    std::string index_path;
    std::string dataset_dir;
    std::string suite = "auto";
    std::string text;
    std::string ref_image;
    std::vector<std::string> ref_captions;
    int k = 0;
    bool explain = false;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::vector<std::string> ablate_modes = {"union", "llm-generated", "instructed-filtered",
                                             "intersection"};
    std::string ablate_rerank = "on";
    std::vector<double> ablate_alphas = {1.0};
    std::vector<double> ablate_betas = {1.0};
};

void add_common_options(CLI::App* cmd, CliState& state) {
    cmd->add_option("--seed", state.cfg.seed, "Seed for all mock randomness")->capture_default_str();
    cmd->add_option("--mock-dim", state.cfg.mock_dim, "Embedding dimension of the mock embedder")
        ->capture_default_str();
    cmd->add_option("--cache-dir", state.cfg.cache_dir, "Response cache directory (empty = no cache)");
    cmd->add_option("--prompts-dir", state.cfg.prompts_dir, "Prompt template asset directory")
        ->capture_default_str();
    cmd->add_option("--jobs", state.cfg.jobs, "Parallel query evaluation jobs")->capture_default_str();
    cmd->add_flag("--timing,!--no-timing", state.cfg.include_timing,
                  "Include wall-clock timing in run reports (off keeps reports byte-stable)");

    cmd->add_option("--coarse-k", state.cfg.pipeline.coarse_k, "Stage-1 candidate count")
        ->capture_default_str();
    cmd->add_option("--rerank-m", state.cfg.pipeline.rerank_m, "Candidates re-scored in stage 2")
        ->capture_default_str();
    cmd->add_option("--alpha", state.cfg.pipeline.alpha, "Fusion weight on the coarse score")
        ->capture_default_str();
    cmd->add_option("--beta", state.cfg.pipeline.beta, "Fusion weight on the relevance score")
        ->capture_default_str();
    cmd->add_option("--mode", state.prompt_mode_name,
                    "Pseudo-target prompt mode: union|llm-generated|instructed-filtered|intersection")
        ->capture_default_str();
    cmd->add_option("--captions-n", state.cfg.pipeline.captions_n, "Reference captions per query")
        ->capture_default_str();
    cmd->add_flag("--normalize-coarse-scores,!--no-normalize-coarse-scores",
                  state.cfg.pipeline.normalize_coarse_scores,
                  "Min-max normalize coarse scores before fusion");
    cmd->add_flag("--rerank,!--no-rerank", state.cfg.pipeline.rerank_enabled,
                  "Enable the MLLM re-ranking stage");
    cmd->add_flag("--llm-rewrite,!--no-llm-rewrite", state.cfg.pipeline.llm_rewrite,
                  "Rewrite captions into pseudo-target descriptions");
    cmd->add_flag("--union-via-llm", state.cfg.pipeline.union_via_llm,
                  "Send Union-mode compositions through the captioner");
    cmd->add_flag("--consolidated-rewrite", state.cfg.pipeline.single_consolidated_rewrite,
                  "One consolidated rewrite instead of one per caption");
    cmd->add_option("--fail-policy", state.fail_policy_name,
                    "Scorer failure policy: score-as-zero|coarse-scaled|abort-query")
        ->capture_default_str();
    cmd->add_option("--caption-prompt", state.cfg.pipeline.caption_prompt,
                    "Prompt used to caption reference images");
    cmd->add_option("--search-shards", state.cfg.pipeline.search_shards,
                    "Parallel scan shards in top-k search (0 = auto)")
        ->capture_default_str();
    cmd->add_option("--scoring-jobs", state.cfg.pipeline.scoring_jobs,
                    "Fan-out cap for per-candidate scoring")
        ->capture_default_str();

    auto add_endpoint = [&](const std::string& prefix, std::string& kind,
                            clients::ModelEndpointConfig& c) {
        cmd->add_option("--" + prefix, kind, prefix + " backend: mock|http")->capture_default_str();
        cmd->add_option("--" + prefix + "-url", c.base_url, prefix + " base URL");
        cmd->add_option("--" + prefix + "-model", c.model_id, prefix + " model id");
        cmd->add_option("--" + prefix + "-timeout-ms", c.timeout_ms, prefix + " request timeout")
            ->capture_default_str();
        cmd->add_option("--" + prefix + "-max-parallel", c.max_parallel,
                        prefix + " max in-flight requests")
            ->capture_default_str();
        cmd->add_option("--" + prefix + "-retries", c.max_retries, prefix + " retry count")
            ->capture_default_str();
        cmd->add_option("--" + prefix + "-api-key-env", c.api_key_env,
                        "Environment variable holding the " + prefix + " API key");
    };
    add_endpoint("embedder", state.cfg.embedder_kind, state.cfg.embedder_http);
    add_endpoint("captioner", state.cfg.captioner_kind, state.cfg.captioner_http);
    add_endpoint("scorer", state.cfg.scorer_kind, state.cfg.scorer_http);
}

void finalize_config(CliState& state) {
    state.cfg.pipeline.prompt_mode = prompt_mode_from_name(state.prompt_mode_name);
    state.cfg.pipeline.scorer_fail_policy = pipeline::scorer_fail_policy_from_name(state.fail_policy_name);
    state.cfg.validate();
}

void print_stats(const CommandContext& ctx, const clients::CallCounters& counters) {
    ctx.err << "[stats] remote_calls=" << counters.total()
            << " embed_text=" << counters.embed_text.load()
            << " embed_image=" << counters.embed_image.load()
            << " caption=" << counters.caption.load() << " score=" << counters.score.load()
            << " kernel=" << kernels::backend_name(kernels::active_backend()) << "\n";
}

int cmd_ingest(const CommandContext& ctx, CliState& state) {
    evalkit::IngestPaths paths;
    for (const auto& f : state.query_files) paths.query_files.emplace_back(f);
    for (const auto& f : state.gallery_files) paths.gallery_files.emplace_back(f);
    paths.categories = state.categories;
    paths.dataset_name = state.dataset_name.empty()
                             ? std::filesystem::path(state.out_path).filename().string()
                             : state.dataset_name;

    auto dataset = evalkit::ingest(evalkit::dataset_format_from_name(state.format), paths);
    evalkit::write_canonical(dataset, state.out_path);
    ctx.out << "ingested dataset '" << dataset.name << "': queries=" << dataset.queries.size()
            << " gallery=" << dataset.gallery.size() << " -> " << state.out_path << "\n";
    return 0;
}

int cmd_index_build(const CommandContext& ctx, CliState& state) {
    finalize_config(state);
    auto entries = load_embedding_manifest(state.gallery_files.at(0));

    auto built = build_clients(state.cfg);

    std::vector<std::pair<std::string, std::vector<float>>> items;
    items.reserve(entries.size());
    std::vector<std::size_t> pending_slots;
    std::vector<std::string> pending_refs;
    for (auto& entry : entries) {
        if (entry.vector) {
            items.emplace_back(entry.image_id, std::move(*entry.vector));
        } else {
            items.emplace_back(entry.image_id, std::vector<float>{});
            pending_slots.push_back(items.size() - 1);
            pending_refs.push_back(entry.image_ref.value_or(entry.image_id));
        }
    }
    if (!pending_refs.empty()) {
        auto vectors = built.set.embedder->embed_image(pending_refs);
        for (std::size_t i = 0; i < pending_slots.size(); ++i) {
            items[pending_slots[i]].second = std::move(vectors[i].values);
        }
    }

    auto index = build_index(std::move(items));
    save_index(index, state.out_path);

    // Load-verify pass: the written file must reproduce the index bit-exactly.
    auto reloaded = load_index(state.out_path);
    if (reloaded.ids() != index.ids() || reloaded.raw_data() != index.raw_data()) {
        throw_error(ErrorCode::IoFailure, "load-verify mismatch for " + state.out_path);
    }

    ctx.out << "indexed count=" << index.size() << " dim=" << index.dim() << " -> " << state.out_path
            << "\n";
    print_stats(ctx, *built.remote_counters);
    return 0;
}

int cmd_index_info(const CommandContext& ctx, CliState& state) {
    auto index = load_index(state.index_path);
    nlohmann::json info{{"path", state.index_path}, {"count", index.size()}, {"dim", index.dim()}};
    ctx.out << info.dump(2) << "\n";
    return 0;
}

nlohmann::json ranked_list_json(const RankedList& list, bool explain, std::size_t limit) {
    nlohmann::json candidates = nlohmann::json::array();
    std::size_t n = std::min(limit == 0 ? list.candidates.size() : limit, list.candidates.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = list.candidates[i];
        if (!explain) {
            candidates.push_back(c.image_id);
            continue;
        }
        nlohmann::json item{{"image_id", c.image_id},
                            {"coarse_score", c.coarse_score},
                            {"coarse_rank", c.coarse_rank},
                            {"fused_score", c.fused_score}};
        if (c.relevance_score) item["relevance_score"] = *c.relevance_score;
        candidates.push_back(std::move(item));
    }
    return nlohmann::json{{"query_id", list.query_id}, {"candidates", std::move(candidates)}};
}

int cmd_retrieve(const CommandContext& ctx, CliState& state) {
    finalize_config(state);
    auto index = load_index(state.index_path);
    auto built = build_clients(state.cfg);
    auto templates = prompts::TemplateSet::load(state.cfg.prompts_dir);

    CompositeQuery query;
    query.query_id = "cli";
    query.reference_image_id = state.ref_image;
    query.relative_text = state.text;
    query.reference_captions = state.ref_captions;

    pipeline::Pipeline pipe(built.set, &templates, state.cfg.pipeline);
    auto result = pipe.run(query, index);

    ctx.out << ranked_list_json(result.final_list, state.explain,
                                static_cast<std::size_t>(std::max(state.k, 0)))
                   .dump(2)
            << "\n";
    print_stats(ctx, *built.remote_counters);
    return 0;
}

int run_eval_common(const CommandContext& ctx, CliState& state, bool ablate) {
    finalize_config(state);
    auto index = load_index(state.index_path);
    std::string name = state.dataset_name.empty()
                           ? std::filesystem::path(state.dataset_dir).filename().string()
                           : state.dataset_name;
    auto dataset = evalkit::load_canonical_dir(state.dataset_dir, name);
    auto built = build_clients(state.cfg);
    auto templates = prompts::TemplateSet::load(state.cfg.prompts_dir);

    evalkit::EvalContext context;
    context.clients = built.set;
    context.templates = &templates;
    context.pipeline_config = state.cfg.pipeline;
    context.config_echo = state.cfg.to_json();
    context.jobs = state.cfg.jobs;
    context.suite = evalkit::suite_from_name(state.suite);
    context.include_timing = state.cfg.include_timing;
    if (!state.out_path.empty()) context.out_dir = state.out_path;

    bool any_failures = false;
    if (!ablate) {
        auto report = evalkit::run_benchmark(dataset, index, context);
        ctx.out << evalkit::render_metric_table({report});
        any_failures = !report.failures.empty();
    } else {
        evalkit::AblationGrid grid;
        for (const auto& m : state.ablate_modes) grid.modes.push_back(prompt_mode_from_name(m));
        if (state.ablate_rerank == "on") grid.rerank = {true};
        else if (state.ablate_rerank == "off") grid.rerank = {false};
        else if (state.ablate_rerank == "both") grid.rerank = {true, false};
        else throw_error(ErrorCode::InvalidConfig, "--rerank-axis must be on|off|both");
        grid.alphas = state.ablate_alphas;
        grid.betas = state.ablate_betas;

        auto reports = evalkit::run_ablation(dataset, index, context, grid);
        ctx.out << evalkit::render_metric_table(reports);
        for (const auto& report : reports) any_failures = any_failures || !report.failures.empty();
    }

    print_stats(ctx, *built.remote_counters);
    return any_failures ? 4 : 0;
}

int cmd_serve(const CommandContext& ctx, CliState& state) {
    finalize_config(state);
    auto service = std::make_shared<RetrieveService>(load_index(state.index_path), state.cfg);

    httplib::Server server;
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });
    server.Post("/v1/retrieve", [service](const httplib::Request& req, httplib::Response& res) {
        auto [status, body] = service->handle_retrieve(req.body);
        res.status = status;
        res.set_content(body, "application/json");
    });

    ctx.err << "listening on http://" << state.host << ":" << state.port << "\n";
    if (!server.listen(state.host, state.port)) {
        throw_error(ErrorCode::IoFailure,
                    "cannot listen on " + state.host + ":" + std::to_string(state.port));
    }
    return 0;
}

}  // namespace

RetrieveService::RetrieveService(GalleryIndex index, RunConfig config)
    : index_(std::move(index)), config_(std::move(config)) {
    config_.validate();
    clients_ = build_clients(config_);
    templates_ = std::make_shared<prompts::TemplateSet>(prompts::TemplateSet::load(config_.prompts_dir));
}

std::pair<int, std::string> RetrieveService::handle_retrieve(const std::string& body) const {
    nlohmann::json request = nlohmann::json::parse(body, nullptr, false);
    if (request.is_discarded() || !request.is_object()) {
        return {400, nlohmann::json{{"error", "body must be a JSON object"}}.dump()};
    }
    if (!request.contains("relative_text") || !request["relative_text"].is_string() ||
        trim(request["relative_text"].get<std::string>()).empty()) {
        return {400, nlohmann::json{{"error", "relative_text (non-empty string) is required"}}.dump()};
    }

    CompositeQuery query;
    // Deterministic id: identical requests (key order aside) share it.
    query.query_id = "req-" + util::sha256_hex(request.dump()).substr(0, 12);
    query.relative_text = request["relative_text"].get<std::string>();

    std::size_t limit = 0;
    pipeline::PipelineConfig pipe_config = config_.pipeline;
    try {
        if (request.contains("reference_image_id")) {
            query.reference_image_id = request["reference_image_id"].get<std::string>();
        }
        if (request.contains("reference_caption")) {
            const auto& rc = request["reference_caption"];
            if (rc.is_string()) {
                query.reference_captions.push_back(rc.get<std::string>());
            } else if (rc.is_array()) {
                for (const auto& c : rc) query.reference_captions.push_back(c.get<std::string>());
            } else {
                return {400, nlohmann::json{{"error", "reference_caption must be string or array"}}.dump()};
            }
        }
        if (request.contains("k")) {
            int k = request["k"].get<int>();
            if (k < 1) return {400, nlohmann::json{{"error", "k must be >= 1"}}.dump()};
            limit = static_cast<std::size_t>(k);
        }
        if (request.contains("rerank")) pipe_config.rerank_enabled = request["rerank"].get<bool>();
    } catch (const nlohmann::json::exception& e) {
        return {400, nlohmann::json{{"error", e.what()}}.dump()};
    }

    try {
        pipeline::Pipeline pipe(clients_.set, templates_.get(), pipe_config);
        auto result = pipe.run(query, index_);
        return {200, ranked_list_json(result.final_list, true, limit).dump()};
    } catch (const Error& e) {
        int status = exit_code_for(e) == 3 ? 503 : 400;
        return {status, nlohmann::json{{"error", e.what()}}.dump()};
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CliState state;

    // Config file values become the option defaults; explicit flags then
    // override them (flags > config file > built-in defaults).
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string config_path;
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
        if (!config_path.empty()) {
            state.cfg = RunConfig::from_json(
                util::parse_json(util::read_file(config_path), config_path));
            break;
        }
    }
    if (const char* env_prompts = std::getenv("SETR_PROMPTS_DIR")) {
        if (state.cfg.prompts_dir == "assets/prompts") state.cfg.prompts_dir = env_prompts;
    }
    state.prompt_mode_name = prompt_mode_name(state.cfg.pipeline.prompt_mode);
    state.fail_policy_name = pipeline::scorer_fail_policy_name(state.cfg.pipeline.scorer_fail_policy);

    CLI::App app{"setr — two-stage composed image retrieval engine"};
    app.require_subcommand(1);
    app.fallthrough(true);  // --config may follow the subcommand name
    std::string config_file_dummy;
    app.add_option("--config", config_file_dummy, "JSON config file (see docs/config_schema.md)")
        ->configurable(false);

    CommandContext ctx{out, err};
    int rc = 0;

    auto* ingest = app.add_subcommand("ingest", "Convert benchmark annotations to the canonical schema");
    ingest->add_option("--format", state.format, "canonical|cirr-like|circo-like|fashioniq-like")
        ->required();
    ingest->add_option("--queries", state.query_files, "Annotation file(s)")->required();
    ingest->add_option("--gallery", state.gallery_files, "Gallery listing file(s)")->required();
    ingest->add_option("--category", state.categories, "FashionIQ category per query file");
    ingest->add_option("--name", state.dataset_name, "Dataset name");
    ingest->add_option("--out", state.out_path, "Output directory")->required();
    ingest->callback([&] { rc = cmd_ingest(ctx, state); });

    auto* index_cmd = app.add_subcommand("index", "Build or inspect a gallery index");
    index_cmd->require_subcommand(1);
    auto* index_build = index_cmd->add_subcommand("build", "Build an index from an embedding manifest");
    index_build->add_option("--gallery", state.gallery_files, "JSON-lines manifest {image_id, image_ref?, vector?}")
        ->required()
        ->expected(1);
    index_build->add_option("--out", state.out_path, "Index file to write")->required();
    add_common_options(index_build, state);
    index_build->callback([&] { rc = cmd_index_build(ctx, state); });
    auto* index_info = index_cmd->add_subcommand("info", "Print index header");
    index_info->add_option("--index", state.index_path, "Index file")->required();
    index_info->callback([&] { rc = cmd_index_info(ctx, state); });

    auto* retrieve = app.add_subcommand("retrieve", "Run one composed query against an index");
    retrieve->add_option("--index", state.index_path, "Index file")->required();
    retrieve->add_option("--text", state.text, "Relative text (modification request)")->required();
    retrieve->add_option("--ref-image", state.ref_image, "Reference image id");
    retrieve->add_option("--ref-caption", state.ref_captions, "Reference caption(s)");
    retrieve->add_option("-k,--k", state.k, "Print only the first k candidates");
    retrieve->add_flag("--explain", state.explain, "Include scores per candidate");
    add_common_options(retrieve, state);
    retrieve->callback([&] { rc = cmd_retrieve(ctx, state); });

    auto* eval = app.add_subcommand("eval", "Evaluate a canonical dataset against an index");
    eval->add_option("--dataset", state.dataset_dir, "Canonical dataset directory")->required();
    eval->add_option("--index", state.index_path, "Index file")->required();
    eval->add_option("--out", state.out_path, "Report output directory");
    eval->add_option("--suite", state.suite, "auto|cirr|circo|fashioniq|full")->capture_default_str();
    eval->add_option("--name", state.dataset_name, "Dataset name override");
    add_common_options(eval, state);
    eval->callback([&] { rc = run_eval_common(ctx, state, false); });

    auto* ablate = app.add_subcommand("ablate", "Evaluate a grid of pipeline configurations");
    ablate->add_option("--dataset", state.dataset_dir, "Canonical dataset directory")->required();
    ablate->add_option("--index", state.index_path, "Index file")->required();
    ablate->add_option("--out", state.out_path, "Report output directory");
    ablate->add_option("--suite", state.suite, "auto|cirr|circo|fashioniq|full")->capture_default_str();
    ablate->add_option("--name", state.dataset_name, "Dataset name override");
    ablate->add_option("--modes", state.ablate_modes, "Prompt modes to sweep")->delimiter(',');
    ablate->add_option("--rerank-axis", state.ablate_rerank, "on|off|both")->capture_default_str();
    ablate->add_option("--alphas", state.ablate_alphas, "Alpha values to sweep")->delimiter(',');
    ablate->add_option("--betas", state.ablate_betas, "Beta values to sweep")->delimiter(',');
    add_common_options(ablate, state);
    ablate->callback([&] { rc = run_eval_common(ctx, state, true); });

    auto* serve = app.add_subcommand("serve", "Expose retrieval over HTTP");
    serve->add_option("--index", state.index_path, "Index file")->required();
    serve->add_option("--host", state.host, "Bind host")->capture_default_str();
    serve->add_option("--port", state.port, "Bind port")->capture_default_str();
    add_common_options(serve, state);
    serve->callback([&] { rc = cmd_serve(ctx, state); });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream help_out, help_err;
        int cli_rc = app.exit(e, help_out, help_err);
        out << help_out.str();
        err << help_err.str();
        // Unknown flags and bad values are input errors (2); --help is 0.
        return cli_rc == 0 ? 0 : 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}

}  // namespace setr::cli
