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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "setr/evalkit/dataset.hpp"
#include "setr/pipeline/pipeline.hpp"

namespace setr::evalkit {

// Which metric set a run reports:
//   cirr      R@1, R@5, R@10, Rs@1, Rs@2
//   circo     mAP@5, mAP@10, mAP@25, mAP@50
//   fashioniq R@10 per category plus the category average
//   full      R@1, R@5, R@10 and mAP@5..50 (plus Rs@1/Rs@2 when subsets exist)
//   auto      picks by dataset shape: subsets -> cirr, categories -> fashioniq,
//             any multi-target query -> circo, else full
enum class Suite { Auto, Cirr, Circo, FashionIq, Full };

Suite suite_from_name(const std::string& name);
const char* suite_name(Suite suite);
Suite resolve_suite(Suite requested, const BenchmarkDataset& dataset);

struct MetricReport {
    std::string dataset;
    std::string suite;
    nlohmann::json config_echo;
    std::map<std::string, double> metrics;  // values in [0, 1]
    std::map<std::string, std::map<std::string, double>> per_category;
    std::vector<std::string> failures;  // query ids whose pipeline aborted
    std::size_t num_queries = 0;
    std::string label;  // ablation row label, empty for plain runs

    nlohmann::json to_json() const;
};

// Renders the report as an aligned metric table; multiple reports become a
// comparison table with one row per config.
std::string render_metric_table(const std::vector<MetricReport>& reports);

struct EvalContext {
    clients::ClientSet clients;
    const prompts::TemplateSet* templates = nullptr;
    pipeline::PipelineConfig pipeline_config;
    nlohmann::json config_echo;  // resolved run configuration, echoed verbatim
    int jobs = 1;
    Suite suite = Suite::Auto;
    bool include_timing = false;
    // When set, metrics.json / metrics.txt / run_report.jsonl land here.
    std::optional<std::filesystem::path> out_dir;
    std::string report_basename = "metrics";
};

// Runs the pipeline over every query (bounded-parallel over queries) and
// aggregates the suite's metrics as a fold over query_id-sorted results.
// A query whose pipeline throws contributes 0 to every metric and is listed
// under failures. Requires dataset.gallery_ids to be present in the index.
MetricReport run_benchmark(const BenchmarkDataset& dataset, const GalleryIndex& index,
                           const EvalContext& context);

struct AblationGrid {
    std::vector<PromptMode> modes;
    std::vector<bool> rerank;       // e.g. {true}, {false}, or both
    std::vector<double> alphas;
    std::vector<double> betas;
};

// One report per grid point (modes x rerank x alpha x beta); labels identify
// the rows in the comparison table.
std::vector<MetricReport> run_ablation(const BenchmarkDataset& dataset, const GalleryIndex& index,
                                       const EvalContext& context, const AblationGrid& grid);

}  // namespace setr::evalkit
