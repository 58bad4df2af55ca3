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

#include "setr/evalkit/benchmark.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "setr/core/error.hpp"
#include "setr/core/kernels.hpp"
#include "setr/evalkit/metrics.hpp"
#include "setr/util/fs.hpp"
#include "setr/util/parallel.hpp"

namespace setr::evalkit {

namespace {

struct QueryOutcome {
    bool failed = false;
    std::string failure_reason;
    std::map<std::string, double> metrics;
    std::optional<std::string> category;
    nlohmann::json run_report;
};

// Subset members outside the final list are scored directly against the
// query embedding (gallery rows are reused); members inside keep their fused
// score and their final-list order.
RankedList subset_ranking(const pipeline::PipelineResult& result, const GroundTruth& gt,
                          const GalleryIndex& index) {
    struct Member {
        std::string id;
        double score;
        std::size_t list_pos;  // position in the final list, SIZE_MAX if absent
    };

    std::vector<Member> members;
    members.reserve(gt.subset_ids->size());
    for (const auto& id : *gt.subset_ids) {
        std::size_t pos = SIZE_MAX;
        double score = 0.0;
        for (std::size_t i = 0; i < result.final_list.candidates.size(); ++i) {
            if (result.final_list.candidates[i].image_id == id) {
                pos = i;
                score = result.final_list.candidates[i].fused_score;
                break;
            }
        }
        if (pos == SIZE_MAX) {
            auto row = index.find(id);
            if (!row) {
                throw_error(ErrorCode::SubsetMemberUnscored,
                            "subset member '" + id + "' is not in the index");
            }
            score = kernels::dot_f32(index.row(*row).data(), result.query_embedding.values.data(),
                                     index.dim());
        }
        members.push_back({id, score, pos});
    }

    std::sort(members.begin(), members.end(), [](const Member& a, const Member& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.list_pos != b.list_pos) return a.list_pos < b.list_pos;
        return a.id < b.id;
    });

    RankedList list;
    list.query_id = result.final_list.query_id;
    for (std::size_t i = 0; i < members.size(); ++i) {
        ScoredCandidate c;
        c.image_id = members[i].id;
        c.coarse_score = members[i].score;
        c.coarse_rank = static_cast<int>(i + 1);
        c.fused_score = members[i].score;
        list.candidates.push_back(std::move(c));
    }
    return list;
}

std::vector<std::string> suite_metric_names(Suite suite, const BenchmarkDataset& dataset) {
    switch (suite) {
        case Suite::Cirr: return {"R@1", "R@5", "R@10", "Rs@1", "Rs@2"};
        case Suite::Circo: return {"mAP@5", "mAP@10", "mAP@25", "mAP@50"};
        case Suite::FashionIq: return {"R@10"};
        case Suite::Full: {
            std::vector<std::string> names = {"R@1", "R@5", "R@10", "mAP@5", "mAP@10", "mAP@25", "mAP@50"};
            bool all_subsets = !dataset.queries.empty();
            for (const auto& q : dataset.queries) {
                auto it = dataset.ground_truths.find(q.query_id);
                if (it == dataset.ground_truths.end() || !it->second.subset_ids) {
                    all_subsets = false;
                    break;
                }
            }
            if (all_subsets) {
                names.push_back("Rs@1");
                names.push_back("Rs@2");
            }
            return names;
        }
        case Suite::Auto: break;
    }
    throw_error(ErrorCode::InvalidConfig, "suite must be resolved before use");
}

double compute_metric(const std::string& name, const pipeline::PipelineResult& result,
                      const GroundTruth& gt, const GalleryIndex& index) {
    if (name.rfind("Rs@", 0) == 0) {
        int k = std::stoi(name.substr(3));
        RankedList subset = subset_ranking(result, gt, index);
        return recall_subset_at_k(subset, gt, k);
    }
    if (name.rfind("R@", 0) == 0) {
        return recall_at_k(result.final_list, gt, std::stoi(name.substr(2)));
    }
    if (name.rfind("mAP@", 0) == 0) {
        return map_at_k(result.final_list, gt, std::stoi(name.substr(4)));
    }
    throw_error(ErrorCode::InvalidConfig, "unknown metric '" + name + "'");
}

std::string format_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

Suite suite_from_name(const std::string& name) {
    if (name == "auto") return Suite::Auto;
    if (name == "cirr") return Suite::Cirr;
    if (name == "circo") return Suite::Circo;
    if (name == "fashioniq") return Suite::FashionIq;
    if (name == "full") return Suite::Full;
    throw_error(ErrorCode::InvalidConfig, "unknown suite '" + name + "'");
}

const char* suite_name(Suite suite) {
    switch (suite) {
        case Suite::Auto: return "auto";
        case Suite::Cirr: return "cirr";
        case Suite::Circo: return "circo";
        case Suite::FashionIq: return "fashioniq";
        case Suite::Full: return "full";
    }
    return "unknown";
}

Suite resolve_suite(Suite requested, const BenchmarkDataset& dataset) {
    if (requested != Suite::Auto) return requested;
    bool any_subset = false;
    bool any_category = false;
    bool any_multi_target = false;
    for (const auto& [id, gt] : dataset.ground_truths) {
        any_subset = any_subset || gt.subset_ids.has_value();
        any_category = any_category || gt.category.has_value();
        any_multi_target = any_multi_target || gt.target_ids.size() > 1;
    }
    if (any_subset) return Suite::Cirr;
    if (any_category) return Suite::FashionIq;
    if (any_multi_target) return Suite::Circo;
    return Suite::Full;
}

nlohmann::json MetricReport::to_json() const {
    nlohmann::json j{{"dataset", dataset},
                     {"suite", suite},
                     {"config", config_echo},
                     {"metrics", metrics},
                     {"num_queries", num_queries},
                     {"failures", failures}};
    if (!per_category.empty()) j["per_category"] = per_category;
    if (!label.empty()) j["label"] = label;
    return j;
}

std::string render_metric_table(const std::vector<MetricReport>& reports) {
    // Column set: union of metric names in input order of first appearance.
    std::vector<std::string> columns;
    for (const auto& report : reports) {
        for (const auto& [name, value] : report.metrics) {
            if (std::find(columns.begin(), columns.end(), name) == columns.end()) {
                columns.push_back(name);
            }
        }
    }

    std::size_t label_width = std::string("config").size();
    for (const auto& report : reports) {
        std::string label = report.label.empty() ? report.dataset : report.label;
        label_width = std::max(label_width, label.size());
    }
    std::vector<std::size_t> widths;
    widths.reserve(columns.size());
    for (const auto& col : columns) widths.push_back(std::max<std::size_t>(col.size(), 6));

    auto pad = [](const std::string& s, std::size_t width) {
        return s + std::string(width > s.size() ? width - s.size() : 0, ' ');
    };

    std::ostringstream out;
    out << pad("config", label_width);
    for (std::size_t c = 0; c < columns.size(); ++c) out << "  " << pad(columns[c], widths[c]);
    out << "\n";

    for (const auto& report : reports) {
        std::string label = report.label.empty() ? report.dataset : report.label;
        out << pad(label, label_width);
        for (std::size_t c = 0; c < columns.size(); ++c) {
            auto it = report.metrics.find(columns[c]);
            out << "  " << pad(it == report.metrics.end() ? "-" : format_metric(it->second), widths[c]);
        }
        out << "\n";
    }
    return out.str();
}

MetricReport run_benchmark(const BenchmarkDataset& dataset, const GalleryIndex& index,
                           const EvalContext& context) {
    for (const auto& id : dataset.gallery_ids) {
        if (!index.find(id)) {
            throw_error(ErrorCode::InvalidConfig,
                        "gallery id '" + id + "' from the dataset is missing from the index");
        }
    }

    Suite suite = resolve_suite(context.suite, dataset);
    std::vector<std::string> metric_names = suite_metric_names(suite, dataset);

    pipeline::Pipeline pipe(context.clients, context.templates, context.pipeline_config);

    std::vector<QueryOutcome> outcomes(dataset.queries.size());
    util::parallel_for(dataset.queries.size(), static_cast<std::size_t>(std::max(context.jobs, 1)),
                       [&](std::size_t i) {
        const CompositeQuery& query = dataset.queries[i];
        const GroundTruth& gt = dataset.ground_truths.at(query.query_id);
        QueryOutcome& outcome = outcomes[i];
        outcome.category = gt.category;
        try {
            pipeline::PipelineResult result = pipe.run(query, index);
            for (const auto& name : metric_names) {
                outcome.metrics[name] = compute_metric(name, result, gt, index);
            }
            outcome.run_report =
                pipeline::query_report_json(query, result, context.pipeline_config,
                                            context.include_timing);
        } catch (const Error& e) {
            outcome.failed = true;
            outcome.failure_reason = e.what();
            for (const auto& name : metric_names) outcome.metrics[name] = 0.0;
        }
    });

    MetricReport report;
    report.dataset = dataset.name;
    report.suite = suite_name(suite);
    report.config_echo = context.config_echo.is_null() ? context.pipeline_config.to_json()
                                                       : context.config_echo;
    report.num_queries = dataset.queries.size();

    // Deterministic fold: queries are already query_id-sorted.
    std::map<std::string, double> sums;
    std::map<std::string, std::map<std::string, double>> cat_sums;
    std::map<std::string, std::size_t> cat_counts;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& outcome = outcomes[i];
        if (outcome.failed) {
            report.failures.push_back(dataset.queries[i].query_id + ": " + outcome.failure_reason);
        }
        for (const auto& name : metric_names) {
            sums[name] += outcome.metrics.at(name);
        }
        if (suite == Suite::FashionIq) {
            std::string cat = outcome.category.value_or("(none)");
            cat_counts[cat] += 1;
            for (const auto& name : metric_names) {
                cat_sums[cat][name] += outcome.metrics.at(name);
            }
        }
    }

    const double n = dataset.queries.empty() ? 1.0 : static_cast<double>(dataset.queries.size());
    if (suite == Suite::FashionIq) {
        // Per-category means; the headline number is the category average.
        for (auto& [cat, metric_sums] : cat_sums) {
            for (auto& [name, sum] : metric_sums) {
                report.per_category[cat][name] = sum / static_cast<double>(cat_counts[cat]);
            }
        }
        for (const auto& name : metric_names) {
            double total = 0.0;
            for (const auto& [cat, values] : report.per_category) total += values.at(name);
            report.metrics[name] =
                report.per_category.empty() ? 0.0 : total / static_cast<double>(report.per_category.size());
        }
    } else {
        for (const auto& name : metric_names) report.metrics[name] = sums[name] / n;
    }

    if (context.out_dir) {
        util::ensure_dir(*context.out_dir);
        util::atomic_write_file(*context.out_dir / (context.report_basename + ".json"),
                                report.to_json().dump(2) + "\n");
        util::atomic_write_file(*context.out_dir / (context.report_basename + ".txt"),
                                render_metric_table({report}));
        std::string lines;
        for (const auto& outcome : outcomes) {
            if (!outcome.run_report.is_null()) {
                lines += outcome.run_report.dump();
                lines += "\n";
            }
        }
        util::atomic_write_file(*context.out_dir / (context.report_basename + ".run_report.jsonl"),
                                lines);
    }
    return report;
}

std::vector<MetricReport> run_ablation(const BenchmarkDataset& dataset, const GalleryIndex& index,
                                       const EvalContext& context, const AblationGrid& grid) {
    if (grid.modes.empty() || grid.rerank.empty() || grid.alphas.empty() || grid.betas.empty()) {
        throw_error(ErrorCode::InvalidConfig, "ablation grid has an empty axis");
    }

    std::vector<MetricReport> reports;
    for (PromptMode mode : grid.modes) {
        for (bool rerank_on : grid.rerank) {
            for (double alpha : grid.alphas) {
                for (double beta : grid.betas) {
                    EvalContext variant = context;
                    variant.pipeline_config.prompt_mode = mode;
                    variant.pipeline_config.rerank_enabled = rerank_on;
                    variant.pipeline_config.alpha = alpha;
                    variant.pipeline_config.beta = beta;
                    variant.config_echo = variant.pipeline_config.to_json();

                    char buf[128];
                    std::snprintf(buf, sizeof(buf), "mode=%s rerank=%s alpha=%g beta=%g",
                                  prompt_mode_name(mode), rerank_on ? "on" : "off", alpha, beta);
                    std::string label = buf;

                    char tag[128];
                    std::snprintf(tag, sizeof(tag), "mode-%s_rerank-%s_a%g_b%g",
                                  prompt_mode_name(mode), rerank_on ? "on" : "off", alpha, beta);
                    variant.report_basename = std::string("metrics_") + tag;

                    MetricReport report = run_benchmark(dataset, index, variant);
                    report.label = label;
                    reports.push_back(std::move(report));
                }
            }
        }
    }

    if (context.out_dir) {
        util::atomic_write_file(*context.out_dir / "ablation_summary.txt",
                                render_metric_table(reports));
    }
    return reports;
}

}  // namespace setr::evalkit
