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

#include "setr/prompts/templates.hpp"

#include <json.hpp>

#include "setr/core/error.hpp"
#include "setr/util/fs.hpp"
#include "setr/util/jsonl.hpp"
#include "setr/util/sha256.hpp"

namespace setr::prompts {

namespace {

// Finds "{name}" markers for the known placeholder names only; anything else
// in braces is literal text.
std::size_t count_occurrences(const std::string& body, const std::string& marker) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = body.find(marker, pos)) != std::string::npos) {
        ++count;
        pos += marker.size();
    }
    return count;
}

}  // namespace

const std::vector<std::string>& placeholders_for(PromptMode mode) {
    static const std::vector<std::string> pseudo = {"image_content", "instruction"};
    static const std::vector<std::string> relevance = {"image_content", "instruction", "candidate_ref"};
    return mode == PromptMode::RelevanceJudgment ? relevance : pseudo;
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
    auto manifest_path = dir / "manifest.json";
    nlohmann::json manifest = util::parse_json(util::read_file(manifest_path), manifest_path.string());
    if (!manifest.is_object() || !manifest.contains("templates") || !manifest["templates"].is_array()) {
        throw_error(ErrorCode::ParseFailure, manifest_path.string() + ": expected {\"templates\": [...]}");
    }

    TemplateSet set;
    for (const auto& entry : manifest["templates"]) {
        if (!entry.is_object() || !entry.contains("mode") || !entry.contains("file") ||
            !entry.contains("sha256")) {
            throw_error(ErrorCode::ParseFailure,
                        manifest_path.string() + ": template entries need mode, file, sha256");
        }
        PromptMode mode = prompt_mode_from_name(entry["mode"].get<std::string>());
        auto file = dir / entry["file"].get<std::string>();
        std::string body = util::read_file(file);
        std::string expected = entry["sha256"].get<std::string>();
        std::string actual = util::sha256_hex(body);
        if (actual != expected) {
            throw_error(ErrorCode::ChecksumMismatch,
                        file.string() + " sha256 " + actual + " does not match manifest " + expected);
        }
        for (const auto& name : placeholders_for(mode)) {
            std::size_t n = count_occurrences(body, "{" + name + "}");
            if (n != 1) {
                throw_error(ErrorCode::ParseFailure,
                            file.string() + " must reference {" + name + "} exactly once, found " +
                                std::to_string(n));
            }
        }
        set.templates_[mode] = PromptTemplate{mode, std::move(body), std::move(expected)};
    }

    for (PromptMode mode : {PromptMode::Union, PromptMode::LlmGenerated, PromptMode::InstructedFiltered,
                            PromptMode::Intersection, PromptMode::RelevanceJudgment}) {
        if (set.templates_.find(mode) == set.templates_.end()) {
            throw_error(ErrorCode::ParseFailure,
                        manifest_path.string() + ": missing template for mode '" +
                            prompt_mode_name(mode) + "'");
        }
    }
    return set;
}

const PromptTemplate& TemplateSet::get(PromptMode mode) const {
    auto it = templates_.find(mode);
    if (it == templates_.end()) {
        throw_error(ErrorCode::UnknownMode, std::string("no template loaded for mode '") +
                                                prompt_mode_name(mode) + "'");
    }
    return it->second;
}

std::string render_template(const PromptTemplate& tmpl,
                            const std::map<std::string, std::string>& bindings) {
    // Single left-to-right pass over the template body. Values are copied in
    // verbatim, so a value containing "{instruction}" stays literal text.
    std::string out;
    out.reserve(tmpl.body.size() + 64);
    std::size_t pos = 0;
    while (pos < tmpl.body.size()) {
        std::size_t open = tmpl.body.find('{', pos);
        if (open == std::string::npos) {
            out.append(tmpl.body, pos, std::string::npos);
            break;
        }
        out.append(tmpl.body, pos, open - pos);
        std::size_t close = tmpl.body.find('}', open);
        bool substituted = false;
        if (close != std::string::npos) {
            std::string name = tmpl.body.substr(open + 1, close - open - 1);
            auto it = bindings.find(name);
            if (it != bindings.end()) {
                out.append(it->second);
                pos = close + 1;
                substituted = true;
            }
        }
        if (!substituted) {
            out.push_back('{');
            pos = open + 1;
        }
    }
    return out;
}

std::string TemplateSet::render_pseudo_target_prompt(PromptMode mode, std::string_view image_content,
                                                     std::string_view instruction) const {
    if (mode == PromptMode::RelevanceJudgment) {
        throw_error(ErrorCode::UnknownMode, "relevance-judgment is not a pseudo-target mode");
    }
    if (trim(std::string(instruction)).empty()) {
        throw_error(ErrorCode::MissingPlaceholderBinding, "instruction is empty");
    }
    if (mode != PromptMode::Union && trim(std::string(image_content)).empty()) {
        throw_error(ErrorCode::MissingPlaceholderBinding,
                    std::string("image_content is empty for mode '") + prompt_mode_name(mode) + "'");
    }
    return render_template(get(mode), {{"image_content", std::string(image_content)},
                                       {"instruction", std::string(instruction)}});
}

std::string TemplateSet::render_relevance_prompt(std::string_view relative_text,
                                                 std::string_view reference_caption,
                                                 std::string_view candidate_ref) const {
    if (trim(std::string(relative_text)).empty()) {
        throw_error(ErrorCode::MissingPlaceholderBinding, "relative_text is empty");
    }
    return render_template(get(PromptMode::RelevanceJudgment),
                           {{"image_content", std::string(reference_caption)},
                            {"instruction", std::string(relative_text)},
                            {"candidate_ref", std::string(candidate_ref)}});
}

}  // namespace setr::prompts
