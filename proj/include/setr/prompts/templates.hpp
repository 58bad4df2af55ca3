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
#include <string>
#include <string_view>

#include "setr/core/types.hpp"

namespace setr::prompts {

struct PromptTemplate {
    PromptMode mode;
    std::string body;     // verbatim file bytes
    std::string sha256;   // hex digest of body, from the manifest
};

// Placeholder names a mode's template must reference exactly once each.
// Pseudo-target modes use {image_content} and {instruction}; the relevance
// judgment additionally uses {candidate_ref}.
const std::vector<std::string>& placeholders_for(PromptMode mode);

// Loads the five template assets listed in <dir>/manifest.json, verifying
// each file's sha256 and its placeholder set.
// Throws ParseFailure (bad manifest), ChecksumMismatch (hash mismatch),
// IoFailure (unreadable files).
class TemplateSet {
public:
    static TemplateSet load(const std::filesystem::path& dir);

    const PromptTemplate& get(PromptMode mode) const;

    // Substitutes placeholders in one pass; substituted values are inserted
    // verbatim and never re-scanned for markers.
    // Throws MissingPlaceholderBinding when instruction is empty, or when
    // image_content is empty for any mode except Union; UnknownMode when mode
    // is not a pseudo-target mode.
    std::string render_pseudo_target_prompt(PromptMode mode, std::string_view image_content,
                                            std::string_view instruction) const;

    // Judgment prompt instructing a one-token Yes/No answer.
    // Throws MissingPlaceholderBinding when relative_text is empty.
    std::string render_relevance_prompt(std::string_view relative_text,
                                        std::string_view reference_caption,
                                        std::string_view candidate_ref) const;

private:
    std::map<PromptMode, PromptTemplate> templates_;
};

// Single-pass renderer shared by both entry points; exposed for tests.
std::string render_template(const PromptTemplate& tmpl,
                            const std::map<std::string, std::string>& bindings);

}  // namespace setr::prompts
