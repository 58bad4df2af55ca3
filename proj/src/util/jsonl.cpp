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

#include "setr/util/jsonl.hpp"

#include <fstream>
#include <string>

#include "setr/core/error.hpp"

namespace setr::util {

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const nlohmann::json&)>& fn) {
    std::ifstream in(path);
    if (!in) throw_error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool blank = true;
        for (char c : line) {
            if (c != ' ' && c != '\t') { blank = false; break; }
        }
        if (blank) continue;
        nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded()) {
            throw_error(ErrorCode::ParseFailure,
                        path.string() + ":" + std::to_string(line_no) + ": invalid JSON");
        }
        fn(line_no, record);
    }
    if (in.bad()) throw_error(ErrorCode::IoFailure, "read failed for " + path.string());
}

nlohmann::json parse_json(const std::string& text, const std::string& where) {
    nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
    if (value.is_discarded()) throw_error(ErrorCode::ParseFailure, where + ": invalid JSON");
    return value;
}

}  // namespace setr::util
