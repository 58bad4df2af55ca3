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

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "setr/clients/cache.hpp"
#include "setr/clients/interfaces.hpp"
#include "setr/core/error.hpp"
#include "setr/pipeline/pipeline.hpp"
#include "setr/vindex/gallery_index.hpp"

namespace setr::cli {

// Resolved run configuration. Precedence: CLI flags > config file > defaults;
// the result is echoed verbatim into every report (api keys stay in the
// environment, only the variable name is echoed).
struct RunConfig {
    pipeline::PipelineConfig pipeline;

    std::string embedder_kind = "mock";  // mock | http
    std::string captioner_kind = "mock";
    std::string scorer_kind = "mock";
    clients::ModelEndpointConfig embedder_http;
    clients::ModelEndpointConfig captioner_http;
    clients::ModelEndpointConfig scorer_http;

    int mock_dim = 64;
    uint64_t seed = 0;
    std::string cache_dir;
    std::string prompts_dir = "assets/prompts";
    int jobs = 1;
    bool include_timing = false;

    nlohmann::json to_json() const;
    // Strict loader: unknown keys raise InvalidConfig naming the key.
    static RunConfig from_json(const nlohmann::json& j);

    void validate() const;
};

struct BuiltClients {
    clients::ClientSet set;
    std::shared_ptr<clients::CallCounters> remote_counters;
    std::shared_ptr<clients::ResponseCache> cache;  // null when no cache_dir
};

BuiltClients build_clients(const RunConfig& config);

// Exit codes: 0 ok, 2 input error, 3 endpoint error, 4 partial failures.
int exit_code_for(const Error& e);

// In-process service behind the `serve` command; also used directly by tests.
class RetrieveService {
public:
    RetrieveService(GalleryIndex index, RunConfig config);

    // Handles a POST /v1/retrieve body. Returns {http_status, response_body}.
    std::pair<int, std::string> handle_retrieve(const std::string& body) const;

    const GalleryIndex& index() const { return index_; }

private:
    GalleryIndex index_;
    RunConfig config_;
    BuiltClients clients_;
    std::shared_ptr<prompts::TemplateSet> templates_;
};

// Entry point shared by the binary and the tests. args excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace setr::cli
