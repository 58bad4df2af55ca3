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

#include "setr/clients/http_clients.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "setr/core/error.hpp"
#include "setr/core/vector_math.hpp"
#include "setr/util/fs.hpp"
#include "setr/util/jsonl.hpp"

namespace setr::clients {

namespace {

struct SplitUrl {
    std::string host;  // scheme://host[:port]
    std::string path_prefix;
};

SplitUrl split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw_error(ErrorCode::InvalidConfig, "base_url must include a scheme: " + base_url);
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

std::string base64_encode(std::string_view bytes) {
    static const char* kAlphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                     static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back(kAlphabet[(v >> 6) & 63]);
        out.push_back(kAlphabet[v & 63]);
    }
    std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        uint32_t v = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.append("==");
    } else if (rest == 2) {
        uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back(kAlphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::string lower_trimmed(std::string s) {
    std::string out;
    for (char c : s) {
        if (out.empty() && (c == ' ' || c == '\t' || c == '\n')) continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
    return out;
}

nlohmann::json image_part(const std::string& image_ref) {
    return nlohmann::json{{"type", "image_url"}, {"image_url", {{"url", resolve_image_ref(image_ref)}}}};
}

}  // namespace

void validate_endpoint_config(const ModelEndpointConfig& config) {
    if (config.timeout_ms <= 0) throw_error(ErrorCode::InvalidConfig, "timeout must be positive");
    if (config.max_parallel < 1) throw_error(ErrorCode::InvalidConfig, "max_parallel must be >= 1");
    if (config.max_retries < 0) throw_error(ErrorCode::InvalidConfig, "max_retries must be >= 0");
}

double yes_probability_from_logprobs(std::optional<double> lp_yes, std::optional<double> lp_no) {
    if (lp_yes && lp_no) {
        // p = exp(ly) / (exp(ly) + exp(ln)), computed in sigmoid form.
        return 1.0 / (1.0 + std::exp(*lp_no - *lp_yes));
    }
    if (lp_yes) return 1.0;
    if (lp_no) return 0.0;
    throw_error(ErrorCode::UnparseableAnswer, "neither Yes nor No appears in the top logprobs");
}

std::string resolve_image_ref(const std::string& image_ref) {
    if (image_ref.rfind("http://", 0) == 0 || image_ref.rfind("https://", 0) == 0 ||
        image_ref.rfind("data:", 0) == 0) {
        return image_ref;
    }
    std::error_code ec;
    if (std::filesystem::exists(image_ref, ec)) {
        return "data:application/octet-stream;base64," + base64_encode(util::read_file(image_ref));
    }
    throw_error(ErrorCode::EndpointUnavailable,
                "image ref '" + image_ref + "' is neither a URL nor a readable file");
}

struct HttpEndpoint::Impl {
    SplitUrl url;
    httplib::Client client;

    explicit Impl(const ModelEndpointConfig& config)
        : url(split_base_url(config.base_url)), client(url.host) {
        client.set_connection_timeout(std::chrono::milliseconds(config.timeout_ms));
        client.set_read_timeout(std::chrono::milliseconds(config.timeout_ms));
        client.set_write_timeout(std::chrono::milliseconds(config.timeout_ms));
        client.set_keep_alive(true);
    }
};

HttpEndpoint::HttpEndpoint(ModelEndpointConfig config)
    : config_(std::move(config)), semaphore_(static_cast<std::size_t>(std::max(config_.max_parallel, 1))) {
    validate_endpoint_config(config_);
    impl_ = std::make_unique<Impl>(config_);
}

HttpEndpoint::~HttpEndpoint() = default;

nlohmann::json HttpEndpoint::post_json(const std::string& path, const nlohmann::json& body) {
    util::ScopedPermit permit(semaphore_);

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key != nullptr && key[0] != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    std::string full_path = impl_->url.path_prefix + path;
    std::string payload = body.dump();

    for (int attempt = 0;; ++attempt) {
        httplib::Result result = impl_->client.Post(full_path, headers, payload, "application/json");

        ErrorCode failure = ErrorCode::EndpointUnavailable;
        std::string detail;
        bool retryable = true;

        if (result) {
            int status = result->status;
            if (status >= 200 && status < 300) {
                return util::parse_json(result->body, config_.base_url + full_path);
            }
            detail = "HTTP " + std::to_string(status) + " from " + config_.base_url + full_path;
            retryable = status == 408 || status == 429 || status >= 500;
        } else {
            auto err = result.error();
            if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                err == httplib::Error::Write) {
                failure = ErrorCode::Timeout;
            }
            detail = std::string("transport error '") + httplib::to_string(err) + "' for " +
                     config_.base_url + full_path;
        }

        if (!retryable || attempt >= config_.max_retries) {
            throw_error(failure, detail + " (after " + std::to_string(attempt + 1) + " attempts)");
        }
        std::this_thread::sleep_for(
            std::chrono::milliseconds(static_cast<int64_t>(config_.retry_backoff_ms) * (attempt + 1)));
    }
}

HttpEmbedder::HttpEmbedder(ModelEndpointConfig config, std::shared_ptr<CallCounters> counters)
    : endpoint_(std::move(config)), counters_(std::move(counters)) {}

std::vector<EmbeddingVector> HttpEmbedder::parse_embeddings(const nlohmann::json& response,
                                                            std::size_t expected) {
    if (!response.is_object() || !response.contains("data") || !response["data"].is_array() ||
        response["data"].size() != expected) {
        throw_error(ErrorCode::MalformedResponse, "embeddings response has no data[] of expected size");
    }
    std::vector<EmbeddingVector> out(expected);
    std::vector<bool> seen(expected, false);
    for (const auto& item : response["data"]) {
        if (!item.contains("index") || !item.contains("embedding") || !item["embedding"].is_array()) {
            throw_error(ErrorCode::MalformedResponse, "embeddings item missing index/embedding");
        }
        std::size_t idx = item["index"].get<std::size_t>();
        if (idx >= expected || seen[idx]) {
            throw_error(ErrorCode::MalformedResponse, "embeddings index out of range or repeated");
        }
        std::vector<float> raw;
        raw.reserve(item["embedding"].size());
        for (const auto& x : item["embedding"]) {
            if (!x.is_number()) throw_error(ErrorCode::MalformedResponse, "non-numeric embedding value");
            raw.push_back(x.get<float>());
        }
        out[idx] = normalize(std::span<const float>{raw.data(), raw.size()});
        seen[idx] = true;
    }
    for (const auto& v : out) {
        if (v.dim() != out.front().dim()) {
            throw_error(ErrorCode::DimensionMismatch, "embedding batch has mixed dimensions");
        }
    }
    return out;
}

std::vector<EmbeddingVector> HttpEmbedder::embed_text(std::span<const std::string> texts) {
    if (texts.empty()) return {};
    if (counters_) counters_->embed_text.fetch_add(1);
    nlohmann::json body;
    body["model"] = endpoint_.config().model_id;
    body["input"] = std::vector<std::string>(texts.begin(), texts.end());
    return parse_embeddings(endpoint_.post_json("/embeddings", body), texts.size());
}

std::vector<EmbeddingVector> HttpEmbedder::embed_image(std::span<const std::string> image_refs) {
    if (image_refs.empty()) return {};
    if (counters_) counters_->embed_image.fetch_add(1);
    nlohmann::json body;
    body["model"] = endpoint_.config().model_id;
    body["input_type"] = "image";
    auto inputs = nlohmann::json::array();
    for (const auto& ref : image_refs) inputs.push_back(resolve_image_ref(ref));
    body["input"] = std::move(inputs);
    return parse_embeddings(endpoint_.post_json("/embeddings", body), image_refs.size());
}

HttpCaptioner::HttpCaptioner(ModelEndpointConfig config, std::shared_ptr<CallCounters> counters)
    : endpoint_(std::move(config)), counters_(std::move(counters)) {}

std::vector<std::string> HttpCaptioner::caption(const std::string& image_ref,
                                                const std::string& prompt, int n) {
    if (n < 1) throw_error(ErrorCode::InvalidConfig, "caption count must be >= 1");
    if (counters_) counters_->caption.fetch_add(1);

    nlohmann::json content = nlohmann::json::array();
    content.push_back({{"type", "text"}, {"text", prompt}});
    if (!image_ref.empty()) content.push_back(image_part(image_ref));

    nlohmann::json body;
    body["model"] = endpoint_.config().model_id;
    body["n"] = n;
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", content}}});

    nlohmann::json response = endpoint_.post_json("/chat/completions", body);
    if (!response.contains("choices") || !response["choices"].is_array() ||
        response["choices"].size() != static_cast<std::size_t>(n)) {
        throw_error(ErrorCode::MalformedResponse,
                    "expected " + std::to_string(n) + " chat choices");
    }
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (const auto& choice : response["choices"]) {
        if (!choice.contains("message") || !choice["message"].contains("content") ||
            !choice["message"]["content"].is_string()) {
            throw_error(ErrorCode::MalformedResponse, "chat choice missing message.content");
        }
        std::string text = choice["message"]["content"].get<std::string>();
        if (trim(text).empty()) throw_error(ErrorCode::EmptyCompletion, "completion is empty");
        out.push_back(std::move(text));
    }
    return out;
}

double yes_probability_from_choice(const nlohmann::json& choice) {
    std::optional<double> lp_yes;
    std::optional<double> lp_no;

    if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
        choice["logprobs"].contains("content") && choice["logprobs"]["content"].is_array() &&
        !choice["logprobs"]["content"].empty()) {
        const auto& first_token = choice["logprobs"]["content"][0];
        if (first_token.contains("top_logprobs") && first_token["top_logprobs"].is_array()) {
            for (const auto& entry : first_token["top_logprobs"]) {
                if (!entry.contains("token") || !entry.contains("logprob")) continue;
                std::string token = lower_trimmed(entry["token"].get<std::string>());
                double lp = entry["logprob"].get<double>();
                if (token == "yes" && !lp_yes) lp_yes = lp;
                if (token == "no" && !lp_no) lp_no = lp;
            }
        }
    }
    if (lp_yes || lp_no) return yes_probability_from_logprobs(lp_yes, lp_no);

    // Logprobs unavailable: fall back to the text answer.
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string()) {
        std::string answer = lower_trimmed(choice["message"]["content"].get<std::string>());
        if (answer.rfind("yes", 0) == 0) return 1.0;
        if (answer.rfind("no", 0) == 0) return 0.0;
        throw_error(ErrorCode::UnparseableAnswer, "answer text is neither Yes nor No: '" + answer + "'");
    }
    throw_error(ErrorCode::UnparseableAnswer, "choice carries neither logprobs nor message content");
}

HttpRelevanceScorer::HttpRelevanceScorer(ModelEndpointConfig config,
                                         std::shared_ptr<CallCounters> counters)
    : endpoint_(std::move(config)), counters_(std::move(counters)) {}

double HttpRelevanceScorer::score_yes_probability(const std::string& prompt,
                                                  std::span<const std::string> image_refs) {
    if (counters_) counters_->score.fetch_add(1);

    nlohmann::json content = nlohmann::json::array();
    content.push_back({{"type", "text"}, {"text", prompt}});
    for (const auto& ref : image_refs) content.push_back(image_part(ref));

    nlohmann::json body;
    body["model"] = endpoint_.config().model_id;
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", content}}});
    body["max_tokens"] = 1;
    body["logprobs"] = true;
    body["top_logprobs"] = 10;

    nlohmann::json response = endpoint_.post_json("/chat/completions", body);
    if (!response.contains("choices") || !response["choices"].is_array() ||
        response["choices"].empty()) {
        throw_error(ErrorCode::MalformedResponse, "chat response has no choices");
    }
    return yes_probability_from_choice(response["choices"][0]);
}

}  // namespace setr::clients
