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

#include "setr/clients/cache.hpp"

#include <chrono>
#include <ctime>

#include "setr/core/error.hpp"
#include "setr/util/bytes.hpp"
#include "setr/util/fs.hpp"
#include "setr/util/sha256.hpp"

namespace setr::clients {

std::string CacheKey::hex() const { return util::to_hex(digest.data(), digest.size()); }

CacheKey CacheKey::for_request(std::string_view role, std::string_view model_id,
                               const nlohmann::json& payload) {
    nlohmann::json envelope;
    envelope["role"] = std::string(role);
    envelope["model"] = std::string(model_id);
    envelope["payload"] = payload;
    // nlohmann keeps object keys sorted; dump() emits no whitespace.
    std::string canonical = envelope.dump();

    CacheKey key;
    key.digest = util::Sha256::hash(canonical);
    return key;
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    util::ensure_dir(dir_);
}

std::optional<std::string> ResponseCache::get(const CacheKey& key) const {
    auto path = dir_ / key.hex();
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    return util::read_file(path);
}

void ResponseCache::put(const CacheKey& key, std::string_view bytes, std::string_view role,
                        std::string_view model_id) const {
    auto hex = key.hex();

    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);

    nlohmann::json sidecar;
    sidecar["role"] = std::string(role);
    sidecar["model_id"] = std::string(model_id);
    sidecar["created_at"] = stamp;

    util::atomic_write_file(dir_ / hex, bytes);
    util::atomic_write_file(dir_ / (hex + ".json"), sidecar.dump(2) + "\n");
}

}  // namespace setr::clients
