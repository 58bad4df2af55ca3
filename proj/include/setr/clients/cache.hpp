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

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace setr::clients {

// Content address of one logical request. Two requests share a key exactly
// when (role, model_id, canonical payload JSON) are byte-identical, where
// canonical JSON means sorted object keys and no insignificant whitespace.
struct CacheKey {
    std::array<unsigned char, 32> digest{};

    std::string hex() const;

    static CacheKey for_request(std::string_view role, std::string_view model_id,
                                const nlohmann::json& payload);
};

// One file per digest under the cache directory: "<hex>" holds the validated
// response bytes, "<hex>.json" a sidecar {role, model_id, created_at}.
// Writers go through temp-file + rename, so concurrent puts are last-write-wins
// and readers never see partial content.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<std::string> get(const CacheKey& key) const;

    void put(const CacheKey& key, std::string_view bytes, std::string_view role,
             std::string_view model_id) const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

}  // namespace setr::clients
