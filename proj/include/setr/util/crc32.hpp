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

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace setr::util {

// CRC-32 (IEEE 802.3, reflected, poly 0xEDB88320), the zlib-compatible variant.
uint32_t crc32(const void* data, std::size_t len, uint32_t seed = 0);

inline uint32_t crc32(std::string_view bytes, uint32_t seed = 0) {
    return crc32(bytes.data(), bytes.size(), seed);
}

}  // namespace setr::util
