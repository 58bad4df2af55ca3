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
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace setr::util {

// FIPS 180-4 SHA-256. Self-contained so digests are identical on every
// platform; checked against the standard test vectors.
class Sha256 {
public:
    using Digest = std::array<unsigned char, 32>;

    Sha256();
    void update(const void* data, std::size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    Digest finish();

    static Digest hash(std::string_view data);

private:
    void process_block(const unsigned char* block);

    std::array<uint32_t, 8> state_;
    unsigned char buffer_[64];
    std::size_t buffered_ = 0;
    uint64_t total_bytes_ = 0;
};

std::string sha256_hex(std::string_view data);

}  // namespace setr::util
