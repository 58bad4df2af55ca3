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

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace setr::util {

// Little-endian scalar encoding, independent of host byte order.

inline void store_u32_le(uint32_t v, unsigned char* out) {
    out[0] = static_cast<unsigned char>(v & 0xff);
    out[1] = static_cast<unsigned char>((v >> 8) & 0xff);
    out[2] = static_cast<unsigned char>((v >> 16) & 0xff);
    out[3] = static_cast<unsigned char>((v >> 24) & 0xff);
}

inline void store_u64_le(uint64_t v, unsigned char* out) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
}

inline uint32_t load_u32_le(const unsigned char* in) {
    return static_cast<uint32_t>(in[0]) | (static_cast<uint32_t>(in[1]) << 8) |
           (static_cast<uint32_t>(in[2]) << 16) | (static_cast<uint32_t>(in[3]) << 24);
}

inline uint64_t load_u64_le(const unsigned char* in) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | in[i];
    return v;
}

inline void store_f32_le(float f, unsigned char* out) {
    uint32_t bits;
    std::memcpy(&bits, &f, sizeof(bits));
    store_u32_le(bits, out);
}

inline float load_f32_le(const unsigned char* in) {
    uint32_t bits = load_u32_le(in);
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    return f;
}

inline void append_u32_le(std::string& buf, uint32_t v) {
    unsigned char tmp[4];
    store_u32_le(v, tmp);
    buf.append(reinterpret_cast<const char*>(tmp), 4);
}

inline void append_u64_le(std::string& buf, uint64_t v) {
    unsigned char tmp[8];
    store_u64_le(v, tmp);
    buf.append(reinterpret_cast<const char*>(tmp), 8);
}

std::string to_hex(const unsigned char* data, std::size_t len);
std::string to_hex(std::string_view bytes);

}  // namespace setr::util
