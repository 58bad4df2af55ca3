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

#include "setr/util/fs.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <system_error>

#include "setr/core/error.hpp"

namespace setr::util {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw_error(ErrorCode::IoFailure, "read failed for " + path.string());
    return data;
}

void atomic_write_file(const std::filesystem::path& path, std::string_view bytes) {
    static std::atomic<uint64_t> counter{0};
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw_error(ErrorCode::IoFailure, "cannot create " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw_error(ErrorCode::IoFailure, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw_error(ErrorCode::IoFailure, "rename to " + path.string() + " failed");
    }
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec && !std::filesystem::is_directory(dir)) {
        throw_error(ErrorCode::IoFailure, "cannot create directory " + dir.string());
    }
}

}  // namespace setr::util
