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

#include "setr/core/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "setr/core/error.hpp"

namespace setr::kernels {

namespace {

using DotFn = double (*)(const float*, const float*, std::size_t);

bool cpu_has_avx2_fma() {
#if defined(SETR_COMPILE_AVX2) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

struct Dispatch {
    DotFn fn;
    Backend backend;
};

Dispatch pick_default() {
    const char* env = std::getenv("SETR_KERNEL");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return {dot_f32_scalar, Backend::Scalar};
#if defined(SETR_COMPILE_AVX2)
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2_fma()) {
            return {dot_f32_avx2, Backend::Avx2};
        }
#endif
        // Unknown or unsupported request falls back to scalar.
        return {dot_f32_scalar, Backend::Scalar};
    }
#if defined(SETR_COMPILE_AVX2)
    if (cpu_has_avx2_fma()) return {dot_f32_avx2, Backend::Avx2};
#endif
    return {dot_f32_scalar, Backend::Scalar};
}

std::atomic<const Dispatch*> g_dispatch{nullptr};

const Dispatch& current() {
    const Dispatch* d = g_dispatch.load(std::memory_order_acquire);
    if (d == nullptr) {
        static Dispatch initial = pick_default();
        const Dispatch* expected = nullptr;
        g_dispatch.compare_exchange_strong(expected, &initial, std::memory_order_acq_rel);
        d = g_dispatch.load(std::memory_order_acquire);
    }
    return *d;
}

}  // namespace

const char* backend_name(Backend backend) {
    switch (backend) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
    }
    return "unknown";
}

Backend active_backend() { return current().backend; }

bool backend_available(Backend backend) {
    switch (backend) {
        case Backend::Scalar: return true;
        case Backend::Avx2: return cpu_has_avx2_fma();
    }
    return false;
}

void force_backend(Backend backend) {
    static Dispatch forced;
    if (!backend_available(backend)) {
        throw_error(ErrorCode::InvalidConfig,
                    std::string("kernel backend '") + backend_name(backend) + "' not available");
    }
    switch (backend) {
        case Backend::Scalar: forced = {dot_f32_scalar, Backend::Scalar}; break;
        case Backend::Avx2:
#if defined(SETR_COMPILE_AVX2)
            forced = {dot_f32_avx2, Backend::Avx2};
            break;
#else
            throw_error(ErrorCode::InvalidConfig, "avx2 kernel not compiled in");
#endif
    }
    g_dispatch.store(&forced, std::memory_order_release);
}

double dot_f32(const float* a, const float* b, std::size_t n) {
    return current().fn(a, b, n);
}

}  // namespace setr::kernels
