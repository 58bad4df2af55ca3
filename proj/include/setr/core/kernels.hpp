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
#include <string>

namespace setr::kernels {

// Dot product of two fp32 vectors, accumulated in fp64.
//
// Every backend uses the same fixed accumulation order so results are
// bit-identical regardless of which kernel runs:
//   - element i contributes double(a[i]) * double(b[i]) to lane (i mod 8);
//     each product is exact in fp64 (24-bit x 24-bit mantissas), so fused
//     multiply-add and separate multiply/add agree bit for bit;
//   - the 8 lane sums combine as
//     ((l0+l1) + (l2+l3)) + ((l4+l5) + (l6+l7)).
// dot(a, b) == dot(b, a) exactly under this order.

double dot_f32_scalar(const float* a, const float* b, std::size_t n);

#if defined(SETR_COMPILE_AVX2)
double dot_f32_avx2(const float* a, const float* b, std::size_t n);
#endif

enum class Backend { Scalar, Avx2 };

const char* backend_name(Backend backend);

// Backend chosen at startup: AVX2 when the CPU supports AVX2+FMA and the
// build carries the kernel, else scalar. SETR_KERNEL=scalar|avx2 overrides.
Backend active_backend();

// Test hook. Throws InvalidConfig if the backend is not available here.
void force_backend(Backend backend);

bool backend_available(Backend backend);

// Dispatched entry point used by all scoring paths.
double dot_f32(const float* a, const float* b, std::size_t n);

}  // namespace setr::kernels
