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

// Compiled with -mavx2 -mfma. Must only be reached after a runtime CPU check.

#include "setr/core/kernels.hpp"

#if defined(SETR_COMPILE_AVX2)

#include <immintrin.h>

namespace setr::kernels {

double dot_f32_avx2(const float* a, const float* b, std::size_t n) {
    // acc_lo holds lanes 0..3 (elements 8k+0..3), acc_hi lanes 4..7.
    __m256d acc_lo = _mm256_setzero_pd();
    __m256d acc_hi = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 va = _mm256_loadu_ps(a + i);
        __m256 vb = _mm256_loadu_ps(b + i);
        __m256d a_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(va));
        __m256d b_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(vb));
        acc_lo = _mm256_fmadd_pd(a_lo, b_lo, acc_lo);
        __m256d a_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(va, 1));
        __m256d b_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1));
        acc_hi = _mm256_fmadd_pd(a_hi, b_hi, acc_hi);
    }

    alignas(32) double lanes[8];
    _mm256_store_pd(lanes, acc_lo);
    _mm256_store_pd(lanes + 4, acc_hi);

    // Tail starts at a multiple of 8, so i & 7 lands each element in the same
    // lane the vector loop would have used.
    for (; i < n; ++i) {
        lanes[i & 7] += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }

    return ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) +
           ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7]));
}

}  // namespace setr::kernels

#endif  // SETR_COMPILE_AVX2
