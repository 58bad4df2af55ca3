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

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>

namespace setr::util {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. fn must only write state
// owned by index i; the first exception is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

// Counting semaphore used to cap in-flight requests per endpoint.
class Semaphore {
public:
    explicit Semaphore(std::size_t permits) : permits_(permits) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return permits_ > 0; });
        --permits_;
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            ++permits_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::size_t permits_;
};

class ScopedPermit {
public:
    explicit ScopedPermit(Semaphore& sem) : sem_(sem) { sem_.acquire(); }
    ~ScopedPermit() { sem_.release(); }
    ScopedPermit(const ScopedPermit&) = delete;
    ScopedPermit& operator=(const ScopedPermit&) = delete;

private:
    Semaphore& sem_;
};

}  // namespace setr::util
