// SPDX-License-Identifier: Apache-2.0
//
// risjrc: link-level simulation of RIS-assisted joint radar-communication
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "risjrc/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace risjrc
{

/// Identifies a family of Monte Carlo streams; trial t draws from
/// derive_seed(master, {experiment, point, t, extra}).
struct StreamKey
{
    std::uint64_t master = 1;
    std::uint64_t experiment = 0;
    std::uint64_t point = 0;

    Rng trial_rng(std::uint64_t trial, std::uint64_t extra = 0) const
    {
        return Rng(trial_seed(trial, extra));
    }

    std::uint64_t trial_seed(std::uint64_t trial, std::uint64_t extra = 0) const
    {
        return derive_seed(master, {experiment, point, trial, extra});
    }
};

inline int resolve_threads(int requested)
{
    if (requested > 0)
        return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Calls fn(i) for i in [0, n) on up to `threads` workers. Work is handed out
/// in fixed chunks; fn must only write to slot i of any shared output.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn &&fn)
{
    threads = std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(std::max<std::size_t>(n, 1))));
    if (threads == 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    constexpr std::size_t chunk = 64;
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            try
            {
                for (;;)
                {
                    const std::size_t begin = next.fetch_add(chunk);
                    if (begin >= n)
                        break;
                    const std::size_t end = std::min(n, begin + chunk);
                    for (std::size_t i = begin; i < end; ++i)
                        fn(i);
                }
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        });
    for (auto &th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace risjrc
