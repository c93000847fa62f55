// Copyright 2026 The zne-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Counter-based random streams. A stream is keyed by a user seed plus a path
// of stream ids (e.g. {iteration, stretch index, group}), so every consumer
// draws from its own reproducible sequence regardless of scheduling order.
// Uniform and integer draws are written out by hand: the standard library
// distributions are not specified bit-for-bit across implementations.

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>

#include "zne/errors.hpp"

namespace zne {

namespace detail {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

class RandomStream {
   public:
    explicit RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids = {})
        : RandomStream(seed, std::span<const std::uint64_t>(ids.begin(), ids.size())) {}

    RandomStream(std::uint64_t seed, std::span<const std::uint64_t> ids) : key_(detail::mix64(seed)) {
        for (std::uint64_t id : ids) key_ = detail::mix64(key_ ^ detail::mix64(id + 0x632be59bd9b4e019ULL));
    }

    /// Independent child stream.
    RandomStream child(std::uint64_t id) const {
        RandomStream out = *this;
        out.key_ = detail::mix64(key_ ^ detail::mix64(id + 0x632be59bd9b4e019ULL));
        out.counter_ = 0;
        return out;
    }

    std::uint64_t next_u64() { return detail::mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), unbiased by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw UsageError("below(0) is empty");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do r = next_u64();
        while (r >= limit);
        return r % n;
    }

    /// Random sign, +1 or -1.
    double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

    /// Standard normal via Box-Muller (one draw per call, second discarded).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

   private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace zne
