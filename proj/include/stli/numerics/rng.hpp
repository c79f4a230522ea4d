// Copyright 2026 The stli Authors
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

#ifndef STLI_NUMERICS_RNG_HPP
#define STLI_NUMERICS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace stli {

namespace detail {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based random stream.
///
/// Draw k of stream (seed, id) is a pure function of (seed, id, k), so a
/// stream can be copied, replayed, or split into child streams without any
/// shared state. Each module takes its own child stream so that adding draws
/// in one place never shifts the draws seen elsewhere.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {
        key0_ = detail::mix64(seed ^ 0x6A09E667F3BCC908ULL);
        key1_ = detail::mix64(key0_ ^ detail::mix64(stream_id + 0x3C6EF372FE94F82BULL));
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }
    std::uint64_t counter() const noexcept { return counter_; }

    /// Child stream; deterministic in (parent seed, parent id, child).
    RngStream split(std::uint64_t child) const {
        return RngStream(seed_, detail::mix64(stream_ * 0x9E3779B97F4A7C15ULL + child + 1));
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t c = counter_++;
        return detail::mix64(detail::mix64(c ^ key1_) + key0_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open() noexcept {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    /// Uniform integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller; the second variate is kept for the next call.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    bool operator==(const RngStream&) const = default;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t key0_ = 0;
    std::uint64_t key1_ = 0;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace stli

#endif  // STLI_NUMERICS_RNG_HPP
