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

#ifndef STLI_MODELS_MINIBATCH_HPP
#define STLI_MODELS_MINIBATCH_HPP

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stli/errors.hpp"
#include "stli/numerics/rng.hpp"

namespace stli {

/// Index set drawn without replacement from [0, N).
struct Minibatch {
    std::vector<std::size_t> indices;

    std::size_t size() const noexcept { return indices.size(); }
};

/// Lazily shuffled permutation of [0, N). The first n entries after
/// grow_to(n) are a uniform without-replacement sample, and growing keeps
/// every earlier index, so successive batches are nested.
class NestedSampler {
public:
    explicit NestedSampler(std::size_t population) : perm_(population) {
        std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    }

    std::size_t population() const noexcept { return perm_.size(); }
    std::size_t drawn() const noexcept { return drawn_; }

    void grow_to(std::size_t n, RngStream& rng) {
        if (n > perm_.size())
            throw SizeExceedsDataset("batch " + std::to_string(n) + " > N=" + std::to_string(perm_.size()));
        for (; drawn_ < n; ++drawn_) {
            const std::size_t j = drawn_ + static_cast<std::size_t>(rng.below(perm_.size() - drawn_));
            std::swap(perm_[drawn_], perm_[j]);
        }
    }

    std::span<const std::size_t> batch() const { return {perm_.data(), drawn_}; }

    Minibatch minibatch() const { return {std::vector<std::size_t>(perm_.begin(), perm_.begin() + static_cast<std::ptrdiff_t>(drawn_))}; }

private:
    std::vector<std::size_t> perm_;
    std::size_t drawn_ = 0;
};

inline Minibatch sample_minibatch(std::size_t population, std::size_t n, RngStream& rng) {
    if (n < 1) throw InvalidArgument("minibatch size must be >= 1");
    NestedSampler s(population);
    s.grow_to(n, rng);
    return s.minibatch();
}

/// FNV-1a over the index values; used to tag trace rows with their batch.
inline std::uint64_t hash_indices(std::span<const std::size_t> idx) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t v : idx) {
        for (int b = 0; b < 8; ++b) {
            h ^= (static_cast<std::uint64_t>(v) >> (8 * b)) & 0xFF;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

}  // namespace stli

#endif  // STLI_MODELS_MINIBATCH_HPP
