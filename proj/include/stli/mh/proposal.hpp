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

#ifndef STLI_MH_PROPOSAL_HPP
#define STLI_MH_PROPOSAL_HPP

#include <cmath>
#include <concepts>
#include <numbers>

#include "stli/errors.hpp"
#include "stli/numerics/linalg.hpp"
#include "stli/numerics/rng.hpp"

namespace stli {

template <class Q>
concept Proposal = requires(const Q& q, const Vec& from, const Vec& to, RngStream& rng) {
    { q.propose(from, rng) } -> std::convertible_to<Vec>;
    /// log q(to | from)
    { q.log_density(to, from) } -> std::convertible_to<double>;
};

/// theta' = theta + scale * z, z ~ N(0, I).
struct GaussianRandomWalk {
    double scale = 0.1;

    explicit GaussianRandomWalk(double s = 0.1) : scale(s) {
        if (!(s > 0.0)) throw InvalidArgument("random-walk scale must be > 0");
    }

    Vec propose(const Vec& from, RngStream& rng) const {
        Vec out(from.size());
        for (Eigen::Index i = 0; i < from.size(); ++i) out[i] = from[i] + scale * rng.normal();
        return out;
    }

    double log_density(const Vec& to, const Vec& from) const {
        const double q = (to - from).squaredNorm() / (scale * scale);
        return -0.5 * q - static_cast<double>(to.size()) * std::log(scale * std::sqrt(2.0 * std::numbers::pi));
    }
};

}  // namespace stli

#endif  // STLI_MH_PROPOSAL_HPP
