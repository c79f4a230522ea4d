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

#ifndef STLI_CHAIN_HPP
#define STLI_CHAIN_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "stli/errors.hpp"
#include "stli/numerics/linalg.hpp"

namespace stli {

/// One transition of any sampler in the library. Fields a sampler does not
/// use keep their defaults.
struct ChainStep {
    std::size_t iteration = 0;
    Vec theta;
    double stepsize = 0.0;
    /// Data items touched: the SGLD minibatch size or the MH test's n_used.
    std::size_t batch_size = 0;
    std::uint64_t batch_hash = 0;
    /// Counter of the noise stream before this step's injected noise.
    std::uint64_t noise_marker = 0;
    std::optional<bool> accepted;
    double error_estimate = 0.0;
    std::size_t sim_calls = 0;
    /// The decision was forced by an acquisition cap.
    bool forced = false;
    int worker = -1;
};

struct ChainTrace {
    std::vector<ChainStep> steps;
    std::size_t burn_in = 0;
    std::size_t init_sim_calls = 0;

    std::size_t size() const noexcept { return steps.size(); }
    bool empty() const noexcept { return steps.empty(); }

    /// Post-burn-in samples as rows.
    Mat samples() const {
        if (steps.size() <= burn_in) throw EmptyTrace("no samples after burn-in");
        const auto n = static_cast<Eigen::Index>(steps.size() - burn_in);
        Mat out(n, steps.front().theta.size());
        for (Eigen::Index i = 0; i < n; ++i) out.row(i) = steps[burn_in + static_cast<std::size_t>(i)].theta.transpose();
        return out;
    }

    Vec mean() const { return samples().colwise().mean().transpose(); }

    Vec variance() const {
        const Mat s = samples();
        const Mat c = s.rowwise() - s.colwise().mean();
        return (c.array().square().colwise().sum() / static_cast<double>(s.rows() - 1)).transpose();
    }

    std::size_t total_sim_calls() const {
        std::size_t total = init_sim_calls;
        for (const auto& s : steps) total += s.sim_calls;
        return total;
    }

    double acceptance_rate() const {
        std::size_t acc = 0, n = 0;
        for (const auto& s : steps)
            if (s.accepted) {
                ++n;
                acc += *s.accepted ? 1 : 0;
            }
        return n ? static_cast<double>(acc) / static_cast<double>(n) : 0.0;
    }
};

/// Monte Carlo standard error of the mean of a scalar series by
/// non-overlapping batch means (sqrt(len) batches).
inline double batch_means_stderr(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 4) throw EmptyTrace("batch_means_stderr needs at least 4 values");
    const auto batches = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    const std::size_t len = n / batches;
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t k = 0; k < len; ++k) means[b] += x[b * len + k];
        means[b] /= static_cast<double>(len);
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= static_cast<double>(batches);
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    var /= static_cast<double>(batches - 1);
    return std::sqrt(var / static_cast<double>(batches));
}

}  // namespace stli

#endif  // STLI_CHAIN_HPP
