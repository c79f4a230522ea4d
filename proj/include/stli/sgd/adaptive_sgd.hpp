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

#ifndef STLI_SGD_ADAPTIVE_SGD_HPP
#define STLI_SGD_ADAPTIVE_SGD_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "stli/errors.hpp"
#include "stli/lsnr/lsnr.hpp"
#include "stli/models/dataset.hpp"
#include "stli/models/minibatch.hpp"
#include "stli/models/objective.hpp"
#include "stli/numerics/rng.hpp"

namespace stli {

enum class TrainMode {
    /// Grow the batch when the criterion fires; stop once it fires at n = N.
    Adaptive,
    /// Always use all N rows and only record when the criterion fires.
    FullBatchMonitor,
};

struct TrainConfig {
    std::size_t initial_batch = 100;
    double growth_factor = 2.0;
    double stepsize = 0.5;
    double delta = 0.5;
    std::size_t max_iterations = 1000;
    std::size_t check_period = 1;
    TrainMode mode = TrainMode::Adaptive;
    LsnrOptions lsnr;

    void validate() const {
        if (initial_batch < 2) throw InvalidArgument("initial batch must be >= 2");
        if (!(growth_factor > 1.0)) throw InvalidArgument("growth factor must be > 1");
        if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must be in (0,1)");
        if (!(stepsize > 0.0)) throw InvalidArgument("stepsize must be > 0");
        if (check_period < 1) throw InvalidArgument("check period must be >= 1");
        if (max_iterations < 1) throw InvalidArgument("max iterations must be >= 1");
    }
};

struct TrainRecord {
    std::size_t iteration = 0;
    std::size_t batch_size = 0;
    double theta_norm = 0.0;
    /// Mean per-datum objective on the full dataset before this iteration's update.
    double objective = 0.0;
    std::optional<LsnrReport> report;
};

enum class StopReason { LsnrExhausted, MaxIterations };

inline const char* to_string(StopReason r) {
    return r == StopReason::LsnrExhausted ? "lsnr-exhausted" : "max-iterations";
}

struct TrainTrace {
    std::vector<TrainRecord> records;
    Vec theta;
    StopReason reason = StopReason::MaxIterations;
    /// First iteration at which the criterion fired (any batch size).
    std::optional<std::size_t> first_fire;
    /// First iteration with LSNR < 1.
    std::optional<std::size_t> first_below_one;
};

/// min(ceil(factor * n), N).
inline std::size_t batch_growth_policy(std::size_t n, std::size_t population, double factor) {
    if (n >= population) return population;
    const auto grown = static_cast<std::size_t>(std::ceil(factor * static_cast<double>(n)));
    return std::min(std::max(grown, n + 1), population);
}

/// Gradient ascent on the mean per-datum objective with LSNR-driven batch
/// growth. Between growth events the batch indices stay fixed; growth draws
/// new indices and keeps the old ones.
template <ObjectiveModel M>
TrainTrace train(const M& model, const Dataset& data, const TrainConfig& cfg, Vec theta, RngStream& rng) {
    cfg.validate();
    if (theta.size() != model.param_dim(data)) throw DimensionMismatch("initial theta length");
    const std::size_t big_n = data.size();
    NestedSampler sampler(big_n);
    std::size_t n = cfg.mode == TrainMode::FullBatchMonitor ? big_n : std::min(cfg.initial_batch, big_n);
    sampler.grow_to(n, rng);

    TrainTrace trace;
    for (std::size_t t = 0; t < cfg.max_iterations; ++t) {
        const GradientMoments m = gradient_moments(model, data, sampler.batch(), theta);
        TrainRecord rec;
        rec.iteration = t;
        rec.batch_size = n;
        rec.theta_norm = theta.norm();
        rec.objective = mean_objective(model, data, theta);

        bool fired = false;
        if (t % cfg.check_period == 0) {
            rec.report = lsnr(m, cfg.delta, cfg.lsnr);
            fired = rec.report->stop;
            if (fired && !trace.first_fire) trace.first_fire = t;
            if (rec.report->lsnr < 1.0 && !trace.first_below_one) trace.first_below_one = t;
        }
        trace.records.push_back(rec);

        if (fired && cfg.mode == TrainMode::Adaptive) {
            if (n == big_n) {
                trace.reason = StopReason::LsnrExhausted;
                trace.theta = theta;
                return trace;
            }
            n = batch_growth_policy(n, big_n, cfg.growth_factor);
            sampler.grow_to(n, rng);
            continue;
        }
        theta += cfg.stepsize * m.mean;
    }
    trace.reason = StopReason::MaxIterations;
    trace.theta = theta;
    return trace;
}

}  // namespace stli

#endif  // STLI_SGD_ADAPTIVE_SGD_HPP
