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

// Distributed SGLD on a simulated clock.
//
// Workers own contiguous shards and run at fixed speeds. In every round each
// logical chain performs floor(speed * round_length) SGLD steps on the worker
// that holds it, using minibatches from that worker's shard only, and then
// moves to another worker chosen uniformly at random.

#ifndef STLI_DSGLD_DSGLD_HPP
#define STLI_DSGLD_DSGLD_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "stli/chain.hpp"
#include "stli/errors.hpp"
#include "stli/models/dataset.hpp"
#include "stli/models/minibatch.hpp"
#include "stli/models/objective.hpp"
#include "stli/numerics/linalg.hpp"
#include "stli/numerics/rng.hpp"
#include "stli/sgld/sgld.hpp"

namespace stli {

struct WorkerSpec {
    /// Shard = rows [begin, end).
    std::size_t begin = 0;
    std::size_t end = 0;
    /// SGLD updates per simulated second.
    double speed = 1.0;
    double stepsize_scale = 1.0;

    std::size_t shard_size() const noexcept { return end > begin ? end - begin : 0; }
};

struct SimSchedule {
    double round_length = 1.0;
    std::size_t rounds = 100;
    /// Swap chains along a random derangement instead of independent migration.
    bool exchange = false;

    void validate() const {
        if (!(round_length > 0.0) || !std::isfinite(round_length)) throw InvalidArgument("round length must be > 0");
        if (rounds < 1) throw InvalidArgument("need at least one round");
    }
};

struct DsgldOptions {
    /// Logical chains; 0 means one per worker.
    std::size_t chains = 0;
    /// Replace every worker's stepsize_scale by compensation_scales().
    bool compensate = true;
};

inline std::size_t steps_per_round(const WorkerSpec& w, double round_length) {
    return static_cast<std::size_t>(std::floor(w.speed * round_length));
}

/// scale_w proportional to N_w / (speed_w * round_length), divided by the
/// largest value. With the global N/n gradient factor, a chain then moves
/// by the same expected amount per round on every worker in proportion to
/// that worker's share of the data.
inline std::vector<double> compensation_scales(const std::vector<WorkerSpec>& workers, double round_length = 1.0) {
    if (workers.empty()) throw InvalidArgument("no workers");
    std::vector<double> s;
    for (const auto& w : workers) {
        if (!(w.speed > 0.0)) throw InvalidArgument("worker speed must be > 0");
        s.push_back(static_cast<double>(w.shard_size()) / (w.speed * round_length));
    }
    const double top = *std::max_element(s.begin(), s.end());
    if (!(top > 0.0)) throw EmptyShard("all shards are empty");
    for (double& v : s) v /= top;
    return s;
}

/// Contiguous shards with the given fractions of n rows; the last shard
/// takes the rounding remainder.
inline std::vector<WorkerSpec> partition_workers(std::size_t n, const std::vector<double>& fractions,
                                                 const std::vector<double>& speeds) {
    if (fractions.empty() || fractions.size() != speeds.size())
        throw InvalidArgument("need one fraction and one speed per worker");
    std::vector<WorkerSpec> out;
    std::size_t at = 0;
    for (std::size_t w = 0; w < fractions.size(); ++w) {
        if (!(fractions[w] > 0.0)) throw EmptyShard("shard fraction must be > 0");
        const std::size_t end =
            w + 1 == fractions.size() ? n : std::min(n, at + static_cast<std::size_t>(std::llround(fractions[w] * static_cast<double>(n))));
        out.push_back({at, end, speeds[w], 1.0});
        at = end;
    }
    return out;
}

struct DsgldEvent {
    std::size_t round;
    std::size_t chain;
    std::size_t worker;
    std::size_t steps;
    double scale;
};

struct DsgldRun {
    std::vector<ChainTrace> chains;
    std::vector<DsgldEvent> events;
    std::vector<double> scales;
    double floor_used = 0.0;

    /// Post-burn-in mean over all chains' samples.
    Vec pooled_mean() const {
        Vec sum;
        std::size_t n = 0;
        for (const auto& c : chains) {
            const Mat s = c.samples();
            sum = n == 0 ? Vec(s.colwise().sum().transpose()) : Vec(sum + s.colwise().sum().transpose());
            n += static_cast<std::size_t>(s.rows());
        }
        if (n == 0) throw EmptyTrace("no samples");
        return sum / static_cast<double>(n);
    }
};

inline void validate_workers(const std::vector<WorkerSpec>& workers, std::size_t population, std::size_t batch) {
    if (workers.empty()) throw InvalidArgument("no workers");
    std::vector<std::size_t> order(workers.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return workers[a].begin < workers[b].begin; });
    std::size_t at = 0;
    for (std::size_t w : order) {
        const WorkerSpec& s = workers[w];
        if (s.shard_size() == 0) throw EmptyShard("worker " + std::to_string(w) + " has an empty shard");
        if (s.begin != at) throw InvalidArgument("shards do not partition the dataset");
        if (!(s.speed > 0.0)) throw InvalidArgument("worker speed must be > 0");
        if (!(s.stepsize_scale > 0.0)) throw InvalidArgument("worker stepsize scale must be > 0");
        if (batch > s.shard_size()) throw SizeExceedsDataset("batch size exceeds shard of worker " + std::to_string(w));
        at = s.end;
    }
    if (at != population) throw InvalidArgument("shards do not partition the dataset");
}

/// Chain c draws its minibatches and noise from rng.split(c); handoffs use
/// rng.split(chains). With one worker the trace equals run_sgld driven by
/// rng.split(0).
template <ObjectiveModel M>
DsgldRun run_dsgld(const Dataset& data, const M& model, std::vector<WorkerSpec> workers, const SimSchedule& schedule,
                   const SgldConfig& cfg, const Vec& theta0, RngStream& rng, const DsgldOptions& opt = {}) {
    schedule.validate();
    validate_workers(workers, data.size(), cfg.batch_size);
    SgldConfig checked = cfg;  // iterations come from the schedule
    checked.iterations = std::max(cfg.iterations, cfg.burn_in);
    checked.validate(data.size());
    if (cfg.precondition) throw InvalidArgument("dsgld does not support preconditioning");
    if (theta0.size() != model.param_dim(data)) throw DimensionMismatch("initial theta length");
    const std::size_t n_workers = workers.size();
    const std::size_t n_chains = opt.chains ? opt.chains : n_workers;
    if (schedule.exchange && n_chains != n_workers) throw InvalidArgument("exchange needs one chain per worker");

    DsgldRun run;
    if (opt.compensate) {
        run.scales = compensation_scales(workers, schedule.round_length);
        for (std::size_t w = 0; w < n_workers; ++w) workers[w].stepsize_scale = run.scales[w];
    } else {
        for (const auto& w : workers) run.scales.push_back(w.stepsize_scale);
    }
    if (cfg.eps_min) {
        run.floor_used = *cfg.eps_min;
    } else {
        const double eps_star =
            crossover_stepsize(stochastic_gradient_variance(model, data, theta0, cfg.batch_size).mean());
        run.floor_used = std::isfinite(eps_star) ? eps_star : 0.0;
    }

    std::vector<Vec> theta(n_chains, theta0);
    std::vector<RngStream> chain_rng;
    std::vector<std::size_t> owner(n_chains);
    for (std::size_t c = 0; c < n_chains; ++c) {
        chain_rng.push_back(rng.split(c));
        owner[c] = c % n_workers;
    }
    RngStream handoff = rng.split(n_chains);
    run.chains.resize(n_chains);
    for (auto& c : run.chains) c.burn_in = cfg.burn_in;

    const double data_scale = static_cast<double>(data.size()) / static_cast<double>(cfg.batch_size);
    for (std::size_t r = 0; r < schedule.rounds; ++r) {
        for (std::size_t c = 0; c < n_chains; ++c) {
            const std::size_t w = owner[c];
            const WorkerSpec& ws = workers[w];
            const std::size_t steps = steps_per_round(ws, schedule.round_length);
            RngStream& crng = chain_rng[c];
            ChainTrace& tr = run.chains[c];
            for (std::size_t k = 0; k < steps; ++k) {
                const std::size_t t = tr.steps.size();
                const double eps = stepsize(t, cfg.a, cfg.b, cfg.gamma, run.floor_used) * ws.stepsize_scale;
                Minibatch batch = sample_minibatch(ws.shard_size(), cfg.batch_size, crng);
                for (auto& i : batch.indices) i += ws.begin;
                ChainStep step;
                step.iteration = t;
                step.stepsize = eps;
                step.batch_size = batch.size();
                step.batch_hash = hash_indices(batch.indices);
                step.noise_marker = crng.counter();
                step.worker = static_cast<int>(w);
                const Vec g = stochastic_log_posterior_grad(model, data, theta[c], batch.indices, data_scale);
                theta[c] = langevin_update(theta[c], g, eps, crng, cfg.inject_noise);
                step.theta = theta[c];
                tr.steps.push_back(std::move(step));
            }
            run.events.push_back({r, c, w, steps, ws.stepsize_scale});
        }
        if (n_workers < 2) continue;
        if (schedule.exchange) {
            // Random derangement by rejection: every chain changes worker.
            std::vector<std::size_t> perm(n_workers);
            for (;;) {
                std::iota(perm.begin(), perm.end(), 0);
                for (std::size_t i = n_workers - 1; i > 0; --i) std::swap(perm[i], perm[handoff.below(i + 1)]);
                bool fixed = false;
                for (std::size_t i = 0; i < n_workers; ++i) fixed = fixed || perm[i] == i;
                if (!fixed) break;
            }
            for (auto& o : owner) o = perm[o];
        } else {
            for (auto& o : owner) {
                const auto pick = static_cast<std::size_t>(handoff.below(n_workers - 1));
                o = pick >= o ? pick + 1 : pick;
            }
        }
    }
    for (auto& c : run.chains)
        if (c.burn_in > c.steps.size()) c.burn_in = c.steps.size();
    return run;
}

}  // namespace stli

#endif  // STLI_DSGLD_DSGLD_HPP
