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

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "stli/dsgld/dsgld.hpp"
#include "stli/models/synthetic.hpp"

namespace stli {
namespace {

Dataset points(std::size_t n, std::uint64_t seed, double mean = 0.0) {
    RngStream rng(seed, 1);
    return gaussian_points(n, mean, 1.0, rng);
}

SgldConfig fixed_step(double eps, std::size_t batch, std::size_t burn_in = 0) {
    SgldConfig c;
    c.a = 1e-12;
    c.eps_min = eps;
    c.batch_size = batch;
    c.burn_in = burn_in;
    c.iterations = burn_in;
    return c;
}

TEST(Compensation, Examples) {
    const std::vector<WorkerSpec> same{{0, 50, 1.0, 1.0}, {50, 100, 1.0, 1.0}};
    EXPECT_EQ(compensation_scales(same), (std::vector<double>{1.0, 1.0}));
    const std::vector<WorkerSpec> speeds{{0, 50, 2.0, 1.0}, {50, 100, 1.0, 1.0}};
    EXPECT_EQ(compensation_scales(speeds), (std::vector<double>{0.5, 1.0}));
    const std::vector<WorkerSpec> one{{0, 100, 3.0, 1.0}};
    EXPECT_EQ(compensation_scales(one), std::vector<double>{1.0});
    const std::vector<WorkerSpec> shards{{0, 80, 1.0, 1.0}, {80, 100, 1.0, 1.0}};
    const auto s = compensation_scales(shards);
    EXPECT_DOUBLE_EQ(s[0], 1.0);
    EXPECT_DOUBLE_EQ(s[1], 0.25);
    EXPECT_THROW(compensation_scales({}), InvalidArgument);
}

TEST(Partition, FractionsAndErrors) {
    const auto w = partition_workers(1000, {0.8, 0.2}, {1.0, 2.0});
    ASSERT_EQ(w.size(), 2u);
    EXPECT_EQ(w[0].shard_size(), 800u);
    EXPECT_EQ(w[1].begin, 800u);
    EXPECT_EQ(w[1].end, 1000u);
    EXPECT_EQ(w[1].speed, 2.0);
    EXPECT_THROW(partition_workers(10, {0.5}, {1.0, 1.0}), InvalidArgument);
    EXPECT_THROW(partition_workers(10, {0.0, 1.0}, {1.0, 1.0}), EmptyShard);
}

TEST(Validation, ShardsMustPartitionData) {
    EXPECT_THROW(validate_workers({{0, 0, 1, 1}, {0, 10, 1, 1}}, 10, 1), EmptyShard);
    EXPECT_THROW(validate_workers({{0, 4, 1, 1}, {5, 10, 1, 1}}, 10, 1), InvalidArgument);
    EXPECT_THROW(validate_workers({{0, 4, 1, 1}, {4, 9, 1, 1}}, 10, 1), InvalidArgument);
    EXPECT_THROW(validate_workers({{0, 4, 1, 1}, {4, 10, 1, 1}}, 10, 5), SizeExceedsDataset);
    EXPECT_NO_THROW(validate_workers({{4, 10, 1, 1}, {0, 4, 1, 1}}, 10, 4));
}

TEST(RunDsgld, SingleWorkerEqualsSgld) {
    const Dataset data = points(200, 1, 1.0);
    const auto model = gaussian_mean_model(1.0, GaussianPrior{0.0, 10.0});
    SgldConfig cfg;
    cfg.a = 1e-3;
    cfg.batch_size = 20;
    SimSchedule sched;
    sched.round_length = 5.0;
    sched.rounds = 60;
    RngStream rng(1, 3);
    const DsgldRun d = run_dsgld(data, model, {{0, 200, 1.0, 1.0}}, sched, cfg, Vec::Zero(1), rng);

    SgldConfig plain = cfg;
    plain.iterations = 300;
    RngStream child = rng.split(0);
    const SgldRun s = run_sgld(model, data, plain, Vec::Zero(1), child);
    ASSERT_EQ(d.chains.size(), 1u);
    ASSERT_EQ(d.chains[0].size(), s.trace.size());
    for (std::size_t t = 0; t < s.trace.size(); ++t) {
        EXPECT_EQ(d.chains[0].steps[t].theta, s.trace.steps[t].theta);
        EXPECT_EQ(d.chains[0].steps[t].batch_hash, s.trace.steps[t].batch_hash);
        EXPECT_EQ(d.chains[0].steps[t].stepsize, s.trace.steps[t].stepsize);
    }
}

TEST(RunDsgld, DeterministicPerSeed) {
    const Dataset data = points(300, 2);
    const auto workers = partition_workers(300, {0.5, 0.5}, {2.0, 1.0});
    SimSchedule sched;
    sched.rounds = 50;
    sched.round_length = 2.0;
    RngStream a(2, 3), b(2, 3);
    const auto x = run_dsgld(data, gaussian_mean_model(1.0), workers, sched, fixed_step(1e-4, 10), Vec::Zero(1), a);
    const auto y = run_dsgld(data, gaussian_mean_model(1.0), workers, sched, fixed_step(1e-4, 10), Vec::Zero(1), b);
    for (std::size_t c = 0; c < x.chains.size(); ++c)
        for (std::size_t t = 0; t < x.chains[c].size(); ++t)
            EXPECT_EQ(x.chains[c].steps[t].theta, y.chains[c].steps[t].theta);
}

TEST(RunDsgld, EveryChainOwnedByOneWorkerPerRound) {
    const Dataset data = points(300, 3);
    const auto workers = partition_workers(300, {0.3, 0.3, 0.4}, {1.0, 2.0, 3.0});
    SimSchedule sched;
    sched.rounds = 40;
    RngStream rng(3, 3);
    DsgldOptions opt;
    opt.chains = 5;
    const auto run = run_dsgld(data, gaussian_mean_model(1.0), workers, sched, fixed_step(1e-4, 10), Vec::Zero(1), rng, opt);
    ASSERT_EQ(run.events.size(), 40u * 5u);
    std::vector<std::size_t> last(5, SIZE_MAX);
    std::vector<std::size_t> steps(5, 0);
    for (std::size_t r = 0; r < 40; ++r) {
        for (std::size_t c = 0; c < 5; ++c) {
            const DsgldEvent& e = run.events[r * 5 + c];
            EXPECT_EQ(e.round, r);
            EXPECT_EQ(e.chain, c);
            EXPECT_LT(e.worker, 3u);
            EXPECT_NE(e.worker, last[c]) << "a migrating chain always changes worker";
            EXPECT_EQ(e.steps, steps_per_round(workers[e.worker], 1.0));
            last[c] = e.worker;
            steps[c] += e.steps;
        }
    }
    for (std::size_t c = 0; c < 5; ++c) {
        EXPECT_EQ(run.chains[c].size(), steps[c]);
        for (const auto& s : run.chains[c].steps) {
            const WorkerSpec& w = workers[static_cast<std::size_t>(s.worker)];
            EXPECT_DOUBLE_EQ(s.stepsize, 1e-4 * run.scales[static_cast<std::size_t>(s.worker)]);
            EXPECT_GE(w.shard_size(), s.batch_size);
        }
    }
}

TEST(RunDsgld, ExchangeIsADerangement) {
    const Dataset data = points(400, 4);
    const auto workers = partition_workers(400, {0.25, 0.25, 0.25, 0.25}, {1, 1, 1, 1});
    SimSchedule sched;
    sched.rounds = 30;
    sched.exchange = true;
    RngStream rng(4, 3);
    const auto run =
        run_dsgld(data, gaussian_mean_model(1.0), workers, sched, fixed_step(1e-4, 10), Vec::Zero(1), rng);
    for (std::size_t r = 0; r < 30; ++r) {
        std::set<std::size_t> owners;
        for (std::size_t c = 0; c < 4; ++c) {
            const DsgldEvent& e = run.events[r * 4 + c];
            owners.insert(e.worker);
            if (r > 0) EXPECT_NE(e.worker, run.events[(r - 1) * 4 + c].worker);
        }
        EXPECT_EQ(owners.size(), 4u);
    }
    DsgldOptions opt;
    opt.chains = 3;
    EXPECT_THROW(run_dsgld(data, gaussian_mean_model(1.0), workers, sched, fixed_step(1e-4, 10), Vec::Zero(1), rng, opt),
                 InvalidArgument);
}

TEST(RunDsgld, CompensationBalancesDriftPerRound) {
    // Worker 0 runs twice as fast; with compensation each round moves a
    // chain by the same expected amount wherever it runs.
    const Dataset data = points(1000, 5);
    const auto workers = partition_workers(1000, {0.5, 0.5}, {2.0, 1.0});
    SimSchedule sched;
    sched.rounds = 1;
    const int reps = 2000;
    for (bool compensate : {true, false}) {
        DsgldOptions opt;
        opt.compensate = compensate;
        double s0 = 0, s1 = 0, q0 = 0, q1 = 0;
        for (int r = 0; r < reps; ++r) {
            RngStream rng(5, static_cast<std::uint64_t>(r));
            const auto run = run_dsgld(data, gaussian_mean_model(1.0), workers, sched, fixed_step(1e-6, 50),
                                       Vec::Constant(1, 3.0), rng, opt);
            const double d0 = run.chains[0].steps.back().theta[0] - 3.0;
            const double d1 = run.chains[1].steps.back().theta[0] - 3.0;
            s0 += d0;
            s1 += d1;
            q0 += d0 * d0;
            q1 += d1 * d1;
        }
        const double m0 = s0 / reps, m1 = s1 / reps;
        const double se = std::sqrt((q0 / reps - m0 * m0 + q1 / reps - m1 * m1) / reps);
        if (compensate)
            EXPECT_LT(std::abs(m0 - m1), 3.0 * se);
        else
            EXPECT_GT(std::abs(m0 - m1), 10.0 * se);
    }
}

TEST(RunDsgld, TwoEqualWorkersMatchPosterior) {
    const Dataset data = points(1000, 6, 0.5);
    const auto model = gaussian_mean_model(1.0, GaussianPrior{0.0, 10.0});
    const auto post = conjugate_posterior(model, data);
    const auto workers = partition_workers(1000, {0.5, 0.5}, {1.0, 1.0});
    SimSchedule sched;
    sched.round_length = 2.0;
    sched.rounds = 10000;
    RngStream rng(6, 3);
    const auto run = run_dsgld(data, model, workers, sched, fixed_step(1e-4, 50, 500), post.mean, rng);
    const double sd = std::sqrt(post.variance);
    EXPECT_LT(std::abs(run.pooled_mean()[0] - post.mean[0]), 0.15 * sd);
}

TEST(RunDsgld, RejectsBadInputs) {
    const Dataset data = points(100, 7);
    SimSchedule sched;
    RngStream rng(7, 3);
    const auto workers = partition_workers(100, {0.5, 0.5}, {1, 1});
    EXPECT_THROW(run_dsgld(data, gaussian_mean_model(1.0), workers, sched, fixed_step(1e-4, 60), Vec::Zero(1), rng),
                 SizeExceedsDataset);
    EXPECT_THROW(run_dsgld(data, gaussian_mean_model(1.0), workers, sched, fixed_step(1e-4, 10), Vec::Zero(2), rng),
                 DimensionMismatch);
    sched.round_length = 0.0;
    EXPECT_THROW(run_dsgld(data, gaussian_mean_model(1.0), workers, sched, fixed_step(1e-4, 10), Vec::Zero(1), rng),
                 InvalidArgument);
}

}  // namespace
}  // namespace stli
