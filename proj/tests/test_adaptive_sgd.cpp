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

#include <string>

#include "stli/models/synthetic.hpp"
#include "stli/sgd/adaptive_sgd.hpp"

namespace stli {
namespace {

Dataset points(std::size_t n, std::uint64_t seed, double mean = 1.0) {
    RngStream rng(seed, 1);
    return gaussian_points(n, mean, 1.0, rng);
}

TEST(GrowthPolicy, Examples) {
    EXPECT_EQ(batch_growth_policy(100, 1000, 2.0), 200u);
    EXPECT_EQ(batch_growth_policy(600, 1000, 2.0), 1000u);
    EXPECT_EQ(batch_growth_policy(1000, 1000, 2.0), 1000u);
    EXPECT_EQ(batch_growth_policy(3, 1000, 1.1), 4u);
    EXPECT_EQ(batch_growth_policy(10, 1000, 1.5), 15u);
}

TEST(GrowthPolicy, StrictlyGrowsUntilFull) {
    for (double f : {1.01, 1.5, 2.0, 3.0}) {
        std::size_t n = 2;
        while (n < 500) {
            const std::size_t next = batch_growth_policy(n, 500, f);
            EXPECT_GT(next, n);
            EXPECT_LE(next, 500u);
            n = next;
        }
    }
}

TEST(TrainConfig, Validation) {
    TrainConfig c;
    c.initial_batch = 1;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.growth_factor = 1.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.delta = 1.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.stepsize = 0.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    EXPECT_NO_THROW(TrainConfig{}.validate());
}

TEST(Train, StopsImmediatelyAtSampleMeanWithFullBatch) {
    const Dataset data = points(300, 1);
    const Vec mean = data.features().colwise().mean().transpose();
    TrainConfig cfg;
    cfg.initial_batch = 300;
    RngStream rng(1, 3);
    const TrainTrace t = train(gaussian_mean_model(1.0), data, cfg, mean, rng);
    EXPECT_EQ(t.reason, StopReason::LsnrExhausted);
    EXPECT_EQ(t.records.size(), 1u);
    EXPECT_EQ(t.theta, mean);
    EXPECT_EQ(t.first_fire, std::optional<std::size_t>(0));
}

TEST(Train, BatchSizesNeverShrink) {
    const Dataset data = points(2000, 2);
    TrainConfig cfg;
    cfg.initial_batch = 10;
    cfg.stepsize = 0.5;
    cfg.max_iterations = 500;
    RngStream rng(2, 3);
    const TrainTrace t = train(gaussian_mean_model(1.0), data, cfg, Vec::Constant(1, -5.0), rng);
    for (std::size_t i = 1; i < t.records.size(); ++i) EXPECT_GE(t.records[i].batch_size, t.records[i - 1].batch_size);
    EXPECT_GT(t.records.back().batch_size, 10u);
    EXPECT_EQ(t.records.front().batch_size, 10u);
}

TEST(Train, BatchFixedBetweenGrowthEvents) {
    // With delta close to 1 the criterion essentially never fires, so the
    // iterate converges to the mean of the first fixed batch.
    const Dataset data = points(500, 3);
    TrainConfig cfg;
    cfg.initial_batch = 10;
    cfg.delta = 0.999999;
    cfg.stepsize = 0.5;
    cfg.max_iterations = 200;
    RngStream rng(3, 3);
    const TrainTrace t = train(gaussian_mean_model(1.0), data, cfg, Vec::Zero(1), rng);
    ASSERT_EQ(t.records.back().batch_size, 10u);

    RngStream replay(3, 3);
    NestedSampler s(500);
    s.grow_to(10, replay);
    double mean = 0;
    for (std::size_t i : s.batch()) mean += data.features()(static_cast<Eigen::Index>(i), 0);
    mean /= 10;
    EXPECT_NEAR(t.theta[0], mean, 1e-9);
}

TEST(Train, FullBatchObjectiveIsMonotone) {
    const Dataset data = points(400, 4);
    TrainConfig cfg;
    cfg.mode = TrainMode::FullBatchMonitor;
    cfg.stepsize = 0.3;
    cfg.max_iterations = 60;
    RngStream rng(4, 3);
    const TrainTrace t = train(gaussian_mean_model(1.0), data, cfg, Vec::Constant(1, 8.0), rng);
    EXPECT_EQ(t.records.size(), 60u);
    for (std::size_t i = 1; i < t.records.size(); ++i) {
        EXPECT_GE(t.records[i].objective, t.records[i - 1].objective - 1e-12);
        EXPECT_EQ(t.records[i].batch_size, 400u);
    }
    EXPECT_EQ(t.reason, StopReason::MaxIterations);
    ASSERT_TRUE(t.first_fire.has_value());
    ASSERT_TRUE(t.first_below_one.has_value());
}

TEST(Train, NoUpdatesAfterTermination) {
    const Dataset data = points(256, 5);
    TrainConfig cfg;
    cfg.initial_batch = 8;
    cfg.stepsize = 0.5;
    cfg.max_iterations = 5000;
    RngStream rng(5, 3);
    const TrainTrace t = train(gaussian_mean_model(1.0), data, cfg, Vec::Constant(1, 3.0), rng);
    ASSERT_EQ(t.reason, StopReason::LsnrExhausted);
    const TrainRecord& last = t.records.back();
    EXPECT_EQ(last.batch_size, 256u);
    ASSERT_TRUE(last.report.has_value());
    EXPECT_TRUE(last.report->stop);
    EXPECT_LT(t.records.size(), 5000u);
    // The returned parameters are the ones the final check was made at.
    EXPECT_NEAR(t.theta.norm(), last.theta_norm, 1e-15);
}

TEST(Train, ReasonStrings) {
    EXPECT_EQ(std::string(to_string(StopReason::LsnrExhausted)), "lsnr-exhausted");
    EXPECT_EQ(std::string(to_string(StopReason::MaxIterations)), "max-iterations");
}

TEST(Train, CheckPeriodSkipsReports) {
    const Dataset data = points(100, 6);
    TrainConfig cfg;
    cfg.mode = TrainMode::FullBatchMonitor;
    cfg.check_period = 3;
    cfg.max_iterations = 9;
    RngStream rng(6, 3);
    const TrainTrace t = train(gaussian_mean_model(1.0), data, cfg, Vec::Constant(1, 4.0), rng);
    for (const auto& r : t.records) EXPECT_EQ(r.report.has_value(), r.iteration % 3 == 0);
}

TEST(Train, DeterministicPerSeed) {
    RngStream split_rng(7, 2);
    const Dataset data = spam_experiment_table(spambase_like(), split_rng);
    TrainConfig cfg;
    cfg.initial_batch = 200;
    cfg.max_iterations = 50;
    RngStream a(7, 3), b(7, 3);
    const auto x = train(LogisticModel{}, data, cfg, Vec::Zero(11), a);
    const auto y = train(LogisticModel{}, data, cfg, Vec::Zero(11), b);
    EXPECT_EQ(x.theta, y.theta);
    EXPECT_EQ(x.records.size(), y.records.size());
}

TEST(Train, RejectsWrongThetaLength) {
    const Dataset data = points(50, 8);
    RngStream rng(8, 3);
    EXPECT_THROW(train(gaussian_mean_model(1.0), data, TrainConfig{}, Vec::Zero(2), rng), DimensionMismatch);
}

}  // namespace
}  // namespace stli
