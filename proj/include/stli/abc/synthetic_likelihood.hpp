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

#ifndef STLI_ABC_SYNTHETIC_LIKELIHOOD_HPP
#define STLI_ABC_SYNTHETIC_LIKELIHOOD_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>

#include "stli/abc/simulator.hpp"
#include "stli/chain.hpp"
#include "stli/errors.hpp"
#include "stli/mh/proposal.hpp"
#include "stli/numerics/linalg.hpp"
#include "stli/numerics/rng.hpp"

namespace stli {

/// Added to the diagonal of the fitted covariance before factorizing.
inline constexpr double kSyntheticLikelihoodRidge = 1e-8;

/// log N(y; m, S + ridge I), with m and S the sample mean and covariance of
/// s_count simulator draws at theta.
inline double synthetic_likelihood(const Vec& theta, std::size_t s_count, Simulator& sim, RngStream& rng,
                                   const Vec& y, double ridge = kSyntheticLikelihoodRidge) {
    const Eigen::Index k = sim.stat_dim();
    if (y.size() != k) throw DimensionMismatch("observed statistic length");
    if (s_count < static_cast<std::size_t>(k) + 2) throw InvalidArgument("synthetic likelihood needs s_count >= k + 2");
    if (!(ridge >= 0.0)) throw InvalidArgument("ridge must be >= 0");

    Mat draws(static_cast<Eigen::Index>(s_count), k);
    for (Eigen::Index i = 0; i < draws.rows(); ++i) draws.row(i) = sim.run(theta, rng).transpose();
    const Vec mean = draws.colwise().mean().transpose();
    const Mat c = draws.rowwise() - mean.transpose();
    Mat cov = c.transpose() * c / static_cast<double>(s_count - 1);
    cov.diagonal().array() += ridge;

    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().minCoeff() > 0.0))
        throw DegenerateCovariance("simulated statistics have a singular covariance");
    const Vec r = y - mean;
    const double quad = llt.matrixL().solve(r).squaredNorm();
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double out = -0.5 * (quad + logdet + static_cast<double>(k) * std::log(2.0 * std::numbers::pi));
    if (!std::isfinite(out)) throw DegenerateCovariance("synthetic likelihood is not finite");
    return out;
}

struct SlChainConfig {
    std::size_t steps = 1000;
    std::size_t burn_in = 0;
    std::size_t s_count = 10;
    /// Re-simulate at the current point every step instead of reusing its value.
    bool resimulate_current = false;

    void validate(Eigen::Index stat_dim) const {
        if (s_count < static_cast<std::size_t>(stat_dim) + 2) throw InvalidArgument("sl: s_count must be >= k + 2");
        if (burn_in > steps) throw InvalidArgument("sl: burn-in exceeds steps");
    }
};

/// MH on the synthetic likelihood with fresh simulations at every proposal.
template <Proposal Q>
ChainTrace sl_mh_chain(Simulator& sim, const AbcPrior& prior, const Q& proposal, const Vec& y, const SlChainConfig& cfg,
                       Vec theta, RngStream& rng) {
    cfg.validate(sim.stat_dim());
    if (theta.size() != sim.theta_dim()) throw DimensionMismatch("initial theta length");
    RngStream sims = rng.split(1);

    ChainTrace trace;
    trace.burn_in = cfg.burn_in;
    trace.steps.reserve(cfg.steps);
    double lp_cur = prior.log_density(theta);
    if (!std::isfinite(lp_cur)) throw InvalidArgument("initial theta outside the prior support");
    double ll_cur = synthetic_likelihood(theta, cfg.s_count, sim, sims, y);
    trace.init_sim_calls = cfg.s_count;

    for (std::size_t t = 0; t < cfg.steps; ++t) {
        const Vec prop = proposal.propose(theta, rng);
        const double log_u = std::log(rng.uniform_open());
        const double lp_prop = prior.log_density(prop);
        std::size_t calls = 0;
        bool acc = false;
        if (cfg.resimulate_current) {
            ll_cur = synthetic_likelihood(theta, cfg.s_count, sim, sims, y);
            calls += cfg.s_count;
        }
        if (std::isfinite(lp_prop)) {
            const double ll_prop = synthetic_likelihood(prop, cfg.s_count, sim, sims, y);
            calls += cfg.s_count;
            const double log_ratio = lp_prop + ll_prop - lp_cur - ll_cur + proposal.log_density(theta, prop) -
                                     proposal.log_density(prop, theta);
            acc = log_u <= log_ratio;
            if (acc) {
                theta = prop;
                lp_cur = lp_prop;
                ll_cur = ll_prop;
            }
        }
        ChainStep s;
        s.iteration = t;
        s.theta = theta;
        s.accepted = acc;
        s.sim_calls = calls;
        trace.steps.push_back(std::move(s));
    }
    return trace;
}

}  // namespace stli

#endif  // STLI_ABC_SYNTHETIC_LIKELIHOOD_HPP
