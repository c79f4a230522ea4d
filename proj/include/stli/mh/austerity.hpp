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

// Metropolis-Hastings with a sequential test on a growing minibatch.
//
// The MH rule u <= p(theta') q(theta|theta') prod p(x_i|theta') /
//                   [p(theta) q(theta'|theta) prod p(x_i|theta)]
// is rewritten as mean_i [l(x_i; theta') - l(x_i; theta)] >= mu0 with
//
//     mu0 = (1/N) [log u + log p(theta) - log p(theta')
//                  + log q(theta'|theta) - log q(theta|theta')].
//
// The mean is estimated on a batch drawn without replacement; the batch
// grows until a t-test separates it from mu0 at level eps_conf, and at
// n = N the decision is the exact one.

#ifndef STLI_MH_AUSTERITY_HPP
#define STLI_MH_AUSTERITY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "stli/chain.hpp"
#include "stli/errors.hpp"
#include "stli/mh/proposal.hpp"
#include "stli/models/dataset.hpp"
#include "stli/models/minibatch.hpp"
#include "stli/models/objective.hpp"
#include "stli/numerics/distributions.hpp"
#include "stli/numerics/rng.hpp"

namespace stli {

inline double mu0_from_log_u(double log_u, double log_prior_cur, double log_prior_prop, double log_q_forward,
                             double log_q_reverse, std::size_t population) {
    return (log_u + log_prior_cur - log_prior_prop + log_q_forward - log_q_reverse) /
           static_cast<double>(population);
}

/// Threshold for the mean log-likelihood difference. `log_q_forward` is
/// log q(theta'|theta), `log_q_reverse` is log q(theta|theta').
inline double mu0(double u, double log_prior_cur, double log_prior_prop, double log_q_forward, double log_q_reverse,
                  std::size_t population) {
    if (!(u > 0.0 && u <= 1.0)) throw InvalidArgument("u must be in (0, 1]");
    return mu0_from_log_u(std::log(u), log_prior_cur, log_prior_prop, log_q_forward, log_q_reverse, population);
}

/// Standard deviation of a without-replacement sample mean:
/// (s / sqrt(n)) sqrt(1 - n/N). Exactly zero at n = N.
inline double std_of_mean(double s, std::size_t n, std::size_t population) {
    if (n < 1 || n > population) throw InvalidArgument("std_of_mean needs 1 <= n <= N");
    if (n == population) return 0.0;
    const double nn = static_cast<double>(n);
    return s / std::sqrt(nn) * std::sqrt(1.0 - nn / static_cast<double>(population));
}

struct MhTestConfig {
    double eps_conf = 0.05;
    /// First-stage batch; 0 means max(2, ceil(0.01 N)).
    std::size_t initial_batch = 0;
    double growth = 2.0;

    void validate() const {
        if (!(eps_conf > 0.0 && eps_conf < 0.5)) throw InvalidArgument("eps_conf must be in (0, 0.5)");
        if (!(growth > 1.0)) throw InvalidArgument("batch growth must be > 1");
    }

    std::size_t first_stage(std::size_t population) const {
        const std::size_t n1 = initial_batch > 0
                                   ? initial_batch
                                   : std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(population))));
        return std::min(std::max<std::size_t>(n1, std::min<std::size_t>(2, population)), population);
    }

    /// Stage sizes n_1 < n_2 < ... = N.
    std::vector<std::size_t> schedule(std::size_t population) const {
        std::vector<std::size_t> out{first_stage(population)};
        while (out.back() < population) {
            const auto next = static_cast<std::size_t>(std::ceil(growth * static_cast<double>(out.back())));
            out.push_back(std::min(std::max(next, out.back() + 1), population));
        }
        return out;
    }
};

struct MhDecision {
    bool accept = false;
    std::size_t n_used = 0;
    bool exact = false;
    /// t-tail probability of the opposite sign when the decision was made.
    double error_estimate = 0.0;
};

/// Sequential test of mean_i [l(x_i; proposed) - l(x_i; current)] >= mu0.
/// `rng` only drives the order in which data items enter the batch.
template <ObjectiveModel M>
MhDecision sequential_test(const M& model, const Dataset& data, const Vec& current, const Vec& proposed, double mu0,
                           const MhTestConfig& cfg, RngStream& rng) {
    cfg.validate();
    const std::size_t big_n = data.size();
    const std::vector<std::size_t> stages = cfg.schedule(big_n);
    const bool full_from_start = stages.front() == big_n;
    NestedSampler sampler(big_n);

    // Welford accumulators over the differences seen so far.
    std::size_t seen = 0;
    double mean = 0.0, m2 = 0.0;
    auto absorb = [&](std::size_t i) {
        const double d = model.log_term(data, i, proposed) - model.log_term(data, i, current);
        ++seen;
        const double delta = d - mean;
        mean += delta / static_cast<double>(seen);
        m2 += delta * (d - mean);
    };

    for (std::size_t n : stages) {
        if (full_from_start) {
            for (std::size_t i = 0; i < big_n; ++i) absorb(i);
        } else {
            sampler.grow_to(n, rng);
            const auto batch = sampler.batch();
            for (std::size_t k = seen; k < n; ++k) absorb(batch[k]);
        }
        if (n == big_n) return {mean >= mu0, n, true, 0.0};

        const double s = n > 1 ? std::sqrt(std::max(m2, 0.0) / static_cast<double>(n - 1)) : 0.0;
        if (s == 0.0) {
            if (mean != mu0) return {mean > mu0, n, false, 0.0};
            continue;
        }
        const double t = (mean - mu0) / std_of_mean(s, n, big_n);
        const double tail = student_t_tail(std::abs(t), static_cast<int>(n - 1));
        if (tail <= cfg.eps_conf) return {t > 0.0, n, false, tail};
    }
    return {mean >= mu0, big_n, true, 0.0};  // unreachable: the last stage is N
}

/// Textbook MH decision with the full-data log ratio.
template <ObjectiveModel M, Proposal Q>
bool exact_mh_accept(const M& model, const Dataset& data, const Q& proposal, const Vec& current, const Vec& proposed,
                     double log_u) {
    double log_ratio = model.log_prior(proposed) - model.log_prior(current) +
                       proposal.log_density(current, proposed) - proposal.log_density(proposed, current);
    for (std::size_t i = 0; i < data.size(); ++i)
        log_ratio += model.log_term(data, i, proposed) - model.log_term(data, i, current);
    return log_u <= log_ratio;
}

struct MhChainConfig {
    std::size_t steps = 1000;
    std::size_t burn_in = 0;
    MhTestConfig test;
};

/// One proposal event: the draws shared by the approximate and exact chains.
struct MhProposalEvent {
    Vec proposed;
    double log_u;
    double mu0;
};

template <ObjectiveModel M, Proposal Q>
MhProposalEvent draw_proposal_event(const M& model, const Q& proposal, const Vec& current, std::size_t population,
                                    RngStream& rng) {
    MhProposalEvent ev;
    ev.proposed = proposal.propose(current, rng);
    ev.log_u = std::log(rng.uniform_open());
    ev.mu0 = mu0_from_log_u(ev.log_u, model.log_prior(current), model.log_prior(ev.proposed),
                            proposal.log_density(ev.proposed, current), proposal.log_density(current, ev.proposed),
                            population);
    return ev;
}

/// MH chain whose accept test is the sequential test. Step t orders its
/// batch with the child stream rng.split(t), so proposal and u draws are the
/// same as in exact_mh_chain for any test configuration. If `exact_out` is
/// given, it receives the full-data decision for every proposal event.
template <ObjectiveModel M, Proposal Q>
ChainTrace approx_mh_chain(const M& model, const Dataset& data, const Q& proposal, const MhChainConfig& cfg, Vec theta,
                           RngStream& rng, std::vector<bool>* exact_out = nullptr) {
    cfg.test.validate();
    if (theta.size() != model.param_dim(data)) throw DimensionMismatch("initial theta length");
    ChainTrace trace;
    trace.burn_in = cfg.burn_in;
    trace.steps.reserve(cfg.steps);
    for (std::size_t t = 0; t < cfg.steps; ++t) {
        const MhProposalEvent ev = draw_proposal_event(model, proposal, theta, data.size(), rng);
        RngStream batch_rng = rng.split(t);
        const MhDecision d = sequential_test(model, data, theta, ev.proposed, ev.mu0, cfg.test, batch_rng);
        if (exact_out) exact_out->push_back(exact_mh_accept(model, data, proposal, theta, ev.proposed, ev.log_u));
        if (d.accept) theta = ev.proposed;
        ChainStep s;
        s.iteration = t;
        s.theta = theta;
        s.batch_size = d.n_used;
        s.accepted = d.accept;
        s.error_estimate = d.error_estimate;
        trace.steps.push_back(std::move(s));
    }
    return trace;
}

/// Reference chain: same draws, full-data log-ratio decisions.
template <ObjectiveModel M, Proposal Q>
ChainTrace exact_mh_chain(const M& model, const Dataset& data, const Q& proposal, const MhChainConfig& cfg, Vec theta,
                          RngStream& rng) {
    ChainTrace trace;
    trace.burn_in = cfg.burn_in;
    trace.steps.reserve(cfg.steps);
    for (std::size_t t = 0; t < cfg.steps; ++t) {
        const MhProposalEvent ev = draw_proposal_event(model, proposal, theta, data.size(), rng);
        const bool acc = exact_mh_accept(model, data, proposal, theta, ev.proposed, ev.log_u);
        if (acc) theta = ev.proposed;
        ChainStep s;
        s.iteration = t;
        s.theta = theta;
        s.batch_size = data.size();
        s.accepted = acc;
        trace.steps.push_back(std::move(s));
    }
    return trace;
}

}  // namespace stli

#endif  // STLI_MH_AUSTERITY_HPP
