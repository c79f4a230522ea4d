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

// Stochastic gradient Langevin dynamics.
//
//     theta' = theta + (eps/2) C (grad log p(theta) + (N/n) sum_batch grad l_i) + eta,
//     eta ~ N(0, eps C)
//
// with C = I unless an empirical-Fisher preconditioner is enabled. There is
// no accept/reject step.

#ifndef STLI_SGLD_SGLD_HPP
#define STLI_SGLD_SGLD_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stli/chain.hpp"
#include "stli/errors.hpp"
#include "stli/lsnr/lsnr.hpp"
#include "stli/models/dataset.hpp"
#include "stli/models/minibatch.hpp"
#include "stli/models/objective.hpp"
#include "stli/numerics/distributions.hpp"
#include "stli/numerics/linalg.hpp"
#include "stli/numerics/rng.hpp"

namespace stli {

/// Robbins-Monro schedule eps_t = a (b + t)^(-gamma), clamped from below.
inline double stepsize(std::size_t t, double a, double b, double gamma, double eps_min = 0.0) {
    return std::max(a * std::pow(b + static_cast<double>(t), -gamma), eps_min);
}

struct SgldConfig {
    double a = 1e-3;
    double b = 1.0;
    double gamma = 0.55;
    /// Stepsize floor. Empty means: the stepsize at which injected noise
    /// and minibatch noise have equal variance, estimated at the start point.
    std::optional<double> eps_min = 0.0;
    std::size_t batch_size = 10;
    std::size_t iterations = 1000;
    std::size_t burn_in = 0;
    bool precondition = false;
    /// Steps whose minibatch gradients feed the frozen preconditioner.
    std::size_t precondition_window = 100;
    bool inject_noise = true;

    void validate(std::size_t population) const {
        if (!(a > 0.0)) throw InvalidArgument("sgld: a must be > 0");
        if (!(b >= 0.0)) throw InvalidArgument("sgld: b must be >= 0");
        if (b == 0.0) throw InvalidArgument("sgld: b = 0 makes the first stepsize infinite");
        if (!(gamma > 0.5 && gamma <= 1.0)) throw InvalidArgument("sgld: gamma must be in (0.5, 1]");
        if (eps_min && !(*eps_min >= 0.0)) throw InvalidArgument("sgld: eps_min must be >= 0");
        if (batch_size < 1 || batch_size > population) throw SizeExceedsDataset("sgld: batch size must be in [1, N]");
        if (burn_in > iterations) throw InvalidArgument("sgld: burn-in exceeds iterations");
    }
};

/// Frozen preconditioner C and its Cholesky factor (for the noise).
struct Preconditioner {
    Mat matrix;
    Mat factor;

    static Preconditioner from(Mat c) {
        Preconditioner p{std::move(c), {}};
        p.factor = CholeskyFactor(SpdMatrix(p.matrix), 0.0).lower();
        return p;
    }
};

/// Inverse of the ridge-regularized covariance of per-datum gradients (rows).
inline Mat empirical_fisher_preconditioner(const Mat& gradients, double ridge_tau = kDefaultRidgeTau) {
    if (gradients.rows() <= gradients.cols())
        throw InsufficientBatch("preconditioner needs more gradient samples than parameters");
    const GradientMoments m = moments_from_gradients(gradients);
    try {
        Mat inv = CholeskyFactor(SpdMatrix(m.covariance), ridge_tau).inverse();
        return 0.5 * (inv + inv.transpose());
    } catch (const NotPositiveDefinite& e) {
        throw SingularCovariance(e.what());
    }
}

/// Gradient estimate grad log p(theta) + (N/n) sum over the batch. A caller
/// may pass its own multiplier in place of N/n.
template <ObjectiveModel M>
Vec stochastic_log_posterior_grad(const M& model, const Dataset& data, const Vec& theta,
                                  std::span<const std::size_t> batch, std::optional<double> data_scale = {}) {
    Vec sum = Vec::Zero(theta.size());
    Vec g(theta.size());
    for (std::size_t i : batch) {
        model.grad_term(data, i, theta, g);
        sum += g;
    }
    const double factor =
        data_scale ? *data_scale : static_cast<double>(data.size()) / static_cast<double>(batch.size());
    Vec out = model.prior_grad(theta) + factor * sum;
    if (!out.allFinite()) throw NonFiniteGradient("non-finite gradient estimate");
    return out;
}

/// Applies one Langevin step given an already computed gradient estimate.
inline Vec langevin_update(const Vec& theta, const Vec& grad, double eps, RngStream& rng, bool inject_noise,
                           const Preconditioner* pre = nullptr) {
    if (!(eps > 0.0)) throw InvalidArgument("sgld step needs eps > 0");
    Vec out = theta + 0.5 * eps * (pre ? Vec(pre->matrix * grad) : grad);
    if (inject_noise) {
        Vec z(theta.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
        out += std::sqrt(eps) * (pre ? Vec(pre->factor * z) : z);
    }
    return out;
}

template <ObjectiveModel M>
Vec sgld_step(const M& model, const Dataset& data, const Vec& theta, std::span<const std::size_t> batch, double eps,
              RngStream& rng, bool inject_noise = true, const Preconditioner* pre = nullptr) {
    return langevin_update(theta, stochastic_log_posterior_grad(model, data, theta, batch), eps, rng, inject_noise,
                           pre);
}

/// Per-coordinate variance of (N/n) sum_batch grad l_i over uniformly drawn
/// size-n batches without replacement, at theta.
template <ObjectiveModel M>
Vec stochastic_gradient_variance(const M& model, const Dataset& data, const Vec& theta, std::size_t n) {
    const std::size_t big_n = data.size();
    if (n < 1 || n > big_n) throw SizeExceedsDataset("batch size out of range");
    if (big_n < 2) return Vec::Zero(theta.size());
    std::vector<std::size_t> all(big_n);
    for (std::size_t i = 0; i < big_n; ++i) all[i] = i;
    const Mat g = gradient_matrix(model, data, all, theta);
    const Mat c = g.rowwise() - g.colwise().mean();
    const Vec pop_var = (c.array().square().colwise().sum() / static_cast<double>(big_n)).transpose();
    const double nn = static_cast<double>(n), bn = static_cast<double>(big_n);
    return pop_var * (bn * bn / nn) * ((bn - nn) / (bn - 1.0));
}

/// Stepsize where the minibatch part of the update, (eps/2)^2 V, has the same
/// variance as the injected noise eps.
inline double crossover_stepsize(double gradient_variance) {
    return gradient_variance > 0.0 ? 4.0 / gradient_variance : std::numeric_limits<double>::infinity();
}

struct SgldRun {
    ChainTrace trace;
    double floor_used = 0.0;
    std::optional<Mat> preconditioner;
};

template <ObjectiveModel M>
SgldRun run_sgld(const M& model, const Dataset& data, const SgldConfig& cfg, Vec theta, RngStream& rng) {
    cfg.validate(data.size());
    if (theta.size() != model.param_dim(data)) throw DimensionMismatch("initial theta length");

    SgldRun run;
    if (cfg.eps_min) {
        run.floor_used = *cfg.eps_min;
    } else {
        const double eps_star =
            crossover_stepsize(stochastic_gradient_variance(model, data, theta, cfg.batch_size).mean());
        run.floor_used = std::isfinite(eps_star) ? eps_star : 0.0;
    }
    run.trace.burn_in = cfg.burn_in;
    run.trace.steps.reserve(cfg.iterations);

    std::optional<Preconditioner> pre;
    std::vector<Vec> window;
    Vec g(theta.size());
    for (std::size_t t = 0; t < cfg.iterations; ++t) {
        if (cfg.precondition && !pre && t == cfg.precondition_window) {
            Mat rows(static_cast<Eigen::Index>(window.size()), theta.size());
            for (std::size_t k = 0; k < window.size(); ++k) rows.row(static_cast<Eigen::Index>(k)) = window[k].transpose();
            pre = Preconditioner::from(empirical_fisher_preconditioner(rows));
            run.preconditioner = pre->matrix;
            window.clear();
        }
        const double eps = stepsize(t, cfg.a, cfg.b, cfg.gamma, run.floor_used);
        const Minibatch batch = sample_minibatch(data.size(), cfg.batch_size, rng);
        if (cfg.precondition && !pre) {
            for (std::size_t i : batch.indices) {
                model.grad_term(data, i, theta, g);
                window.push_back(g);
            }
        }
        ChainStep step;
        step.iteration = t;
        step.stepsize = eps;
        step.batch_size = batch.size();
        step.batch_hash = hash_indices(batch.indices);
        step.noise_marker = rng.counter();
        theta = sgld_step(model, data, theta, batch.indices, eps, rng, cfg.inject_noise, pre ? &*pre : nullptr);
        step.theta = theta;
        run.trace.steps.push_back(std::move(step));
    }
    return run;
}

}  // namespace stli

#endif  // STLI_SGLD_SGLD_HPP
