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

// Learning signal-to-noise ratio of a minibatch gradient.
//
// For per-datum gradients g_1..g_n with sample mean gbar and sample
// covariance S (n-1 denominator),
//
//     LSNR = (n / p) gbar^T S^{-1} gbar.
//
// Under resampling of the batch, p * LSNR is asymptotically non-central
// chi-squared with p degrees of freedom and non-centrality
// n mu^T Sigma^{-1} mu, estimated here by the plug-in n gbar^T S^{-1} gbar.
// Learning on the batch has stopped paying off once P(LSNR < 1) > delta.

#ifndef STLI_LSNR_LSNR_HPP
#define STLI_LSNR_LSNR_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stli/errors.hpp"
#include "stli/models/dataset.hpp"
#include "stli/models/minibatch.hpp"
#include "stli/models/objective.hpp"
#include "stli/numerics/distributions.hpp"
#include "stli/numerics/linalg.hpp"
#include "stli/numerics/rng.hpp"

namespace stli {

struct GradientMoments {
    Vec mean;
    Mat covariance;
    std::size_t n = 0;

    Eigen::Index dim() const noexcept { return mean.size(); }
};

struct LsnrOptions {
    double ridge_tau = kDefaultRidgeTau;
    /// Use only the diagonal of S. Needs n >= 2 instead of n > p.
    bool diagonal = false;
};

struct LsnrReport {
    double lsnr = 0.0;
    int dof = 0;
    double lambda_hat = 0.0;
    double cdf_at_one = 0.0;
    bool stop = false;
    double ridge_applied = 0.0;
    /// Moments of LSNR under the fitted law.
    double mean = 0.0;
    double variance = 0.0;

    NoncentralChi2 distribution() const { return {dof, lambda_hat}; }
};

/// Moments of the rows of `gradients` (one per-datum gradient per row).
inline GradientMoments moments_from_gradients(const Mat& gradients) {
    const auto n = gradients.rows();
    if (n < 2) throw BatchTooSmall("need at least 2 gradients, got " + std::to_string(n));
    GradientMoments m;
    m.n = static_cast<std::size_t>(n);
    m.mean = gradients.colwise().mean().transpose();
    const Mat centered = gradients.rowwise() - m.mean.transpose();
    m.covariance = (centered.transpose() * centered) / static_cast<double>(n - 1);
    m.covariance = 0.5 * (m.covariance + m.covariance.transpose());
    return m;
}

/// Per-datum gradients of `model` at theta, one row per batch index, in batch order.
template <ObjectiveModel M>
Mat gradient_matrix(const M& model, const Dataset& data, std::span<const std::size_t> batch, const Vec& theta) {
    Mat g(static_cast<Eigen::Index>(batch.size()), theta.size());
    Vec gi(theta.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
        model.grad_term(data, batch[k], theta, gi);
        g.row(static_cast<Eigen::Index>(k)) = gi.transpose();
    }
    return g;
}

template <ObjectiveModel M>
GradientMoments gradient_moments(const M& model, const Dataset& data, std::span<const std::size_t> batch,
                                 const Vec& theta) {
    if (batch.size() < 2) throw BatchTooSmall("batch of size " + std::to_string(batch.size()));
    return moments_from_gradients(gradient_matrix(model, data, batch, theta));
}

template <ObjectiveModel M>
GradientMoments gradient_moments(const M& model, const Dataset& data, const Minibatch& batch, const Vec& theta) {
    return gradient_moments(model, data, std::span<const std::size_t>(batch.indices), theta);
}

/// Non-centrality estimate n gbar^T (S + ridge)^{-1} gbar and the ridge used.
struct NoncentralityEstimate {
    double lambda_hat;
    double ridge;
};

inline NoncentralityEstimate estimate_noncentrality(const GradientMoments& m, const LsnrOptions& opt = {}) {
    const auto p = m.dim();
    if (m.n < 2) throw BatchTooSmall("n=" + std::to_string(m.n));
    if (!opt.diagonal && m.n <= static_cast<std::size_t>(p))
        throw InsufficientBatch("full-covariance LSNR needs n > p (n=" + std::to_string(m.n) +
                                ", p=" + std::to_string(p) + ")");
    const double n = static_cast<double>(m.n);
    if (opt.diagonal) {
        const Vec d = m.covariance.diagonal();
        const double ridge = opt.ridge_tau * d.sum() / static_cast<double>(p);
        double q = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double v = d[j] + ridge;
            if (!(v > 0.0)) throw SingularCovariance("zero gradient variance in coordinate " + std::to_string(j));
            q += m.mean[j] * m.mean[j] / v;
        }
        return {n * q, ridge};
    }
    try {
        const CholeskyFactor chol(SpdMatrix(m.covariance), opt.ridge_tau);
        return {n * chol.inverse_quadratic_form(m.mean), chol.ridge()};
    } catch (const NotPositiveDefinite& e) {
        throw SingularCovariance(e.what());
    }
}

/// Fitted law of p * LSNR: chi2_p(lambda_hat).
inline NoncentralChi2 fit_sampling_distribution(const GradientMoments& m, const LsnrOptions& opt = {}) {
    return {static_cast<int>(m.dim()), estimate_noncentrality(m, opt).lambda_hat};
}

/// P(LSNR < 1) > delta under the fitted law.
inline bool stop_criterion(const NoncentralChi2& fitted, double delta) {
    return noncentral_chi2_cdf(static_cast<double>(fitted.dof), fitted) > delta;
}

inline LsnrReport lsnr(const GradientMoments& m, double delta = 0.5, const LsnrOptions& opt = {}) {
    const auto est = estimate_noncentrality(m, opt);
    LsnrReport r;
    r.dof = static_cast<int>(m.dim());
    const double p = r.dof;
    r.lambda_hat = est.lambda_hat;
    r.lsnr = est.lambda_hat / p;
    r.ridge_applied = est.ridge;
    r.mean = r.lambda_hat / p + 1.0;
    r.variance = 2.0 / (p * p) * (p + 2.0 * r.lambda_hat);
    r.cdf_at_one = noncentral_chi2_cdf(p, r.distribution());
    r.stop = r.cdf_at_one > delta;
    return r;
}

/// LSNR on B with-replacement resamples of the full dataset, each of size N.
template <ObjectiveModel M>
std::vector<double> bootstrap_lsnr(const M& model, const Dataset& data, const Vec& theta, std::size_t replicates,
                                   RngStream& rng, const LsnrOptions& opt = {}) {
    if (replicates < 1) throw InvalidArgument("bootstrap needs B >= 1");
    const std::size_t n = data.size();
    // Per-datum gradients are fixed at theta; each replicate only reindexes them.
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    const Mat g = gradient_matrix(model, data, all, theta);

    std::vector<double> out;
    out.reserve(replicates);
    Mat resampled(g.rows(), g.cols());
    for (std::size_t b = 0; b < replicates; ++b) {
        for (std::size_t k = 0; k < n; ++k)
            resampled.row(static_cast<Eigen::Index>(k)) = g.row(static_cast<Eigen::Index>(rng.below(n)));
        out.push_back(lsnr(moments_from_gradients(resampled), 0.5, opt).lsnr);
    }
    return out;
}

}  // namespace stli

#endif  // STLI_LSNR_LSNR_HPP
