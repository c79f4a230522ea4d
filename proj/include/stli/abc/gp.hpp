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

#ifndef STLI_ABC_GP_HPP
#define STLI_ABC_GP_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "stli/errors.hpp"
#include "stli/numerics/linalg.hpp"

namespace stli {

/// Squared-exponential kernel with a homoscedastic noise term:
/// k(a, b) = signal_var exp(-|a - b|^2 / (2 lengthscale^2)) + noise_var [a is b].
struct GpHyper {
    double lengthscale = 1.0;
    double signal_var = 1.0;
    double noise_var = 0.1;
    double prior_mean = 0.0;

    void validate() const {
        if (!(lengthscale > 0.0) || !(signal_var > 0.0) || !(noise_var > 0.0) || !std::isfinite(prior_mean))
            throw InvalidArgument("GP hyperparameters must be positive and finite");
    }

    double kernel(const Vec& a, const Vec& b) const {
        return signal_var * std::exp(-0.5 * (a - b).squaredNorm() / (lengthscale * lengthscale));
    }
};

struct GpPrediction {
    double mean = 0.0;
    /// Variance of the latent function value.
    double latent_var = 0.0;
    double noise_var = 0.0;

    /// Variance of a new noisy observation; never below the noise level.
    double total_var() const noexcept { return latent_var + noise_var; }
};

/// Bivariate posterior of the latent function at two inputs.
struct GpJoint {
    double mean_a, mean_b;
    double var_a, var_b, cov;
};

/// Scalar GP regression with a Cholesky factor that grows by one row per
/// observation (O(n^2) per append).
class GaussianProcess {
public:
    explicit GaussianProcess(GpHyper hyper) : h_(hyper) { h_.validate(); }

    const GpHyper& hyper() const noexcept { return h_; }
    std::size_t size() const noexcept { return x_.size(); }
    double jitter() const noexcept { return jitter_; }

    void add(const Vec& x, double y) {
        if (!x_.empty() && x.size() != x_.front().size()) throw DimensionMismatch("GP input length");
        if (!x.allFinite() || !std::isfinite(y)) throw IllConditionedKernel("non-finite GP observation");
        const auto n = static_cast<Eigen::Index>(x_.size());
        reserve(n + 1);
        const double kss = h_.signal_var + h_.noise_var + jitter_;
        x_.push_back(x);
        y_.push_back(y);
        alpha_valid_ = false;
        if (n == 0) {
            l_(0, 0) = std::sqrt(kss);
            return;
        }
        Vec k = kvec(x, n);
        l_.topLeftCorner(n, n).triangularView<Eigen::Lower>().solveInPlace(k);
        const double d2 = kss - k.squaredNorm();
        if (!(d2 > 1e-12 * (h_.signal_var + h_.noise_var))) {
            refactor();
            return;
        }
        l_.block(n, 0, 1, n) = k.transpose();
        l_(n, n) = std::sqrt(d2);
    }

    GpPrediction predict(const Vec& x) const {
        if (x_.empty()) return {h_.prior_mean, h_.signal_var, h_.noise_var};
        const auto n = static_cast<Eigen::Index>(x_.size());
        const Vec k = kvec(x, n);
        const Vec v = forward(k);
        return {h_.prior_mean + k.dot(alpha()), std::max(h_.signal_var - v.squaredNorm(), 0.0), h_.noise_var};
    }

    GpJoint predict_joint(const Vec& a, const Vec& b) const {
        const double kab = h_.kernel(a, b);
        if (x_.empty()) return {h_.prior_mean, h_.prior_mean, h_.signal_var, h_.signal_var, kab};
        const auto n = static_cast<Eigen::Index>(x_.size());
        const Vec ka = kvec(a, n), kb = kvec(b, n);
        const Vec va = forward(ka), vb = forward(kb);
        const Vec& al = alpha();
        return {h_.prior_mean + ka.dot(al), h_.prior_mean + kb.dot(al), std::max(h_.signal_var - va.squaredNorm(), 0.0),
                std::max(h_.signal_var - vb.squaredNorm(), 0.0), kab - va.dot(vb)};
    }

private:
    Vec forward(const Vec& b) const {
        const auto n = b.size();
        return l_.topLeftCorner(n, n).triangularView<Eigen::Lower>().solve(b);
    }

    Vec kvec(const Vec& x, Eigen::Index n) const {
        Vec k(n);
        for (Eigen::Index i = 0; i < n; ++i) k[i] = h_.kernel(x, x_[static_cast<std::size_t>(i)]);
        return k;
    }

    void reserve(Eigen::Index n) {
        if (l_.rows() >= n) return;
        const Eigen::Index cap = std::max<Eigen::Index>(16, 2 * n);
        Mat grown = Mat::Zero(cap, cap);
        const auto old = static_cast<Eigen::Index>(x_.size());
        grown.topLeftCorner(old, old) = l_.topLeftCorner(old, old);
        l_.swap(grown);
    }

    /// Full refactorization with escalating diagonal jitter.
    void refactor() {
        const auto n = static_cast<Eigen::Index>(x_.size());
        Mat k(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j)
                k(i, j) = k(j, i) = h_.kernel(x_[static_cast<std::size_t>(i)], x_[static_cast<std::size_t>(j)]);
        double jitter = std::max(jitter_, 1e-10 * h_.signal_var);
        for (; jitter <= 1e-4 * h_.signal_var * 1.0000001; jitter *= 10.0) {
            Mat a = k;
            a.diagonal().array() += h_.noise_var + jitter;
            Eigen::LLT<Mat> llt(a);
            if (llt.info() == Eigen::Success && llt.matrixLLT().allFinite() &&
                llt.matrixLLT().diagonal().minCoeff() > 0.0) {
                l_.topLeftCorner(n, n) = llt.matrixL();
                jitter_ = jitter;
                alpha_valid_ = false;
                return;
            }
        }
        throw IllConditionedKernel("kernel matrix of " + std::to_string(n) + " points not factorizable");
    }

    const Vec& alpha() const {
        if (!alpha_valid_) {
            const auto n = static_cast<Eigen::Index>(x_.size());
            Vec r(n);
            for (Eigen::Index i = 0; i < n; ++i) r[i] = y_[static_cast<std::size_t>(i)] - h_.prior_mean;
            r = forward(r);
            alpha_ = l_.topLeftCorner(n, n).triangularView<Eigen::Lower>().transpose().solve(r);
            alpha_valid_ = true;
        }
        return alpha_;
    }

    GpHyper h_;
    std::vector<Vec> x_;
    std::vector<double> y_;
    Mat l_;
    double jitter_ = 0.0;
    mutable Vec alpha_;
    mutable bool alpha_valid_ = false;
};

/// Every simulation ever run, plus one GP per statistic coordinate.
/// Entries are only ever appended.
class SurrogateStore {
public:
    SurrogateStore(Eigen::Index theta_dim, std::vector<GpHyper> per_stat) : theta_dim_(theta_dim) {
        if (per_stat.empty()) throw InvalidArgument("surrogate needs at least one statistic");
        for (const auto& h : per_stat) gps_.emplace_back(h);
    }

    Eigen::Index theta_dim() const noexcept { return theta_dim_; }
    Eigen::Index stat_dim() const noexcept { return static_cast<Eigen::Index>(gps_.size()); }
    std::size_t size() const noexcept { return thetas_.size(); }
    bool empty() const noexcept { return thetas_.empty(); }

    const std::vector<Vec>& thetas() const noexcept { return thetas_; }
    const std::vector<Vec>& stats() const noexcept { return stats_; }
    const GaussianProcess& gp(Eigen::Index d) const { return gps_.at(static_cast<std::size_t>(d)); }

    void add(const Vec& theta, const Vec& stat) {
        if (theta.size() != theta_dim_) throw DimensionMismatch("store theta length");
        if (stat.size() != stat_dim()) throw DimensionMismatch("store statistic length");
        thetas_.push_back(theta);
        stats_.push_back(stat);
        for (Eigen::Index d = 0; d < stat_dim(); ++d) gps_[static_cast<std::size_t>(d)].add(theta, stat[d]);
    }

    std::vector<GpPrediction> predict(const Vec& theta) const {
        std::vector<GpPrediction> out;
        out.reserve(gps_.size());
        for (const auto& gp : gps_) out.push_back(gp.predict(theta));
        return out;
    }

    /// Latent variance averaged over statistic coordinates.
    double mean_latent_var(const Vec& theta) const {
        double s = 0.0;
        for (const auto& p : predict(theta)) s += p.latent_var;
        return s / static_cast<double>(gps_.size());
    }

private:
    Eigen::Index theta_dim_;
    std::vector<GaussianProcess> gps_;
    std::vector<Vec> thetas_;
    std::vector<Vec> stats_;
};

/// gp_fit_predict: per-statistic posterior at theta.
inline std::vector<GpPrediction> gp_fit_predict(const SurrogateStore& store, const Vec& theta) {
    if (store.empty()) throw EmptyTrace("surrogate store is empty");
    return store.predict(theta);
}

}  // namespace stli

#endif  // STLI_ABC_GP_HPP
