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

#ifndef STLI_MODELS_OBJECTIVE_HPP
#define STLI_MODELS_OBJECTIVE_HPP

#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numbers>

#include "stli/errors.hpp"
#include "stli/models/dataset.hpp"
#include "stli/numerics/linalg.hpp"

namespace stli {

/// A per-datum objective l(x_i; theta) with its gradient, plus a log-prior.
/// Everything that trains or samples is written against this concept.
template <class M>
concept ObjectiveModel = requires(const M& m, const Dataset& data, std::size_t i, const Vec& theta,
                                  Vec& out) {
    { m.param_dim(data) } -> std::convertible_to<Eigen::Index>;
    { m.log_term(data, i, theta) } -> std::convertible_to<double>;
    m.grad_term(data, i, theta, out);
    { m.log_prior(theta) } -> std::convertible_to<double>;
    { m.prior_grad(theta) } -> std::convertible_to<Vec>;
};

/// Isotropic Gaussian prior N(mean, variance * I). An infinite variance
/// makes it flat (log density 0, gradient 0).
struct GaussianPrior {
    double mean = 0.0;
    double variance = std::numeric_limits<double>::infinity();

    bool flat() const noexcept { return std::isinf(variance); }

    double log_density(const Vec& theta) const {
        if (flat()) return 0.0;
        const double q = (theta.array() - mean).square().sum();
        return -0.5 * q / variance -
               0.5 * static_cast<double>(theta.size()) * std::log(2.0 * std::numbers::pi * variance);
    }

    Vec gradient(const Vec& theta) const {
        if (flat()) return Vec::Zero(theta.size());
        return -(theta.array() - mean).matrix() / variance;
    }
};

namespace detail {

inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// theta^T [x, 1]
inline double affine(const Eigen::Ref<const Vec>& x, const Vec& theta) {
    if (theta.size() != x.size() + 1)
        throw DimensionMismatch("logistic theta must have d+1 entries (bias last)");
    return theta.head(x.size()).dot(x) + theta[x.size()];
}

}  // namespace detail

/// y log s(z) + (1-y) log(1 - s(z)) with z = theta^T [x, 1].
inline double logistic_logterm(const Eigen::Ref<const Vec>& x, double y, const Vec& theta) {
    const double z = detail::affine(x, theta);
    return y * z - detail::softplus(z);
}

/// (y - s(z)) [x, 1]
inline Vec logistic_grad(const Eigen::Ref<const Vec>& x, double y, const Vec& theta) {
    const double r = y - detail::sigmoid(detail::affine(x, theta));
    Vec g(theta.size());
    g.head(x.size()) = r * x;
    g[x.size()] = r;
    return g;
}

/// Logistic regression with a bias parameter appended after the d weights.
struct LogisticModel {
    GaussianPrior prior;

    Eigen::Index param_dim(const Dataset& data) const { return data.dim() + 1; }

    double log_term(const Dataset& data, std::size_t i, const Vec& theta) const {
        return logistic_logterm(data.row(i), data.label(i), theta);
    }

    void grad_term(const Dataset& data, std::size_t i, const Vec& theta, Vec& out) const {
        const auto x = data.row(i);
        const double r = data.label(i) - detail::sigmoid(detail::affine(x, theta));
        out.resize(theta.size());
        out.head(x.size()) = r * x;
        out[x.size()] = r;
    }

    double log_prior(const Vec& theta) const { return prior.log_density(theta); }
    Vec prior_grad(const Vec& theta) const { return prior.gradient(theta); }
};

/// Mean of an isotropic Gaussian with known variance sigma2; theta has the
/// same length as a data row.
class GaussianMeanModel {
public:
    explicit GaussianMeanModel(double sigma2, GaussianPrior prior = {}) : sigma2_(sigma2), prior_(prior) {
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
            throw NonPositiveVariance("sigma2 must be positive and finite");
        if (!prior.flat() && !(prior.variance > 0.0))
            throw NonPositiveVariance("prior variance must be positive");
    }

    double sigma2() const noexcept { return sigma2_; }
    const GaussianPrior& prior() const noexcept { return prior_; }

    Eigen::Index param_dim(const Dataset& data) const { return data.dim(); }

    double log_term(const Dataset& data, std::size_t i, const Vec& theta) const {
        check(data, theta);
        const double q = (data.row(i) - theta).squaredNorm();
        return -0.5 * q / sigma2_ -
               0.5 * static_cast<double>(theta.size()) * std::log(2.0 * std::numbers::pi * sigma2_);
    }

    void grad_term(const Dataset& data, std::size_t i, const Vec& theta, Vec& out) const {
        check(data, theta);
        out = (data.row(i) - theta) / sigma2_;
    }

    double log_prior(const Vec& theta) const { return prior_.log_density(theta); }
    Vec prior_grad(const Vec& theta) const { return prior_.gradient(theta); }

private:
    static void check(const Dataset& data, const Vec& theta) {
        if (theta.size() != data.dim()) throw DimensionMismatch("gaussian-mean theta length != d");
    }

    double sigma2_;
    GaussianPrior prior_;
};

inline GaussianMeanModel gaussian_mean_model(double sigma2, GaussianPrior prior = {}) {
    return GaussianMeanModel(sigma2, prior);
}

/// Closed-form posterior of the Gaussian-mean model (per coordinate).
struct ConjugatePosterior {
    Vec mean;
    double variance;
};

inline ConjugatePosterior conjugate_posterior(const GaussianMeanModel& model, const Dataset& data) {
    const double n = static_cast<double>(data.size());
    const GaussianPrior& pr = model.prior();
    const double prior_prec = pr.flat() ? 0.0 : 1.0 / pr.variance;
    const double prec = prior_prec + n / model.sigma2();
    Vec sum = data.features().colwise().sum().transpose();
    Vec mean = (prior_prec * Vec::Constant(sum.size(), pr.flat() ? 0.0 : pr.mean) + sum / model.sigma2()) / prec;
    return {std::move(mean), 1.0 / prec};
}

/// Mean per-datum objective over the whole dataset.
template <ObjectiveModel M>
double mean_objective(const M& model, const Dataset& data, const Vec& theta) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) s += model.log_term(data, i, theta);
    return s / static_cast<double>(data.size());
}

/// Gradient of the log posterior: prior gradient plus the full-data sum.
template <ObjectiveModel M>
Vec full_log_posterior_grad(const M& model, const Dataset& data, const Vec& theta) {
    Vec total = model.prior_grad(theta);
    Vec g(theta.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        model.grad_term(data, i, theta, g);
        total += g;
    }
    return total;
}

}  // namespace stli

#endif  // STLI_MODELS_OBJECTIVE_HPP
