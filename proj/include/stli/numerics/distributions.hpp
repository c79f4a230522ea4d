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

#ifndef STLI_NUMERICS_DISTRIBUTIONS_HPP
#define STLI_NUMERICS_DISTRIBUTIONS_HPP

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "stli/errors.hpp"
#include "stli/numerics/linalg.hpp"
#include "stli/numerics/rng.hpp"

namespace stli {

/// Non-central chi-squared law with `dof` degrees of freedom and
/// non-centrality `lambda` (sum of squared means of the unit normals).
struct NoncentralChi2 {
    int dof = 1;
    double lambda = 0.0;

    NoncentralChi2() = default;
    NoncentralChi2(int p, double nc) : dof(p), lambda(nc) {
        if (p < 1) throw InvalidArgument("chi2 dof must be >= 1, got " + std::to_string(p));
        if (!(nc >= 0.0) || !std::isfinite(nc))
            throw InvalidArgument("chi2 noncentrality must be finite and >= 0");
    }

    double mean() const noexcept { return dof + lambda; }
    double variance() const noexcept { return 2.0 * (dof + 2.0 * lambda); }
};

namespace detail {

/// Remaining Poisson mass below which the mixture series is cut.
inline constexpr double kPoissonTailCut = 1e-12;

/// Sums w_j * term(j) over the Poisson(h) weights w_j, walking outward from
/// the mode so that large h neither underflows nor wastes terms.
/// `term` is called with strictly increasing j on the up-walk and strictly
/// decreasing j on the down-walk, starting from the mode both times.
template <class Up, class Down>
double poisson_mixture(double h, long j0, double init_term, Up&& next_up, Down&& next_down) {
    const double log_w0 = -h + static_cast<double>(j0) * std::log(h) - std::lgamma(j0 + 1.0);
    const double w0 = std::exp(log_w0);
    double sum = w0 * init_term;
    double mass = w0;

    long ju = j0, jd = j0;
    double wu = w0, wd = w0;
    double tu = init_term, td = init_term;
    while (1.0 - mass > kPoissonTailCut) {
        const double next_wu = wu * h / static_cast<double>(ju + 1);
        const double next_wd = jd > 0 ? wd * static_cast<double>(jd) / h : 0.0;
        if (next_wu <= 0.0 && next_wd <= 0.0) break;
        if (next_wu >= next_wd) {
            tu = next_up(ju, tu);
            ++ju;
            wu = next_wu;
            sum += wu * tu;
            mass += wu;
        } else {
            td = next_down(jd, td);
            --jd;
            wd = next_wd;
            sum += wd * td;
            mass += wd;
        }
    }
    return sum;
}

inline double log_central_chi2_pdf(double x, double k) {
    return (0.5 * k - 1.0) * std::log(x) - 0.5 * x - 0.5 * k * std::numbers::ln2 - std::lgamma(0.5 * k);
}

}  // namespace detail

/// P(X <= x) for X ~ chi2_p(lambda), as a Poisson(lambda/2) mixture of
/// central chi2_{p+2j} CDFs. Negative x gives 0.
inline double noncentral_chi2_cdf(double x, const NoncentralChi2& dist) {
    if (!(x > 0.0)) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double a = 0.5 * dist.dof;
    const double y = 0.5 * x;
    const double h = 0.5 * dist.lambda;
    if (h == 0.0) return boost::math::gamma_p(a, y);

    const long j0 = static_cast<long>(std::floor(h));
    const double log_y = std::log(y);
    // P(a+j+1, y) = P(a+j, y) - y^{a+j} e^{-y} / Gamma(a+j+1)
    auto gamma_term = [&](double s) { return std::exp(s * log_y - y - std::lgamma(s + 1.0)); };
    auto up = [&](long j, double p) { return std::clamp(p - gamma_term(a + j), 0.0, 1.0); };
    auto down = [&](long j, double p) { return std::clamp(p + gamma_term(a + j - 1), 0.0, 1.0); };
    const double p0 = boost::math::gamma_p(a + static_cast<double>(j0), y);
    return std::clamp(detail::poisson_mixture(h, j0, p0, up, down), 0.0, 1.0);
}

/// Density of chi2_p(lambda). At x = 0 the p = 1 density diverges and
/// +infinity is returned.
inline double noncentral_chi2_pdf(double x, const NoncentralChi2& dist) {
    if (x < 0.0) return 0.0;
    const double h = 0.5 * dist.lambda;
    if (x == 0.0) {
        if (dist.dof == 1) return std::numeric_limits<double>::infinity();
        if (dist.dof == 2) return 0.5 * std::exp(-h);
        return 0.0;
    }
    const double k = dist.dof;
    if (h == 0.0) return std::exp(detail::log_central_chi2_pdf(x, k));

    const long j0 = static_cast<long>(std::floor(h));
    auto f = [&](long j) { return std::exp(detail::log_central_chi2_pdf(x, k + 2.0 * j)); };
    auto up = [&](long j, double) { return f(j + 1); };
    auto down = [&](long j, double) { return f(j - 1); };
    return detail::poisson_mixture(h, j0, f(j0), up, down);
}

/// Law of X / p where X ~ dist: the scaled statistic's CDF and density.
inline double scaled_chi2_cdf(double v, const NoncentralChi2& dist) {
    return noncentral_chi2_cdf(dist.dof * v, dist);
}

inline double scaled_chi2_pdf(double v, const NoncentralChi2& dist) {
    return dist.dof * noncentral_chi2_pdf(dist.dof * v, dist);
}

/// P(T > t) for Student-t with `dof` degrees of freedom.
inline double student_t_tail(double t, int dof) {
    if (dof < 1) throw InvalidArgument("student_t_tail needs dof >= 1");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (t == 0.0) return 0.5;
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    const double nu = dof;
    const double z = nu / (nu + t * t);
    const double upper = 0.5 * boost::math::ibeta(0.5 * nu, 0.5, z);
    return t > 0 ? upper : 1.0 - upper;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_log_pdf(double x, double mean, double var) {
    const double r = x - mean;
    return -0.5 * (std::log(2.0 * std::numbers::pi * var) + r * r / var);
}

/// Kolmogorov-Smirnov statistic sup |F_n - F| of a sample against `cdf`.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf&& cdf) {
    if (sample.empty()) throw InvalidArgument("ks_distance of an empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

/// mean + diag(stddev) * z with z ~ N(0, I).
inline Vec gaussian_draw(RngStream& rng, const Vec& mean, const Vec& stddev) {
    if (stddev.size() != mean.size()) throw DimensionMismatch("gaussian_draw scale length");
    Vec out(mean.size());
    for (Eigen::Index i = 0; i < mean.size(); ++i) out[i] = mean[i] + stddev[i] * rng.normal();
    return out;
}

/// mean + L * z with z ~ N(0, I); L is a (lower) covariance factor.
inline Vec gaussian_draw(RngStream& rng, const Vec& mean, const Mat& factor) {
    if (factor.rows() != mean.size() || factor.cols() != mean.size())
        throw DimensionMismatch("gaussian_draw factor shape");
    Vec z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean + factor * z;
}

}  // namespace stli

#endif  // STLI_NUMERICS_DISTRIBUTIONS_HPP
