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

#ifndef STLI_NUMERICS_LINALG_HPP
#define STLI_NUMERICS_LINALG_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <string>

#include "stli/errors.hpp"

namespace stli {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Relative ridge added to the diagonal before every SPD factorization:
/// tau * trace(A) / p.
inline constexpr double kDefaultRidgeTau = 1e-10;

/// Symmetric matrix that is expected to be positive definite.
class SpdMatrix {
public:
    explicit SpdMatrix(Mat a) : a_(std::move(a)) {
        if (a_.rows() != a_.cols() || a_.rows() == 0)
            throw DimensionMismatch("SpdMatrix must be square and non-empty");
        const double scale = a_.cwiseAbs().maxCoeff();
        const double asym = (a_ - a_.transpose()).cwiseAbs().maxCoeff();
        if (!(asym <= 1e-12 * scale)) throw NotSymmetric("asymmetry " + std::to_string(asym));
    }

    Eigen::Index dim() const noexcept { return a_.rows(); }
    const Mat& matrix() const noexcept { return a_; }
    double trace() const { return a_.trace(); }

private:
    Mat a_;
};

/// Lower Cholesky factor of (A + ridge * I).
class CholeskyFactor {
public:
    CholeskyFactor(const SpdMatrix& a, double ridge_tau = kDefaultRidgeTau) {
        const auto p = a.dim();
        ridge_ = ridge_tau > 0.0 ? ridge_tau * a.trace() / static_cast<double>(p) : 0.0;
        if (!std::isfinite(ridge_) || ridge_ < 0.0) ridge_ = 0.0;
        Mat shifted = a.matrix();
        shifted.diagonal().array() += ridge_;
        llt_.compute(shifted);
        if (llt_.info() != Eigen::Success || !llt_.matrixLLT().allFinite())
            throw NotPositiveDefinite("leading minor <= 0 after ridge " + std::to_string(ridge_));
        // LLT only reports failure on a non-positive pivot; an exactly-zero pivot
        // passes and would make the factor singular.
        if (!(llt_.matrixLLT().diagonal().minCoeff() > 0.0))
            throw NotPositiveDefinite("zero pivot after ridge " + std::to_string(ridge_));
    }

    Mat lower() const { return llt_.matrixL(); }
    double ridge() const noexcept { return ridge_; }
    Eigen::Index dim() const { return llt_.matrixLLT().rows(); }

    Vec solve(const Vec& b) const {
        if (b.size() != dim()) throw DimensionMismatch("rhs length");
        return llt_.solve(b);
    }

    /// b^T (A + ridge)^{-1} b, computed as |L^{-1} b|^2.
    double inverse_quadratic_form(const Vec& b) const {
        if (b.size() != dim()) throw DimensionMismatch("rhs length");
        Vec w = llt_.matrixL().solve(b);
        return w.squaredNorm();
    }

    double log_determinant() const {
        return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
    }

    Mat inverse() const { return llt_.solve(Mat::Identity(dim(), dim())); }

private:
    Eigen::LLT<Mat> llt_;
    double ridge_ = 0.0;
};

inline Mat cholesky(const SpdMatrix& a, double ridge_tau = kDefaultRidgeTau) {
    return CholeskyFactor(a, ridge_tau).lower();
}

inline Vec spd_solve(const SpdMatrix& a, const Vec& b, double ridge_tau = kDefaultRidgeTau) {
    return CholeskyFactor(a, ridge_tau).solve(b);
}

}  // namespace stli

#endif  // STLI_NUMERICS_LINALG_HPP
