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

#ifndef STLI_MODELS_DATASET_HPP
#define STLI_MODELS_DATASET_HPP

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "stli/errors.hpp"
#include "stli/numerics/linalg.hpp"
#include "stli/numerics/rng.hpp"

namespace stli {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Immutable table of N rows, each a feature vector of length d plus a label.
class Dataset {
public:
    Dataset(RowMat features, Vec labels) : x_(std::move(features)), y_(std::move(labels)) {
        if (x_.rows() < 1) throw InvalidArgument("dataset needs at least one row");
        if (y_.size() != x_.rows()) throw DimensionMismatch("label count != row count");
    }

    /// Features only; labels are zero.
    explicit Dataset(RowMat features) : Dataset(features, Vec::Zero(features.rows())) {}

    std::size_t size() const noexcept { return static_cast<std::size_t>(x_.rows()); }
    Eigen::Index dim() const noexcept { return x_.cols(); }

    auto row(std::size_t i) const { return x_.row(static_cast<Eigen::Index>(i)).transpose(); }
    double label(std::size_t i) const { return y_[static_cast<Eigen::Index>(i)]; }

    const RowMat& features() const noexcept { return x_; }
    const Vec& labels() const noexcept { return y_; }

    Dataset subset(const std::vector<std::size_t>& idx) const {
        RowMat x(static_cast<Eigen::Index>(idx.size()), x_.cols());
        Vec y(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) {
            x.row(static_cast<Eigen::Index>(k)) = x_.row(static_cast<Eigen::Index>(idx[k]));
            y[static_cast<Eigen::Index>(k)] = y_[static_cast<Eigen::Index>(idx[k])];
        }
        return Dataset(std::move(x), std::move(y));
    }

    /// Contiguous rows [begin, end).
    Dataset slice(std::size_t begin, std::size_t end) const {
        if (begin >= end || end > size()) throw InvalidArgument("bad slice");
        const auto b = static_cast<Eigen::Index>(begin), n = static_cast<Eigen::Index>(end - begin);
        return Dataset(x_.middleRows(b, n), y_.segment(b, n));
    }

private:
    RowMat x_;
    Vec y_;
};

struct Standardization {
    Vec mean;
    Vec stddev;
};

/// Centers each feature column and scales it to unit (population) variance.
/// Constant columns are only centered.
inline std::pair<Dataset, Standardization> standardize(const Dataset& data) {
    const RowMat& x = data.features();
    Standardization st{x.colwise().mean().transpose(), Vec(x.cols())};
    RowMat z = x.rowwise() - st.mean.transpose();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double sd = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(x.rows()));
        st.stddev[j] = sd > 0.0 ? sd : 1.0;
        z.col(j) /= st.stddev[j];
    }
    return {Dataset(std::move(z), data.labels()), std::move(st)};
}

/// Seeded shuffle, then the first round(fraction * N) rows become the train part.
inline std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, RngStream& rng) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("split fraction must be in (0,1)");
    const std::size_t n = data.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (k == 0 || k == n) throw InvalidArgument("split leaves an empty part");
    std::vector<std::size_t> a(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<std::size_t> b(idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
    return {data.subset(a), data.subset(b)};
}

}  // namespace stli

#endif  // STLI_MODELS_DATASET_HPP
