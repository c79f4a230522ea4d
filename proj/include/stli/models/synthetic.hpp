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

#ifndef STLI_MODELS_SYNTHETIC_HPP
#define STLI_MODELS_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "stli/models/csv.hpp"
#include "stli/models/dataset.hpp"
#include "stli/numerics/rng.hpp"

namespace stli {

/// Shape of the UCI Spambase table: 4601 rows, 57 non-negative features
/// (48 word frequencies, 6 character frequencies, 3 capital-run statistics)
/// and a final 0/1 label with 1813 positives.
struct SpambaseShape {
    static constexpr std::size_t rows = 4601;
    static constexpr std::size_t features = 57;
    static constexpr std::size_t positives = 1813;
};

/// Deterministic stand-in for Spambase with the same shape and a similar
/// sparsity pattern. Each frequency feature is zero with a class-dependent
/// probability and log-normal otherwise; the capital-run features are always
/// present and shifted upward for the positive class. Classes overlap, so a
/// logistic fit on any feature subset is not separable.
inline Dataset spambase_like(std::uint64_t fixture_seed = 94) {
    constexpr std::size_t n = SpambaseShape::rows, d = SpambaseShape::features;
    RngStream params(fixture_seed, 1);
    struct Feature {
        double p_ham, p_spam, mu_ham, mu_spam, sigma;
    };
    std::vector<Feature> spec(d);
    // Leading word-frequency columns: approximate per-class presence rates
    // and means (ham, spam) of the corresponding Spambase columns.
    struct Profile {
        double p_ham, p_spam, mean_ham, mean_spam;
    };
    static constexpr Profile kLeading[] = {
        {0.13, 0.35, 0.073, 0.152}, {0.15, 0.30, 0.244, 0.165}, {0.30, 0.60, 0.201, 0.404},
        {0.005, 0.02, 0.001, 0.165}, {0.25, 0.65, 0.181, 0.514}, {0.12, 0.45, 0.045, 0.175},
        {0.03, 0.55, 0.009, 0.275}, {0.08, 0.40, 0.038, 0.208}, {0.07, 0.40, 0.038, 0.170},
        {0.20, 0.50, 0.167, 0.350},
    };
    constexpr double kLeadingSigma = 0.8;
    for (std::size_t j = 0; j < d; ++j) {
        Feature f{};
        if (j < std::size(kLeading)) {
            // Mean of a zero-inflated log-normal is p exp(mu + sigma^2 / 2).
            const Profile& q = kLeading[j];
            f.p_ham = q.p_ham;
            f.p_spam = q.p_spam;
            f.sigma = kLeadingSigma;
            f.mu_ham = std::log(q.mean_ham / q.p_ham) - 0.5 * kLeadingSigma * kLeadingSigma;
            f.mu_spam = std::log(q.mean_spam / q.p_spam) - 0.5 * kLeadingSigma * kLeadingSigma;
        } else if (j < 54) {
            f.p_ham = 0.05 + 0.45 * params.uniform();
            f.p_spam = std::clamp(f.p_ham + 0.5 * (params.uniform() - 0.4), 0.02, 0.9);
            f.mu_ham = -1.5 + 1.5 * params.uniform();
            f.mu_spam = f.mu_ham + 0.8 * (params.uniform() - 0.35);
            f.sigma = 0.6 + 0.5 * params.uniform();
        } else {
            f.p_ham = f.p_spam = 1.0;
            f.mu_ham = 0.8 + 0.8 * params.uniform();
            f.mu_spam = f.mu_ham + 0.5 + 0.5 * params.uniform();
            f.sigma = 0.9;
        }
        spec[j] = f;
    }

    RngStream labels(fixture_seed, 2);
    std::vector<double> y(n, 0.0);
    std::fill(y.begin(), y.begin() + SpambaseShape::positives, 1.0);
    for (std::size_t i = n; i > 1; --i) std::swap(y[i - 1], y[labels.below(i)]);

    RngStream values(fixture_seed, 3);
    RowMat x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Vec yy(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const bool spam = y[i] > 0.5;
        yy[static_cast<Eigen::Index>(i)] = y[i];
        for (std::size_t j = 0; j < d; ++j) {
            const Feature& f = spec[j];
            const double present = values.uniform();
            const double z = values.normal();
            const double p = spam ? f.p_spam : f.p_ham;
            const double mu = spam ? f.mu_spam : f.mu_ham;
            double v = present < p ? std::exp(mu + f.sigma * z) : 0.0;
            // Spambase stores percentages rounded to two decimals.
            if (j < 54) v = std::round(v * 100.0) / 100.0;
            else v = std::round(v * 10.0);
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return Dataset(std::move(x), std::move(yy));
}

/// Writes the fixture in the Spambase file layout: no header, label last.
inline void write_spambase_like(const std::string& path, std::uint64_t fixture_seed = 94) {
    const Dataset data = spambase_like(fixture_seed);
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw InvalidArgument("cannot write '" + path + "'");
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.dim(); ++j)
            std::fprintf(f, "%.10g,", data.features()(static_cast<Eigen::Index>(i), j));
        std::fprintf(f, "%d\n", static_cast<int>(data.label(i)));
    }
    std::fclose(f);
}

/// The logistic-regression experiment table: first 10 features in file
/// order, standardized, then a seeded 80% split (3681 of 4601 rows).
inline Dataset spam_experiment_table(const Dataset& raw, RngStream& split_rng, std::size_t n_features = 10,
                                     double train_fraction = 0.8) {
    RowMat x = raw.features().leftCols(static_cast<Eigen::Index>(n_features));
    auto [z, st] = standardize(Dataset(std::move(x), raw.labels()));
    return split(z, train_fraction, split_rng).first;
}

/// N draws of x ~ N(mean, sigma^2) as a one-column dataset.
inline Dataset gaussian_points(std::size_t n, double mean, double sigma, RngStream& rng) {
    RowMat x(static_cast<Eigen::Index>(n), 1);
    for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i), 0) = mean + sigma * rng.normal();
    return Dataset(std::move(x));
}

}  // namespace stli

#endif  // STLI_MODELS_SYNTHETIC_HPP
