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

#ifndef STLI_IO_PLOT_DATA_HPP
#define STLI_IO_PLOT_DATA_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "stli/errors.hpp"
#include "stli/io/table.hpp"
#include "stli/numerics/distributions.hpp"
#include "stli/sgd/adaptive_sgd.hpp"

namespace stli {

/// (iteration, lsnr, lambda_hat, cdf_at_one, stop) for every record that carries a report.
inline Table lsnr_curve_table(const TrainTrace& trace) {
    Table t({"iteration", "lsnr", "lambda_hat", "cdf_at_one", "stop"});
    for (const auto& r : trace.records)
        if (r.report)
            t.add_row({Cell(r.iteration), Cell(r.report->lsnr), Cell(r.report->lambda_hat), Cell(r.report->cdf_at_one),
                       Cell(r.report->stop)});
    if (t.rows() == 0) throw EmptyTrace("no LSNR records to plot");
    return t;
}

struct Histogram {
    /// bins + 1 increasing edges.
    std::vector<double> edges;
    std::vector<std::size_t> counts;

    double bin_width() const { return edges[1] - edges[0]; }
    std::size_t total() const {
        std::size_t s = 0;
        for (auto c : counts) s += c;
        return s;
    }
};

/// Equal-width bins over [min, max]; the last bin is closed on the right.
inline Histogram histogram(const std::vector<double>& values, std::size_t bins) {
    if (values.empty()) throw EmptyTrace("histogram of no values");
    if (bins < 1) throw InvalidArgument("histogram needs >= 1 bin");
    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it, hi = *hi_it;
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw InvalidArgument("histogram of non-finite values");
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    Histogram h;
    const double w = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(lo + w * static_cast<double>(i));
    h.edges.back() = hi;
    h.counts.assign(bins, 0);
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - lo) / w);
        h.counts[std::min(b, bins - 1)] += 1;
    }
    return h;
}

inline Table histogram_table(const Histogram& h) {
    Table t({"bin_lo", "bin_hi", "count"});
    for (std::size_t i = 0; i < h.counts.size(); ++i) t.add_row({Cell(h.edges[i]), Cell(h.edges[i + 1]), Cell(h.counts[i])});
    return t;
}

/// Density of LSNR = X/p, X ~ noncentral chi2, on `points` grid values across
/// the histogram range, multiplied by bin width x sample count so it overlays
/// the counts.
inline Table fitted_density_table(const NoncentralChi2& dist, const Histogram& h, std::size_t points = 200) {
    if (points < 2) throw InvalidArgument("density grid needs >= 2 points");
    const double scale = h.bin_width() * static_cast<double>(h.total());
    const double lo = h.edges.front(), hi = h.edges.back();
    Table t({"x", "density"});
    for (std::size_t i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        t.add_row({Cell(x), Cell(scale * scaled_chi2_pdf(x, dist))});
    }
    return t;
}

}  // namespace stli

#endif  // STLI_IO_PLOT_DATA_HPP
