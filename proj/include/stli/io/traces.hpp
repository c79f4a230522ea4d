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

#ifndef STLI_IO_TRACES_HPP
#define STLI_IO_TRACES_HPP

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "stli/abc/gp.hpp"
#include "stli/abc/gps_abc.hpp"
#include "stli/chain.hpp"
#include "stli/dsgld/dsgld.hpp"
#include "stli/errors.hpp"
#include "stli/io/table.hpp"
#include "stli/sgd/adaptive_sgd.hpp"

namespace stli {

inline std::vector<std::string> indexed_names(const std::string& stem, Eigen::Index n) {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(stem + std::to_string(i));
    return out;
}

/// One row per step: iteration, theta_*, then the sampler bookkeeping fields.
inline Table chain_table(const ChainTrace& trace) {
    if (trace.empty()) throw EmptyTrace("chain has no steps");
    std::vector<std::string> header{"iteration"};
    for (auto& n : indexed_names("theta_", trace.steps.front().theta.size())) header.push_back(n);
    for (const char* n : {"stepsize", "batch_size", "batch_hash", "accepted", "error_estimate", "sim_calls", "forced",
                          "worker", "burn_in"})
        header.emplace_back(n);
    Table t(std::move(header));
    for (const auto& s : trace.steps) {
        std::vector<Cell> row{Cell(s.iteration)};
        for (Eigen::Index i = 0; i < s.theta.size(); ++i) row.emplace_back(s.theta[i]);
        row.emplace_back(s.stepsize);
        row.emplace_back(s.batch_size);
        row.emplace_back(s.batch_hash);
        row.emplace_back(s.accepted ? Cell(*s.accepted) : Cell(""));
        row.emplace_back(s.error_estimate);
        row.emplace_back(s.sim_calls);
        row.emplace_back(s.forced);
        row.emplace_back(s.worker);
        row.emplace_back(s.iteration < trace.burn_in);
        t.add_row(std::move(row));
    }
    return t;
}

/// MH chains: iteration, theta_*, n_used, verdict (accept/reject), error_estimate.
inline Table mh_chain_table(const ChainTrace& trace) {
    if (trace.empty()) throw EmptyTrace("chain has no steps");
    std::vector<std::string> header{"iteration"};
    for (auto& n : indexed_names("theta_", trace.steps.front().theta.size())) header.push_back(n);
    for (const char* n : {"n_used", "verdict", "error_estimate"}) header.emplace_back(n);
    Table t(std::move(header));
    for (const auto& s : trace.steps) {
        std::vector<Cell> row{Cell(s.iteration)};
        for (Eigen::Index i = 0; i < s.theta.size(); ++i) row.emplace_back(s.theta[i]);
        row.emplace_back(s.batch_size);
        row.emplace_back(s.accepted.value_or(false) ? "accept" : "reject");
        row.emplace_back(s.error_estimate);
        t.add_row(std::move(row));
    }
    return t;
}

/// Every stored simulation as (theta_*, stat_*), in insertion order.
inline Table store_table(const SurrogateStore& store) {
    if (store.empty()) throw EmptyTrace("surrogate store is empty");
    std::vector<std::string> header = indexed_names("theta_", store.theta_dim());
    for (auto& n : indexed_names("stat_", store.stat_dim())) header.push_back(n);
    Table t(std::move(header));
    for (std::size_t i = 0; i < store.size(); ++i) {
        std::vector<Cell> row;
        for (Eigen::Index d = 0; d < store.theta_dim(); ++d) row.emplace_back(store.thetas()[i][d]);
        for (Eigen::Index d = 0; d < store.stat_dim(); ++d) row.emplace_back(store.stats()[i][d]);
        t.add_row(std::move(row));
    }
    return t;
}

inline Table matrix_table(const Mat& m, const std::string& stem) {
    Table t(indexed_names(stem, m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<Cell> row;
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.emplace_back(m(r, c));
        t.add_row(std::move(row));
    }
    return t;
}

inline Table quantile_table(const PredictiveSet& p) {
    std::vector<std::string> header{"level"};
    for (auto& n : indexed_names("stat_", p.quantiles.cols())) header.push_back(n);
    Table t(std::move(header));
    for (std::size_t l = 0; l < p.levels.size(); ++l) {
        std::vector<Cell> row{Cell(p.levels[l])};
        for (Eigen::Index d = 0; d < p.quantiles.cols(); ++d) row.emplace_back(p.quantiles(static_cast<Eigen::Index>(l), d));
        t.add_row(std::move(row));
    }
    return t;
}

/// Full training record: one row per iteration; LSNR columns empty when not checked.
inline Table train_table(const TrainTrace& trace) {
    if (trace.records.empty()) throw EmptyTrace("training trace is empty");
    Table t({"iteration", "batch_size", "objective", "theta_norm", "lsnr", "lambda_hat", "cdf_at_one", "stop"});
    for (const auto& r : trace.records) {
        std::vector<Cell> row{Cell(r.iteration), Cell(r.batch_size), Cell(r.objective), Cell(r.theta_norm)};
        if (r.report) {
            row.emplace_back(r.report->lsnr);
            row.emplace_back(r.report->lambda_hat);
            row.emplace_back(r.report->cdf_at_one);
            row.emplace_back(r.report->stop);
        } else {
            for (int i = 0; i < 4; ++i) row.emplace_back("");
        }
        t.add_row(std::move(row));
    }
    return t;
}

/// JSON lines, one object per (round, chain).
inline std::string events_jsonl(const std::vector<DsgldEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        nlohmann::ordered_json j;
        j["round"] = e.round;
        j["chain"] = e.chain;
        j["worker"] = e.worker;
        j["steps"] = e.steps;
        j["scale"] = e.scale;
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace stli

#endif  // STLI_IO_TRACES_HPP
