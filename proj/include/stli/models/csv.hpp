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

#ifndef STLI_MODELS_CSV_HPP
#define STLI_MODELS_CSV_HPP

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "stli/errors.hpp"
#include "stli/models/dataset.hpp"

namespace stli {

enum class HeaderMode { Auto, Present, Absent };

/// Which columns of a CSV file make up a Dataset.
///
/// Columns are referenced by header name or by 0-based index. An empty
/// `label_column` means the file has no label; "last" picks the final column.
/// With no explicit `feature_columns`, every non-label column is a feature,
/// optionally truncated to the first `first_features` in file order.
struct CsvSchema {
    HeaderMode header = HeaderMode::Auto;
    std::string label_column;
    std::vector<std::string> feature_columns;
    std::size_t first_features = 0;
    bool binary_label = true;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
    return v;
}

inline std::optional<std::size_t> parse_index(const std::string& s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return std::nullopt;
    return static_cast<std::size_t>(std::stoull(s));
}

inline std::size_t resolve_column(const std::string& ref, const std::vector<std::string>& names,
                                  std::size_t ncols) {
    if (ref == "last") return ncols - 1;
    if (auto idx = parse_index(ref)) {
        if (*idx >= ncols) throw MissingColumn("column index " + ref + " out of range (" + std::to_string(ncols) + " columns)");
        return *idx;
    }
    const auto it = std::find(names.begin(), names.end(), ref);
    if (it == names.end()) throw MissingColumn("no column named '" + ref + "'");
    return static_cast<std::size_t>(it - names.begin());
}

}  // namespace detail

/// Reads a comma-separated file into a Dataset. Errors carry the 1-based line.
inline Dataset ingest_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("cannot open '" + path + "'");

    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_no;
    std::string line;
    for (std::size_t ln = 1; std::getline(in, line); ++ln) {
        if (detail::trim(line).empty()) continue;
        rows.push_back(detail::split_csv_line(line));
        line_no.push_back(ln);
    }
    if (rows.empty()) throw MalformedRow(0, "file '" + path + "' has no rows");

    bool has_header = schema.header == HeaderMode::Present;
    if (schema.header == HeaderMode::Auto)
        has_header = std::any_of(rows[0].begin(), rows[0].end(),
                                 [](const std::string& f) { return !detail::parse_number(f); });
    std::vector<std::string> names;
    if (has_header) {
        names = rows.front();
        rows.erase(rows.begin());
        line_no.erase(line_no.begin());
    }
    if (rows.empty()) throw MalformedRow(0, "file '" + path + "' has a header but no data");
    const std::size_t ncols = has_header ? names.size() : rows.front().size();

    std::optional<std::size_t> label_col;
    if (!schema.label_column.empty()) label_col = detail::resolve_column(schema.label_column, names, ncols);

    std::vector<std::size_t> feat;
    if (!schema.feature_columns.empty()) {
        for (const auto& ref : schema.feature_columns) feat.push_back(detail::resolve_column(ref, names, ncols));
    } else {
        for (std::size_t c = 0; c < ncols; ++c)
            if (!label_col || c != *label_col) feat.push_back(c);
    }
    if (schema.first_features > 0) {
        if (schema.first_features > feat.size())
            throw MissingColumn("requested " + std::to_string(schema.first_features) + " features, file has " +
                                std::to_string(feat.size()));
        feat.resize(schema.first_features);
    }
    if (feat.empty()) throw MissingColumn("no feature columns selected");

    RowMat x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feat.size()));
    Vec y = Vec::Zero(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& fields = rows[r];
        if (fields.size() != ncols)
            throw MalformedRow(line_no[r], "expected " + std::to_string(ncols) + " fields, got " +
                                               std::to_string(fields.size()));
        auto value = [&](std::size_t c) {
            auto v = detail::parse_number(fields[c]);
            if (!v) throw MalformedRow(line_no[r], "non-numeric field '" + fields[c] + "' in column " + std::to_string(c));
            return *v;
        };
        for (std::size_t k = 0; k < feat.size(); ++k)
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = value(feat[k]);
        if (label_col) {
            double v = value(*label_col);
            if (schema.binary_label) {
                if (v == -1.0 || v == 0.0) v = 0.0;
                else if (v != 1.0) throw MalformedRow(line_no[r], "label must be one of -1, 0, 1");
            }
            y[static_cast<Eigen::Index>(r)] = v;
        }
    }
    return Dataset(std::move(x), std::move(y));
}

/// Writes features then the label, with a header row, at full precision.
inline void write_csv(const Dataset& data, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw InvalidArgument("cannot write '" + path + "'");
    for (Eigen::Index j = 0; j < data.dim(); ++j) std::fprintf(f, "f%ld,", static_cast<long>(j));
    std::fprintf(f, "label\n");
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.dim(); ++j)
            std::fprintf(f, "%.17g,", data.features()(static_cast<Eigen::Index>(i), j));
        std::fprintf(f, "%.17g\n", data.label(i));
    }
    std::fclose(f);
}

}  // namespace stli

#endif  // STLI_MODELS_CSV_HPP
