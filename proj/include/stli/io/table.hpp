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

#ifndef STLI_IO_TABLE_HPP
#define STLI_IO_TABLE_HPP

#include <concepts>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "stli/errors.hpp"

namespace stli {

/// One formatted CSV field. Reals use %.17g so that files round-trip and
/// compare byte-for-byte across runs.
class Cell {
public:
    Cell(double v) : text_(format(v)) {}  // NOLINT(google-explicit-constructor)
    template <std::integral I>
        requires(!std::same_as<I, bool>)
    Cell(I v) : text_(std::to_string(v)) {}  // NOLINT(google-explicit-constructor)
    Cell(bool v) : text_(v ? "1" : "0") {}   // NOLINT(google-explicit-constructor)
    Cell(std::string s) : text_(std::move(s)) {}  // NOLINT(google-explicit-constructor)
    Cell(const char* s) : text_(s) {}             // NOLINT(google-explicit-constructor)

    const std::string& text() const noexcept { return text_; }

    static std::string format(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

private:
    std::string text_;
};

class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<Cell> row) {
        if (row.size() != header_.size()) throw InvalidArgument("row width does not match header");
        rows_.push_back(std::move(row));
    }

    std::size_t rows() const noexcept { return rows_.size(); }
    const std::vector<std::string>& header() const noexcept { return header_; }
    const std::vector<Cell>& row(std::size_t i) const { return rows_.at(i); }

    std::string to_csv() const {
        std::string out;
        append_line(out, header_);
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) out += ',';
                out += r[i].text();
            }
            out += '\n';
        }
        return out;
    }

    void write(const std::string& path) const { write_text_file(path, to_csv()); }

    static void write_text_file(const std::string& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidArgument("cannot write '" + path + "'");
        out << text;
        if (!out) throw InvalidArgument("write to '" + path + "' failed");
    }

private:
    static void append_line(std::string& out, const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += fields[i];
        }
        out += '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

}  // namespace stli

#endif  // STLI_IO_TABLE_HPP
