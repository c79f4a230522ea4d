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

#ifndef STLI_IO_CONFIG_HPP
#define STLI_IO_CONFIG_HPP

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stli/errors.hpp"
#include "stli/models/csv.hpp"

namespace stli {

/// Sectioned key-value configuration. Sections and keys are kept sorted so
/// that serialization does not depend on the order they were written in.
class Config {
public:
    using Section = std::map<std::string, std::string>;

    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        std::istringstream in(text);
        boost::property_tree::ptree tree;
        try {
            boost::property_tree::ini_parser::read_ini(in, tree);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigInvalid({origin + ": line " + std::to_string(e.line()) + ": " + e.message()});
        }
        Config cfg;
        for (const auto& [sec, body] : tree) {
            if (body.empty()) throw ConfigInvalid({origin + ": key '" + sec + "' outside any section"});
            Section& s = cfg.sections_[sec];
            for (const auto& [key, value] : body) s[key] = value.get_value<std::string>();
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigInvalid({"cannot read config file '" + path + "'"});
        std::ostringstream text;
        text << in.rdbuf();
        Config cfg = parse_string(text.str(), path);
        cfg.base_dir_ = std::filesystem::absolute(path).parent_path().string();
        return cfg;
    }

    /// Canonical text: sections and keys in sorted order, one `key = value` per line.
    std::string serialize() const {
        std::string out;
        for (const auto& [sec, keys] : sections_) {
            if (!out.empty()) out += '\n';
            out += "[" + sec + "]\n";
            for (const auto& [k, v] : keys) out += k + " = " + v + "\n";
        }
        return out;
    }

    /// FNV-1a of the canonical text, as 16 hex digits.
    std::string hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : serialize()) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    bool has(const std::string& sec, const std::string& key) const {
        const auto s = sections_.find(sec);
        return s != sections_.end() && s->second.count(key) > 0;
    }
    bool has_section(const std::string& sec) const { return sections_.count(sec) > 0; }

    std::optional<std::string> get(const std::string& sec, const std::string& key) const {
        const auto s = sections_.find(sec);
        if (s == sections_.end()) return std::nullopt;
        const auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        return k->second;
    }

    void set(const std::string& sec, const std::string& key, const std::string& value) { sections_[sec][key] = value; }

    const std::map<std::string, Section>& sections() const noexcept { return sections_; }

    /// Directory relative paths in the config resolve against (the config file's).
    const std::string& base_dir() const noexcept { return base_dir_; }
    std::string resolve_path(const std::string& p) const {
        if (p.empty() || std::filesystem::path(p).is_absolute() || base_dir_.empty()) return p;
        return (std::filesystem::path(base_dir_) / p).lexically_normal().string();
    }

    friend bool operator==(const Config& a, const Config& b) { return a.sections_ == b.sections_; }

private:
    std::map<std::string, Section> sections_;
    std::string base_dir_;
};

/// Typed reads that collect every violation instead of stopping at the first.
class ConfigReader {
public:
    explicit ConfigReader(const Config& cfg) : cfg_(cfg) {}

    const Config& config() const noexcept { return cfg_; }
    const std::vector<std::string>& violations() const noexcept { return violations_; }
    void fail(const std::string& msg) { violations_.push_back(msg); }

    void throw_if_invalid() const {
        if (!violations_.empty()) throw ConfigInvalid(violations_);
    }

    std::string require_string(const std::string& sec, const std::string& key) {
        auto v = cfg_.get(sec, key);
        if (!v || v->empty()) {
            fail(sec + "." + key + ": required key missing");
            return {};
        }
        return *v;
    }

    std::string string_or(const std::string& sec, const std::string& key, const std::string& fallback) {
        auto v = cfg_.get(sec, key);
        return v ? *v : fallback;
    }

    double real(const std::string& sec, const std::string& key, std::optional<double> fallback) {
        auto v = cfg_.get(sec, key);
        if (!v) {
            if (!fallback) fail(sec + "." + key + ": required key missing");
            return fallback.value_or(0.0);
        }
        if (auto x = detail::parse_number(*v)) return *x;
        fail(sec + "." + key + ": '" + *v + "' is not a number");
        return fallback.value_or(0.0);
    }

    std::uint64_t count(const std::string& sec, const std::string& key, std::optional<std::uint64_t> fallback) {
        auto v = cfg_.get(sec, key);
        if (!v) {
            if (!fallback) fail(sec + "." + key + ": required key missing");
            return fallback.value_or(0);
        }
        const std::string t = detail::trim(*v);
        if (!t.empty() && t.find_first_not_of("0123456789") == std::string::npos) {
            try {
                return std::stoull(t);
            } catch (const std::out_of_range&) {
            }
        }
        fail(sec + "." + key + ": '" + *v + "' is not a non-negative integer");
        return fallback.value_or(0);
    }

    bool flag(const std::string& sec, const std::string& key, bool fallback) {
        auto v = cfg_.get(sec, key);
        if (!v) return fallback;
        const std::string t = detail::trim(*v);
        if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
        if (t == "false" || t == "0" || t == "no" || t == "off") return false;
        fail(sec + "." + key + ": '" + *v + "' is not a boolean");
        return fallback;
    }

    /// Whitespace- or comma-separated list of numbers.
    std::vector<double> reals(const std::string& sec, const std::string& key, std::optional<std::vector<double>> fallback) {
        auto v = cfg_.get(sec, key);
        if (!v) {
            if (!fallback) fail(sec + "." + key + ": required key missing");
            return fallback.value_or(std::vector<double>{});
        }
        std::string s = *v;
        for (char& c : s)
            if (c == ',') c = ' ';
        std::istringstream in(s);
        std::vector<double> out;
        std::string tok;
        while (in >> tok) {
            if (auto x = detail::parse_number(tok)) {
                out.push_back(*x);
            } else {
                fail(sec + "." + key + ": '" + tok + "' is not a number");
                return fallback.value_or(std::vector<double>{});
            }
        }
        if (out.empty()) fail(sec + "." + key + ": empty list");
        return out;
    }

    void positive(const std::string& sec, const std::string& key, double x) {
        if (!(x > 0.0)) fail(sec + "." + key + ": must be > 0");
    }

    void one_of(const std::string& sec, const std::string& key, const std::string& value,
                const std::vector<std::string>& allowed) {
        for (const auto& a : allowed)
            if (value == a) return;
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(sec + "." + key + ": '" + value + "' is not one of {" + list + "}");
    }

private:
    const Config& cfg_;
    std::vector<std::string> violations_;
};

}  // namespace stli

#endif  // STLI_IO_CONFIG_HPP
