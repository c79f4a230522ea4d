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

// stli run --config <path> [--out <dir>] [--seed <u64>]
// stli validate --config <path>
//
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric failure.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "stli/cli/experiments.hpp"

namespace {

int exit_code(stli::ErrorClass c) {
    switch (c) {
        case stli::ErrorClass::Config: return 2;
        case stli::ErrorClass::Data: return 3;
        case stli::ErrorClass::Numeric: return 4;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic-gradient and likelihood-free inference experiments"};
    app.set_version_flag("--version", std::string(stli::kVersion));
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("--config", config_path, "experiment config (INI)")->required();
    auto* out_opt = run->add_option("--out", out_dir, "output directory (overrides [experiment] output)");
    auto* seed_opt = run->add_option("--seed", seed, "seed (overrides [experiment] seed)");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a config file and list every problem");
    validate->add_option("--config", validate_path, "experiment config (INI)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            const stli::Config cfg = stli::Config::parse_file(config_path);
            std::optional<std::string> out;
            std::optional<std::uint64_t> seed_override;
            if (*out_opt) out = out_dir;
            if (*seed_opt) seed_override = seed;
            const stli::RunResult r = stli::run_experiment(cfg, out, seed_override);
            std::printf("wrote %zu files to %s\n", r.files.size(), r.output_dir.c_str());
        } else {
            const stli::Config cfg = stli::Config::parse_file(validate_path);
            const stli::ExperimentSettings s = stli::read_settings(cfg);
            std::printf("ok: %s (config hash %s)\n", s.kind.c_str(), cfg.hash().c_str());
        }
    } catch (const stli::ConfigInvalid& e) {
        std::fprintf(stderr, "stli: invalid config:\n");
        for (const auto& v : e.violations()) std::fprintf(stderr, "  - %s\n", v.c_str());
        return 2;
    } catch (const stli::Error& e) {
        std::fprintf(stderr, "stli: %s\n", e.what());
        return exit_code(e.error_class());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "stli: unexpected failure: %s\n", e.what());
        return 1;
    }
    return 0;
}
