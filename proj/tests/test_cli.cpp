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

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "stli/cli/experiments.hpp"
#include "test_support.hpp"

namespace stli {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::string config_path(const std::string& name) { return std::string(STLI_CONFIG_DIR) + "/" + name; }

const std::map<std::string, std::string>& sample_configs() {
    static const std::map<std::string, std::string> m{
        {"lsnr-monitor", "lsnr_monitor.ini"}, {"adaptive-sgd", "adaptive_sgd.ini"}, {"sgld", "sgld.ini"},
        {"austerity-mh", "austerity_mh.ini"}, {"sl-abc", "sl_abc.ini"},         {"gps-abc", "gps_abc.ini"},
        {"dsgld", "dsgld.ini"}};
    return m;
}

// The sample configs scaled down so every kind runs in well under a second.
Config small(const std::string& kind) {
    Config c = Config::parse_file(config_path(sample_configs().at(kind)));
    if (kind == "lsnr-monitor") {
        c.set("lsnr-monitor", "iterations", "30");
        c.set("lsnr-monitor", "bootstrap", "50");
    } else if (kind == "adaptive-sgd") {
        c.set("adaptive-sgd", "max_iterations", "30");
    } else if (kind == "sgld") {
        c.set("sgld", "iterations", "300");
        c.set("sgld", "burn_in", "100");
    } else if (kind == "austerity-mh") {
        c.set("austerity", "steps", "50");
    } else if (kind == "sl-abc") {
        c.set("sl-abc", "steps", "100");
        c.set("sl-abc", "burn_in", "10");
    } else if (kind == "gps-abc") {
        c.set("gps-abc", "steps", "100");
        c.set("gps-abc", "burn_in", "10");
    } else if (kind == "dsgld") {
        c.set("dsgld", "rounds", "200");
        c.set("sgld", "burn_in", "50");
    }
    return c;
}

std::set<std::string> listing(const fs::path& dir) {
    std::set<std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out.insert(e.path().filename().string());
    return out;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(STLI_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(SampleConfigs, EveryKindHasAValidSample) {
    ASSERT_EQ(sample_configs().size(), experiment_kinds().size());
    for (const auto& [kind, file] : sample_configs()) {
        const Config c = Config::parse_file(config_path(file));
        const ExperimentSettings s = read_settings(c);
        EXPECT_EQ(s.kind, kind) << file;
        EXPECT_FALSE(s.output.empty());
    }
}

TEST(Settings, MissingDataPathNamesTheKey) {
    Config c = Config::parse_string(
        "[experiment]\nkind = sgld\nseed = 1\noutput = x\n[data]\nsource = csv\n[sgld]\nbatch_size = 10\n");
    try {
        read_settings(c);
        FAIL() << "expected ConfigInvalid";
    } catch (const ConfigInvalid& e) {
        const auto& v = e.violations();
        EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](const std::string& s) { return s.find("data.path") == 0; }));
    }
    c.set("data", "path", "/nonexistent/file.csv");
    try {
        read_settings(c);
        FAIL() << "expected ConfigInvalid";
    } catch (const ConfigInvalid& e) {
        EXPECT_NE(std::string(e.what()).find("does not exist"), std::string::npos);
    }
}

TEST(Settings, AllProblemsReportedTogether) {
    const Config c = Config::parse_string("[experiment]\nkind = nope\n");
    try {
        read_settings(c);
        FAIL() << "expected ConfigInvalid";
    } catch (const ConfigInvalid& e) {
        EXPECT_GE(e.violations().size(), 3u);  // kind, seed, output
    }
}

TEST(RunExperiment, ArtifactContract) {
    const std::map<std::string, std::vector<std::string>> expected{
        {"lsnr-monitor",
         {"bootstrap_density.csv", "bootstrap_histogram.csv", "bootstrap_lsnr.csv", "cdf_trace.csv", "lsnr_trace.csv"}},
        {"adaptive-sgd", {"lsnr_trace.csv", "sgd_trace.csv"}},
        {"sgld", {"chain.csv"}},
        {"austerity-mh", {"chain.csv", "exact_chain.csv"}},
        {"sl-abc", {"chain.csv"}},
        {"gps-abc", {"chain.csv", "predictive.csv", "predictive_quantiles.csv", "store.csv"}},
        {"dsgld", {"chain_0.csv", "chain_1.csv", "events.jsonl"}}};
    TempDir dir;
    for (const auto& [kind, files] : expected) {
        const fs::path out = dir.path() / kind;
        const RunResult r = run_experiment(small(kind), out.string());
        std::set<std::string> want(files.begin(), files.end());
        want.insert("manifest.json");
        want.insert("metrics.json");
        EXPECT_EQ(listing(out), want) << kind;
        EXPECT_EQ(std::set<std::string>(r.files.begin(), r.files.end()), want) << kind;

        const auto manifest = nlohmann::json::parse(testing::read_text((out / "manifest.json").string()));
        EXPECT_EQ(manifest["kind"], kind);
        EXPECT_EQ(manifest["config_hash"].get<std::string>().size(), 16u);
        EXPECT_EQ(manifest["code_version"], std::string(kVersion));
        for (const char* k : {"seed", "started_at", "finished_at"}) EXPECT_TRUE(manifest.contains(k)) << k;
        const auto listed = manifest["files"].get<std::vector<std::string>>();
        EXPECT_EQ(std::set<std::string>(listed.begin(), listed.end()), want) << kind;

        const auto metrics = nlohmann::json::parse(testing::read_text((out / "metrics.json").string()));
        EXPECT_EQ(metrics["kind"], kind);
    }
}

TEST(RunExperiment, RerunsAreByteIdentical) {
    TempDir dir;
    for (const auto& [kind, file] : sample_configs()) {
        const fs::path a = dir.path() / (kind + "_a"), b = dir.path() / (kind + "_b");
        const RunResult ra = run_experiment(small(kind), a.string());
        run_experiment(small(kind), b.string());
        for (const auto& f : ra.files) {
            if (f == "manifest.json") continue;
            EXPECT_EQ(testing::read_text((a / f).string()), testing::read_text((b / f).string())) << kind << "/" << f;
        }
    }
}

TEST(RunExperiment, SeedOverrideChangesResults) {
    TempDir dir;
    const RunResult a = run_experiment(small("sgld"), (dir.path() / "a").string(), 1);
    run_experiment(small("sgld"), (dir.path() / "b").string(), 2);
    EXPECT_NE(testing::read_text((dir.path() / "a/chain.csv").string()),
              testing::read_text((dir.path() / "b/chain.csv").string()));
    const auto m = nlohmann::json::parse(testing::read_text((dir.path() / "a/metrics.json").string()));
    EXPECT_EQ(m["seed"], 1);
    EXPECT_FALSE(a.files.empty());
}

TEST(OutputDir, ReusesOwnDirectoryButRefusesForeignFiles) {
    TempDir dir;
    const fs::path out = dir.path() / "run";
    run_experiment(small("sgld"), out.string());
    EXPECT_NO_THROW(run_experiment(small("sgld"), out.string()));
    testing::write_text((out / "notes.txt").string(), "mine");
    EXPECT_THROW(run_experiment(small("sgld"), out.string()), ConfigInvalid);
    EXPECT_TRUE(fs::exists(out / "notes.txt"));
}

TEST(Binary, ExitCodes) {
    TempDir dir;
    EXPECT_EQ(run_cli("validate --config " + config_path("sgld.ini")), 0);
    EXPECT_EQ(run_cli("--version"), 0);

    testing::write_text(dir.file("bad.ini"), "[experiment]\nkind = sgld\n");
    EXPECT_EQ(run_cli("validate --config " + dir.file("bad.ini")), 2);
    EXPECT_EQ(run_cli("run --config " + dir.file("missing.ini")), 2);
    EXPECT_EQ(run_cli("run"), 2);

    testing::write_text(dir.file("rows.csv"), "1,2,1\n3,4\n5,6,0\n");
    testing::write_text(dir.file("data.ini"),
                        "[experiment]\nkind = sgld\nseed = 1\noutput = data_out\n[data]\nsource = csv\npath = rows.csv\n"
                        "[model]\nname = logistic\n[sgld]\nbatch_size = 2\niterations = 10\n");
    EXPECT_EQ(run_cli("run --config " + dir.file("data.ini")), 3);

    // A stepsize far above the stability limit drives the chain to infinity.
    testing::write_text(dir.file("num.ini"),
                        "[experiment]\nkind = sgld\nseed = 1\noutput = num_out\n[data]\nsource = synthetic-gaussian\n"
                        "n = 1000\n[model]\nname = gaussian-mean\ntheta0 = 1\n[sgld]\na = 1e-12\neps_min = 10\n"
                        "batch_size = 100\niterations = 5000\n");
    EXPECT_EQ(run_cli("run --config " + dir.file("num.ini")), 4);

    testing::write_text(dir.file("ok.ini"), small("sgld").serialize());
    EXPECT_EQ(run_cli("run --config " + dir.file("ok.ini") + " --out " + dir.file("ok_out") + " --seed 5"), 0);
    EXPECT_TRUE(fs::exists(dir.path() / "ok_out" / "manifest.json"));
}

}  // namespace
}  // namespace stli
