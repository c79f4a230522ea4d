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

// Config-driven experiment runners.
//
// A run reads one config, draws every random number from streams derived
// from [experiment] seed, writes its artifacts into the output directory and
// finishes with manifest.json listing exactly the files in that directory.

#ifndef STLI_CLI_EXPERIMENTS_HPP
#define STLI_CLI_EXPERIMENTS_HPP

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "stli/abc/gps_abc.hpp"
#include "stli/abc/simulator.hpp"
#include "stli/abc/synthetic_likelihood.hpp"
#include "stli/dsgld/dsgld.hpp"
#include "stli/errors.hpp"
#include "stli/io/config.hpp"
#include "stli/io/plot_data.hpp"
#include "stli/io/table.hpp"
#include "stli/io/traces.hpp"
#include "stli/lsnr/lsnr.hpp"
#include "stli/mh/austerity.hpp"
#include "stli/mh/proposal.hpp"
#include "stli/models/csv.hpp"
#include "stli/models/synthetic.hpp"
#include "stli/sgd/adaptive_sgd.hpp"
#include "stli/sgld/sgld.hpp"
#include "stli/version.hpp"

namespace stli {

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{"lsnr-monitor", "adaptive-sgd", "sgld", "austerity-mh",
                                                "sl-abc",       "gps-abc",      "dsgld"};
    return kinds;
}

/// A library error annotated with the experiment kind; keeps the error class.
class ExperimentError : public Error {
public:
    ExperimentError(const std::string& kind, const Error& cause)
        : Error(cause.error_class(), kind + ": " + cause.what()) {}
};

// ---------------------------------------------------------------- settings

struct DataSettings {
    std::string source;
    std::string path;
    CsvSchema schema;
    bool standardize = false;
    double train_fraction = 1.0;
    std::size_t n = 1000;
    double mean = 0.0;
    double sigma = 1.0;
    std::uint64_t fixture_seed = 94;
};

struct ModelSettings {
    std::string name;
    double sigma2 = 1.0;
    GaussianPrior prior;
    std::vector<double> theta0;
};

struct AbcSettings {
    std::string simulator;
    Eigen::Index dim = 1;
    double noise_sd = 1.0;
    int replicates = 1;
    std::string command;
    Eigen::Index theta_dim = 1, stat_dim = 1;
    std::vector<double> observed;
    AbcPrior prior;
    double proposal_scale = 1.0;
    std::vector<double> theta0;
};

struct ExperimentSettings {
    std::string kind;
    std::uint64_t seed = 0;
    std::string output;
    DataSettings data;
    ModelSettings model;
    AbcSettings abc;

    TrainConfig train;
    std::size_t bootstrap = 0;
    std::size_t bins = 30;
    std::size_t density_points = 200;

    SgldConfig sgld;

    MhChainConfig mh;
    double mh_proposal_scale = 0.01;

    SlChainConfig sl;
    GpsAbcConfig gps;
    std::size_t predictive_draws = 1;
    std::size_t predictive_thin = 10;

    std::vector<double> fractions, speeds;
    SimSchedule schedule;
    DsgldOptions dsgld;
    std::string shard_order = "given";
};

inline bool kind_uses_data(const std::string& kind) { return kind != "sl-abc" && kind != "gps-abc"; }

inline void read_data(ConfigReader& r, ExperimentSettings& s) {
    DataSettings& d = s.data;
    d.source = r.require_string("data", "source");
    if (d.source.empty()) return;
    r.one_of("data", "source", d.source, {"csv", "synthetic-spam", "synthetic-gaussian"});
    if (d.source == "csv") {
        d.path = r.require_string("data", "path");
        if (!d.path.empty()) {
            d.path = r.config().resolve_path(d.path);
            if (!std::filesystem::is_regular_file(d.path)) r.fail("data.path: file '" + d.path + "' does not exist");
        }
        const std::string header = r.string_or("data", "header", "auto");
        r.one_of("data", "header", header, {"auto", "present", "absent"});
        d.schema.header = header == "present" ? HeaderMode::Present : header == "absent" ? HeaderMode::Absent : HeaderMode::Auto;
        d.schema.label_column = r.string_or("data", "label", "last");
        d.schema.first_features = r.count("data", "features", 0);
        d.schema.binary_label = r.flag("data", "binary_label", true);
        d.standardize = r.flag("data", "standardize", false);
        d.train_fraction = r.real("data", "train_fraction", 1.0);
    } else if (d.source == "synthetic-spam") {
        d.schema.first_features = r.count("data", "features", 10);
        d.standardize = r.flag("data", "standardize", true);
        d.train_fraction = r.real("data", "train_fraction", 0.8);
        d.fixture_seed = r.count("data", "fixture_seed", 94);
        if (d.schema.first_features < 1 || d.schema.first_features > SpambaseShape::features)
            r.fail("data.features: must be in [1, 57]");
    } else if (d.source == "synthetic-gaussian") {
        d.n = r.count("data", "n", 1000);
        d.mean = r.real("data", "mean", 0.0);
        d.sigma = r.real("data", "sigma", 1.0);
        d.train_fraction = 1.0;
        if (d.n < 2) r.fail("data.n: must be >= 2");
        r.positive("data", "sigma", d.sigma);
    }
    if (!(d.train_fraction > 0.0 && d.train_fraction <= 1.0)) r.fail("data.train_fraction: must be in (0, 1]");
}

inline void read_model(ConfigReader& r, ExperimentSettings& s) {
    ModelSettings& m = s.model;
    m.name = r.string_or("model", "name", s.data.source == "synthetic-gaussian" ? "gaussian-mean" : "logistic");
    r.one_of("model", "name", m.name, {"logistic", "gaussian-mean"});
    m.sigma2 = r.real("model", "sigma2", 1.0);
    r.positive("model", "sigma2", m.sigma2);
    m.prior.mean = r.real("model", "prior_mean", 0.0);
    if (r.config().has("model", "prior_variance")) {
        m.prior.variance = r.real("model", "prior_variance", std::nullopt);
        r.positive("model", "prior_variance", m.prior.variance);
    }
    if (r.config().has("model", "theta0")) m.theta0 = r.reals("model", "theta0", std::nullopt);
}

inline void read_sgld(ConfigReader& r, SgldConfig& c) {
    c.a = r.real("sgld", "a", 1e-3);
    c.b = r.real("sgld", "b", 1.0);
    c.gamma = r.real("sgld", "gamma", 0.55);
    const std::string floor = r.string_or("sgld", "eps_min", "0");
    if (floor == "auto") c.eps_min.reset();
    else c.eps_min = r.real("sgld", "eps_min", 0.0);
    c.batch_size = r.count("sgld", "batch_size", 10);
    c.iterations = r.count("sgld", "iterations", 1000);
    c.burn_in = r.count("sgld", "burn_in", 0);
    c.precondition = r.flag("sgld", "precondition", false);
    c.precondition_window = r.count("sgld", "precondition_window", 100);
    c.inject_noise = r.flag("sgld", "inject_noise", true);
    if (!(c.a > 0.0)) r.fail("sgld.a: must be > 0");
    if (!(c.b > 0.0)) r.fail("sgld.b: must be > 0");
    if (!(c.gamma > 0.5 && c.gamma <= 1.0)) r.fail("sgld.gamma: must be in (0.5, 1]");
    if (c.eps_min && !(*c.eps_min >= 0.0)) r.fail("sgld.eps_min: must be >= 0 or 'auto'");
    if (c.batch_size < 1) r.fail("sgld.batch_size: must be >= 1");
}

inline void read_abc(ConfigReader& r, ExperimentSettings& s) {
    AbcSettings& a = s.abc;
    a.simulator = r.require_string("abc", "simulator");
    if (!a.simulator.empty())
        r.one_of("abc", "simulator", a.simulator, {"gaussian-location", "exponential-rate", "external"});
    a.noise_sd = r.real("abc", "noise_sd", 1.0);
    a.replicates = static_cast<int>(r.count("abc", "replicates", a.simulator == "exponential-rate" ? 10 : 1));
    if (a.simulator == "gaussian-location") {
        a.dim = a.theta_dim = a.stat_dim = static_cast<Eigen::Index>(r.count("abc", "dim", 1));
        r.positive("abc", "noise_sd", a.noise_sd);
    } else if (a.simulator == "exponential-rate") {
        a.theta_dim = a.stat_dim = 1;
    } else if (a.simulator == "external") {
        a.command = r.require_string("abc", "command");
        a.theta_dim = static_cast<Eigen::Index>(r.count("abc", "theta_dim", std::nullopt));
        a.stat_dim = static_cast<Eigen::Index>(r.count("abc", "stat_dim", std::nullopt));
    }
    if (a.replicates < 1) r.fail("abc.replicates: must be >= 1");
    if (a.theta_dim < 1 || a.stat_dim < 1) r.fail("abc: theta_dim and stat_dim must be >= 1");
    a.observed = r.reals("abc", "observed", std::nullopt);
    if (!a.observed.empty() && static_cast<Eigen::Index>(a.observed.size()) != a.stat_dim)
        r.fail("abc.observed: expected " + std::to_string(a.stat_dim) + " values");

    const std::string prior = r.string_or("abc", "prior", "normal");
    r.one_of("abc", "prior", prior, {"normal", "uniform"});
    // normal: (mean, sd); uniform: (lower, upper)
    const double pa = r.real("abc", "prior_a", 0.0);
    const double pb = r.real("abc", "prior_b", 10.0);
    if (prior == "uniform") {
        if (!(pb > pa)) r.fail("abc.prior_b: must exceed prior_a for a uniform prior");
        else a.prior = AbcPrior::uniform(pa, pb);
    } else {
        if (!(pb > 0.0)) r.fail("abc.prior_b: normal prior sd must be > 0");
        else a.prior = AbcPrior::normal(pa, pb);
    }
    a.proposal_scale = r.real("abc", "proposal_scale", 1.0);
    r.positive("abc", "proposal_scale", a.proposal_scale);
    if (r.config().has("abc", "theta0")) {
        a.theta0 = r.reals("abc", "theta0", std::nullopt);
        if (!a.theta0.empty() && static_cast<Eigen::Index>(a.theta0.size()) != a.theta_dim)
            r.fail("abc.theta0: expected " + std::to_string(a.theta_dim) + " values");
    }
}

/// Reads and checks every key the selected kind needs. All problems are
/// reported together through ConfigInvalid.
inline ExperimentSettings read_settings(const Config& cfg, const std::optional<std::string>& out_override = {}) {
    ConfigReader r(cfg);
    ExperimentSettings s;
    s.kind = r.require_string("experiment", "kind");
    if (!s.kind.empty()) r.one_of("experiment", "kind", s.kind, experiment_kinds());
    s.seed = r.count("experiment", "seed", std::nullopt);
    if (out_override) {
        s.output = *out_override;
    } else {
        s.output = r.require_string("experiment", "output");
        s.output = cfg.resolve_path(s.output);
    }

    const std::string& k = s.kind;
    if (kind_uses_data(k)) {
        read_data(r, s);
        read_model(r, s);
    }
    if (k == "lsnr-monitor" || k == "adaptive-sgd") {
        const std::string sec = k;
        TrainConfig& t = s.train;
        t.mode = k == "lsnr-monitor" ? TrainMode::FullBatchMonitor : TrainMode::Adaptive;
        t.stepsize = r.real(sec, "stepsize", 0.5);
        t.delta = r.real(sec, "delta", 0.5);
        t.check_period = r.count(sec, "check_period", 1);
        t.lsnr.diagonal = r.flag(sec, "diagonal", false);
        t.lsnr.ridge_tau = r.real(sec, "ridge_tau", kDefaultRidgeTau);
        if (k == "lsnr-monitor") {
            t.max_iterations = r.count(sec, "iterations", 1000);
            s.bootstrap = r.count(sec, "bootstrap", 0);
            s.bins = r.count(sec, "bins", 30);
            s.density_points = r.count(sec, "density_points", 200);
            if (s.bins < 1) r.fail(sec + ".bins: must be >= 1");
            if (s.density_points < 2) r.fail(sec + ".density_points: must be >= 2");
        } else {
            t.initial_batch = r.count(sec, "initial_batch", 100);
            t.growth_factor = r.real(sec, "growth", 2.0);
            t.max_iterations = r.count(sec, "max_iterations", 1000);
            if (t.initial_batch < 2) r.fail(sec + ".initial_batch: must be >= 2");
            if (!(t.growth_factor > 1.0)) r.fail(sec + ".growth: must be > 1");
        }
        r.positive(sec, "stepsize", t.stepsize);
        if (!(t.delta > 0.0 && t.delta < 1.0)) r.fail(sec + ".delta: must be in (0, 1)");
        if (t.check_period < 1) r.fail(sec + ".check_period: must be >= 1");
        if (t.max_iterations < 1) r.fail(sec + ": iteration count must be >= 1");
    } else if (k == "sgld" || k == "dsgld") {
        read_sgld(r, s.sgld);
        if (k == "dsgld") {
            s.fractions = r.reals("dsgld", "fractions", std::vector<double>{0.5, 0.5});
            s.speeds = r.reals("dsgld", "speeds", std::vector<double>(s.fractions.size(), 1.0));
            s.schedule.round_length = r.real("dsgld", "round_length", 1.0);
            s.schedule.rounds = r.count("dsgld", "rounds", 100);
            s.schedule.exchange = r.flag("dsgld", "exchange", false);
            s.dsgld.chains = r.count("dsgld", "chains", 0);
            s.dsgld.compensate = r.flag("dsgld", "compensate", true);
            s.shard_order = r.string_or("dsgld", "shard_order", "given");
            r.one_of("dsgld", "shard_order", s.shard_order, {"given", "sorted"});
            if (s.fractions.size() != s.speeds.size()) r.fail("dsgld.speeds: need one speed per shard fraction");
            for (double f : s.fractions)
                if (!(f > 0.0)) r.fail("dsgld.fractions: every fraction must be > 0");
            for (double v : s.speeds)
                if (!(v > 0.0)) r.fail("dsgld.speeds: every speed must be > 0");
            r.positive("dsgld", "round_length", s.schedule.round_length);
            if (s.schedule.rounds < 1) r.fail("dsgld.rounds: must be >= 1");
        }
    } else if (k == "austerity-mh") {
        const std::string sec = "austerity";
        s.mh.steps = r.count(sec, "steps", 1000);
        s.mh.burn_in = r.count(sec, "burn_in", 0);
        s.mh.test.eps_conf = r.real(sec, "eps_conf", 0.05);
        s.mh.test.initial_batch = r.count(sec, "initial_batch", 0);
        s.mh.test.growth = r.real(sec, "growth", 2.0);
        s.mh_proposal_scale = r.real(sec, "proposal_scale", 0.01);
        if (!(s.mh.test.eps_conf > 0.0 && s.mh.test.eps_conf < 0.5)) r.fail(sec + ".eps_conf: must be in (0, 0.5)");
        if (!(s.mh.test.growth > 1.0)) r.fail(sec + ".growth: must be > 1");
        r.positive(sec, "proposal_scale", s.mh_proposal_scale);
        if (s.mh.burn_in > s.mh.steps) r.fail(sec + ".burn_in: exceeds steps");
    } else if (k == "sl-abc") {
        read_abc(r, s);
        s.sl.steps = r.count(k, "steps", 1000);
        s.sl.burn_in = r.count(k, "burn_in", 0);
        s.sl.s_count = r.count(k, "s_count", 10);
        s.sl.resimulate_current = r.flag(k, "resimulate_current", false);
        if (s.sl.s_count < static_cast<std::size_t>(s.abc.stat_dim) + 2) r.fail(k + ".s_count: must be >= stat_dim + 2");
        if (s.sl.burn_in > s.sl.steps) r.fail(k + ".burn_in: exceeds steps");
    } else if (k == "gps-abc") {
        read_abc(r, s);
        GpsAbcConfig& g = s.gps;
        g.steps = r.count(k, "steps", 1000);
        g.burn_in = r.count(k, "burn_in", 0);
        g.xi = r.real(k, "xi", 0.2);
        g.mc_rounds = r.count(k, "mc_rounds", 200);
        g.acquire_batch = r.count(k, "acquire_batch", 1);
        g.max_acquisitions = r.count(k, "max_acquisitions", 10);
        g.init_thetas = r.count(k, "init_thetas", 10);
        g.init_sims = r.count(k, "init_sims", 5);
        s.predictive_draws = r.count(k, "predictive_draws", 1);
        s.predictive_thin = r.count(k, "predictive_thin", 10);
        if (!(g.xi > 0.0 && g.xi < 0.5)) r.fail(k + ".xi: must be in (0, 0.5)");
        if (g.mc_rounds < 100) r.fail(k + ".mc_rounds: must be >= 100");
        if (g.acquire_batch < 1) r.fail(k + ".acquire_batch: must be >= 1");
        if (g.init_thetas < 2) r.fail(k + ".init_thetas: must be >= 2");
        if (g.init_sims < 2) r.fail(k + ".init_sims: must be >= 2");
        if (g.burn_in > g.steps) r.fail(k + ".burn_in: exceeds steps");
        if (s.predictive_draws < 1 || s.predictive_thin < 1) r.fail(k + ": predictive_draws and predictive_thin must be >= 1");
    }
    r.throw_if_invalid();
    return s;
}

// ---------------------------------------------------------------- inputs

/// Stream ids under the config seed. Data generation, the train/test split
/// and the experiment itself never share a stream.
enum StreamId : std::uint64_t { kDataStream = 1, kSplitStream = 2, kRunStream = 3 };

inline Dataset load_dataset(const ExperimentSettings& s) {
    const DataSettings& d = s.data;
    Dataset data = [&] {
        if (d.source == "csv") return ingest_csv(d.path, d.schema);
        if (d.source == "synthetic-spam") {
            const Dataset raw = spambase_like(d.fixture_seed);
            RowMat x = raw.features().leftCols(static_cast<Eigen::Index>(d.schema.first_features));
            return Dataset(std::move(x), raw.labels());
        }
        RngStream rng(s.seed, kDataStream);
        return gaussian_points(d.n, d.mean, d.sigma, rng);
    }();
    if (d.standardize) data = standardize(data).first;
    if (d.train_fraction < 1.0) {
        RngStream split_rng(s.seed, kSplitStream);
        data = split(data, d.train_fraction, split_rng).first;
    }
    return data;
}

using AnyModel = std::variant<LogisticModel, GaussianMeanModel>;

inline AnyModel make_model(const ModelSettings& m) {
    if (m.name == "gaussian-mean") return GaussianMeanModel(m.sigma2, m.prior);
    return LogisticModel{m.prior};
}

template <class M>
Vec initial_theta(const ModelSettings& m, const M& model, const Dataset& data) {
    const Eigen::Index p = model.param_dim(data);
    if (m.theta0.empty()) return Vec::Zero(p);
    if (static_cast<Eigen::Index>(m.theta0.size()) != p)
        throw ConfigInvalid({"model.theta0: expected " + std::to_string(p) + " values, got " + std::to_string(m.theta0.size())});
    return Eigen::Map<const Vec>(m.theta0.data(), p);
}

inline std::unique_ptr<Simulator> make_simulator(const AbcSettings& a) {
    if (a.simulator == "gaussian-location") return std::make_unique<GaussianLocationSimulator>(a.dim, a.noise_sd, a.replicates);
    if (a.simulator == "exponential-rate") return std::make_unique<ExponentialRateSimulator>(a.replicates);
    return std::make_unique<ExternalProcessSimulator>(a.command, a.theta_dim, a.stat_dim);
}

inline Vec abc_theta0(const AbcSettings& a) {
    if (!a.theta0.empty()) return Eigen::Map<const Vec>(a.theta0.data(), static_cast<Eigen::Index>(a.theta0.size()));
    const double c = a.prior.kind == AbcPrior::Kind::Normal ? a.prior.a : 0.5 * (a.prior.a + a.prior.b);
    return Vec::Constant(a.theta_dim, c);
}

// ---------------------------------------------------------------- outputs

/// The set of files one run writes.
class OutputDir {
public:
    explicit OutputDir(std::string dir) : dir_(std::move(dir)) {}

    /// Creates the directory. A directory left by an earlier run is cleared
    /// of exactly the files its manifest lists; any other content is refused.
    void prepare() {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) throw ConfigInvalid({"experiment.output: cannot create '" + dir_ + "'"});
        const fs::path manifest = fs::path(dir_) / "manifest.json";
        if (fs::exists(manifest)) {
            std::ifstream in(manifest);
            nlohmann::json j;
            try {
                in >> j;
                for (const auto& f : j.at("files")) {
                    const fs::path p = fs::path(dir_) / f.get<std::string>();
                    if (p.parent_path() == fs::path(dir_)) fs::remove(p, ec);
                }
            } catch (const nlohmann::json::exception&) {
                throw ConfigInvalid({"experiment.output: unreadable manifest in '" + dir_ + "'"});
            }
        }
        if (!fs::is_empty(dir_))
            throw ConfigInvalid({"experiment.output: '" + dir_ + "' contains files not written by a previous run"});
    }

    std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }

    void table(const std::string& name, const Table& t) {
        t.write(path(name));
        files_.push_back(name);
    }
    void text(const std::string& name, const std::string& body) {
        Table::write_text_file(path(name), body);
        files_.push_back(name);
    }

    const std::string& dir() const noexcept { return dir_; }
    std::vector<std::string> files() const {
        auto f = files_;
        std::sort(f.begin(), f.end());
        return f;
    }

private:
    std::string dir_;
    std::vector<std::string> files_;
};

inline nlohmann::ordered_json vec_json(const Vec& v) {
    auto a = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------- runners

template <class M>
void run_training(const ExperimentSettings& s, const M& model, const Dataset& data, RngStream& rng, OutputDir& out,
                  nlohmann::ordered_json& metrics) {
    const TrainTrace trace = train(model, data, s.train, initial_theta(s.model, model, data), rng);
    out.table("lsnr_trace.csv", lsnr_curve_table(trace));
    out.table(s.kind == "lsnr-monitor" ? "cdf_trace.csv" : "sgd_trace.csv", train_table(trace));

    std::optional<double> first, last;
    for (const auto& r : trace.records)
        if (r.report) {
            if (!first) first = r.report->lsnr;
            last = r.report->lsnr;
        }
    metrics["rows"] = data.size();
    metrics["iterations"] = trace.records.size();
    metrics["stop_reason"] = to_string(trace.reason);
    metrics["final_batch_size"] = trace.records.back().batch_size;
    metrics["final_objective"] = mean_objective(model, data, trace.theta);
    metrics["theta"] = vec_json(trace.theta);
    metrics["initial_lsnr"] = first ? *first : 0.0;
    metrics["final_lsnr"] = last ? *last : 0.0;
    metrics["first_fire"] = trace.first_fire ? nlohmann::ordered_json(*trace.first_fire) : nlohmann::ordered_json();
    metrics["first_below_one"] =
        trace.first_below_one ? nlohmann::ordered_json(*trace.first_below_one) : nlohmann::ordered_json();

    if (s.kind == "lsnr-monitor" && s.bootstrap > 0) {
        const std::vector<double> boot = bootstrap_lsnr(model, data, trace.theta, s.bootstrap, rng, s.train.lsnr);
        std::vector<std::size_t> all(data.size());
        std::iota(all.begin(), all.end(), 0);
        const LsnrReport fit = lsnr(gradient_moments(model, data, all, trace.theta), s.train.delta, s.train.lsnr);
        Table bt({"replicate", "value"});
        for (std::size_t b = 0; b < boot.size(); ++b) bt.add_row({Cell(b), Cell(boot[b])});
        out.table("bootstrap_lsnr.csv", bt);
        const Histogram h = histogram(boot, s.bins);
        out.table("bootstrap_histogram.csv", histogram_table(h));
        out.table("bootstrap_density.csv", fitted_density_table(fit.distribution(), h, s.density_points));
        metrics["bootstrap_replicates"] = boot.size();
        metrics["bootstrap_fit_lsnr"] = fit.lsnr;
        metrics["bootstrap_fit_lambda"] = fit.lambda_hat;
        metrics["bootstrap_ks_distance"] =
            ks_distance(boot, [&](double v) { return scaled_chi2_cdf(v, fit.distribution()); });
    }
}

inline void chain_metrics(const ChainTrace& t, nlohmann::ordered_json& metrics) {
    metrics["steps"] = t.size();
    metrics["burn_in"] = t.burn_in;
    metrics["posterior_mean"] = vec_json(t.mean());
    metrics["posterior_variance"] = vec_json(t.variance());
    if (t.steps.front().accepted) metrics["acceptance_rate"] = t.acceptance_rate();
}

template <class M>
void reference_posterior(const M& model, const Dataset& data, nlohmann::ordered_json& metrics) {
    if constexpr (std::is_same_v<M, GaussianMeanModel>) {
        const ConjugatePosterior p = conjugate_posterior(model, data);
        metrics["reference_mean"] = vec_json(p.mean);
        metrics["reference_variance"] = p.variance;
    }
}

template <class M>
void run_sgld_experiment(const ExperimentSettings& s, const M& model, const Dataset& data, RngStream& rng,
                         OutputDir& out, nlohmann::ordered_json& metrics) {
    const SgldRun run = run_sgld(model, data, s.sgld, initial_theta(s.model, model, data), rng);
    out.table("chain.csv", chain_table(run.trace));
    chain_metrics(run.trace, metrics);
    metrics["stepsize_floor"] = run.floor_used;
    reference_posterior(model, data, metrics);
}

template <class M>
void run_mh_experiment(const ExperimentSettings& s, const M& model, const Dataset& data, RngStream& rng,
                       OutputDir& out, nlohmann::ordered_json& metrics) {
    const GaussianRandomWalk q(s.mh_proposal_scale);
    const Vec theta0 = initial_theta(s.model, model, data);
    std::vector<bool> exact;
    RngStream exact_rng = rng;
    const ChainTrace approx = approx_mh_chain(model, data, q, s.mh, theta0, rng, &exact);
    const ChainTrace ref = exact_mh_chain(model, data, q, s.mh, theta0, exact_rng);
    out.table("chain.csv", mh_chain_table(approx));
    out.table("exact_chain.csv", mh_chain_table(ref));
    std::size_t agree = 0, touched = 0;
    for (std::size_t t = 0; t < approx.size(); ++t) {
        agree += *approx.steps[t].accepted == exact[t] ? 1 : 0;
        touched += approx.steps[t].batch_size;
    }
    chain_metrics(approx, metrics);
    metrics["decision_agreement"] = static_cast<double>(agree) / static_cast<double>(approx.size());
    metrics["mean_data_fraction"] =
        static_cast<double>(touched) / (static_cast<double>(approx.size()) * static_cast<double>(data.size()));
    metrics["exact_posterior_mean"] = vec_json(ref.mean());
    metrics["exact_acceptance_rate"] = ref.acceptance_rate();
    reference_posterior(model, data, metrics);
}

template <class M>
void run_dsgld_experiment(const ExperimentSettings& s, const M& model, Dataset data, RngStream& rng, OutputDir& out,
                          nlohmann::ordered_json& metrics) {
    if (s.shard_order == "sorted") {
        std::vector<std::size_t> idx(data.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return data.row(a)[0] < data.row(b)[0]; });
        data = data.subset(idx);
    }
    const auto workers = partition_workers(data.size(), s.fractions, s.speeds);
    const DsgldRun run =
        run_dsgld(data, model, workers, s.schedule, s.sgld, initial_theta(s.model, model, data), rng, s.dsgld);
    for (std::size_t c = 0; c < run.chains.size(); ++c)
        out.table("chain_" + std::to_string(c) + ".csv", chain_table(run.chains[c]));
    out.text("events.jsonl", events_jsonl(run.events));
    metrics["chains"] = run.chains.size();
    metrics["workers"] = workers.size();
    metrics["scales"] = run.scales;
    metrics["stepsize_floor"] = run.floor_used;
    metrics["pooled_mean"] = vec_json(run.pooled_mean());
    reference_posterior(model, data, metrics);
}

inline void run_abc_experiment(const ExperimentSettings& s, RngStream& rng, OutputDir& out,
                               nlohmann::ordered_json& metrics) {
    auto sim = make_simulator(s.abc);
    const Vec y = Eigen::Map<const Vec>(s.abc.observed.data(), static_cast<Eigen::Index>(s.abc.observed.size()));
    const GaussianRandomWalk q(s.abc.proposal_scale);
    const Vec theta0 = abc_theta0(s.abc);
    ChainTrace trace;
    if (s.kind == "sl-abc") {
        trace = sl_mh_chain(*sim, s.abc.prior, q, y, s.sl, theta0, rng);
        out.table("chain.csv", chain_table(trace));
    } else {
        GpsAbcRun run = gps_abc_chain(*sim, s.abc.prior, q, y, s.gps, theta0, rng);
        trace = run.trace;
        out.table("chain.csv", chain_table(trace));
        out.table("store.csv", store_table(run.store));
        RngStream pred_rng = rng.split(99);
        const PredictiveSet pred = posterior_predictive(trace, *sim, s.predictive_draws, s.predictive_thin, pred_rng);
        out.table("predictive.csv", matrix_table(pred.samples, "stat_"));
        out.table("predictive_quantiles.csv", quantile_table(pred));
        std::size_t first = 0, second = 0, forced = 0;
        for (std::size_t t = 0; t < trace.size(); ++t) {
            (t < trace.size() / 2 ? first : second) += trace.steps[t].sim_calls;
            forced += trace.steps[t].forced ? 1 : 0;
        }
        metrics["sim_calls_first_half"] = first;
        metrics["sim_calls_second_half"] = second;
        metrics["forced_decisions"] = forced;
        metrics["store_size"] = run.store.size();
    }
    chain_metrics(trace, metrics);
    metrics["init_sim_calls"] = trace.init_sim_calls;
    metrics["total_sim_calls"] = trace.total_sim_calls();
}

struct RunResult {
    std::string output_dir;
    std::vector<std::string> files;
};

inline RunResult run_experiment(Config cfg, const std::optional<std::string>& out_override = {},
                                const std::optional<std::uint64_t>& seed_override = {}) {
    const auto started = std::chrono::system_clock::now();
    if (seed_override) cfg.set("experiment", "seed", std::to_string(*seed_override));
    const ExperimentSettings s = read_settings(cfg, out_override);
    OutputDir out(s.output);
    out.prepare();

    nlohmann::ordered_json metrics;
    metrics["kind"] = s.kind;
    metrics["seed"] = s.seed;
    try {
        RngStream rng(s.seed, kRunStream);
        if (kind_uses_data(s.kind)) {
            const Dataset data = load_dataset(s);
            std::visit(
                [&](const auto& model) {
                    if (s.kind == "lsnr-monitor" || s.kind == "adaptive-sgd") run_training(s, model, data, rng, out, metrics);
                    else if (s.kind == "sgld") run_sgld_experiment(s, model, data, rng, out, metrics);
                    else if (s.kind == "austerity-mh") run_mh_experiment(s, model, data, rng, out, metrics);
                    else run_dsgld_experiment(s, model, data, rng, out, metrics);
                },
                make_model(s.model));
        } else {
            run_abc_experiment(s, rng, out, metrics);
        }
    } catch (const ConfigInvalid&) {
        throw;
    } catch (const Error& e) {
        throw ExperimentError(s.kind, e);
    }
    out.text("metrics.json", metrics.dump(2) + "\n");

    std::vector<std::string> files = out.files();
    files.push_back("manifest.json");
    std::sort(files.begin(), files.end());
    nlohmann::ordered_json manifest;
    manifest["config_hash"] = cfg.hash();
    manifest["code_version"] = kVersion;
    manifest["kind"] = s.kind;
    manifest["seed"] = s.seed;
    manifest["started_at"] = utc_timestamp(started);
    manifest["finished_at"] = utc_timestamp(std::chrono::system_clock::now());
    manifest["files"] = files;
    Table::write_text_file(out.path("manifest.json"), manifest.dump(2) + "\n");
    return {s.output, files};
}

}  // namespace stli

#endif  // STLI_CLI_EXPERIMENTS_HPP
