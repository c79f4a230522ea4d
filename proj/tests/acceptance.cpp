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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "stli/cli/experiments.hpp"

namespace {

using namespace stli;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Config sample(const std::string& file) { return Config::parse_file(std::string(STLI_CONFIG_DIR) + "/" + file); }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "stli_acceptance" / name;
    fs::remove_all(p);
    return p;
}

nlohmann::json run_for_metrics(const Config& cfg, const fs::path& out) {
    run_experiment(cfg, out.string());
    std::ifstream in(out / "metrics.json");
    return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Spread of a chain mean from 50 batch means.
double batch_means_se(const Mat& samples) {
    const Eigen::Index batches = 50, len = samples.rows() / batches;
    Vec means(batches);
    for (Eigen::Index b = 0; b < batches; ++b) means[b] = samples.col(0).segment(b * len, len).mean();
    const double m = means.mean();
    return std::sqrt((means.array() - m).square().sum() / static_cast<double>(batches - 1) / static_cast<double>(batches));
}

// ---------------------------------------------------------------------------

Outcome full_batch_monitoring() {
    Config cfg = sample("lsnr_monitor.ini");
    cfg.set("lsnr-monitor", "bootstrap", "0");
    const auto t0 = Clock::now();
    const auto m = run_for_metrics(cfg, scratch("c1"));
    const double secs = seconds_since(t0);
    const double first = m["initial_lsnr"], last = m["final_lsnr"];
    const bool fired = !m["first_fire"].is_null() && !m["first_below_one"].is_null();
    const double orders = std::log10(first / last);
    Outcome o;
    o.pass = first > 100.0 && orders >= 3.0 && fired && m["first_fire"].get<long>() >= m["first_below_one"].get<long>() &&
             secs < 60.0;
    o.detail = "initial LSNR " + fmt("%.1f", first) + ", decrease " + fmt("%.2f", orders) + " decades, fires at " +
               (fired ? std::to_string(m["first_fire"].get<long>()) + " vs below-one at " +
                            std::to_string(m["first_below_one"].get<long>())
                      : std::string("never")) +
               ", " + fmt("%.1f s", secs);
    return o;
}

Outcome bootstrap_fit() {
    const auto t0 = Clock::now();
    const auto m = run_for_metrics(sample("lsnr_monitor.ini"), scratch("c2"));
    const double secs = seconds_since(t0);
    const double ks = m["bootstrap_ks_distance"];
    Outcome o;
    o.pass = m["bootstrap_replicates"].get<int>() == 1000 && ks <= 0.15 && secs < 300.0;
    o.detail = "KS distance " + fmt("%.4f", ks) + " over 1000 replicates, " + fmt("%.1f s", secs);
    return o;
}

Outcome affine_invariance() {
    RngStream rng(3, 0);
    const Eigen::Index p = 4, n = 200;
    Mat g(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) g(i, j) = 0.3 * static_cast<double>(j + 1) + rng.normal();
    LsnrOptions opt;
    opt.ridge_tau = 0.0;
    const double base = lsnr(moments_from_gradients(g), 0.5, opt).lsnr;
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        Mat a(p, p);
        do {
            for (Eigen::Index i = 0; i < p; ++i)
                for (Eigen::Index j = 0; j < p; ++j) a(i, j) = rng.normal();
        } while (std::abs(a.determinant()) < 0.1);
        const double moved = lsnr(moments_from_gradients(g * a.transpose()), 0.5, opt).lsnr;
        worst = std::max(worst, std::abs(moved - base) / base);
    }
    return {worst < 1e-8, "max relative change " + fmt("%.2e", worst) + " over 20 transforms"};
}

Outcome sampling_law() {
    const std::size_t n = 1000, reps = 200;
    const double lambda = 100.0;
    const double dkw = std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(reps)));
    bool pass = true;
    std::string detail;
    RngStream rng(4, 0);
    for (Eigen::Index p : {1, 3}) {
        // Covariance L L^T with a mean scaled so n mu^T Sigma^-1 mu = lambda.
        Mat l = Mat::Identity(p, p);
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = 0; j < i; ++j) l(i, j) = 0.5 * rng.normal();
        Vec dir(p);
        for (Eigen::Index i = 0; i < p; ++i) dir[i] = 1.0 + rng.uniform();
        const Mat sigma = l * l.transpose();
        const double q = dir.dot(sigma.ldlt().solve(dir));
        const Vec mu = dir * std::sqrt(lambda / (static_cast<double>(n) * q));
        const double expected_mean = lambda / static_cast<double>(p) + 1.0;
        std::vector<double> values;
        for (std::size_t r = 0; r < reps; ++r) {
            Mat g(static_cast<Eigen::Index>(n), p);
            for (Eigen::Index i = 0; i < g.rows(); ++i) g.row(i) = gaussian_draw(rng, mu, l).transpose();
            values.push_back(lsnr(moments_from_gradients(g)).lsnr);
        }
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(reps);
        const NoncentralChi2 law(static_cast<int>(p), lambda);
        const double ks = ks_distance(values, [&](double v) { return scaled_chi2_cdf(v, law); });
        const double rel = std::abs(mean - expected_mean) / expected_mean;
        pass = pass && rel < 0.05 && ks < dkw;
        detail += (detail.empty() ? "" : "; ") + std::string("p=") + std::to_string(p) + " mean rel err " +
                  fmt("%.3f", rel) + ", sup CDF gap " + fmt("%.3f", ks) + " (band " + fmt("%.3f", dkw) + ")";
    }
    return {pass, detail};
}

Outcome sgld_conjugate() {
    const Config cfg = sample("sgld.ini");
    const ExperimentSettings s = read_settings(cfg);
    const Dataset data = load_dataset(s);
    const GaussianMeanModel model(s.model.sigma2, s.model.prior);
    const auto t0 = Clock::now();
    RngStream rng(s.seed, kRunStream);
    const SgldRun run = run_sgld(model, data, s.sgld, initial_theta(s.model, model, data), rng);
    const double secs = seconds_since(t0);
    const ConjugatePosterior post = conjugate_posterior(model, data);
    const Mat x = run.trace.samples();
    const double se = batch_means_se(x);
    const double err = std::abs(run.trace.mean()[0] - post.mean[0]);
    const double var_rel = std::abs(run.trace.variance()[0] - post.variance) / post.variance;
    Outcome o;
    o.pass = x.rows() >= 49000 && err < 3.0 * se && var_rel < 0.15 && secs < 30.0;
    o.detail = "mean error " + fmt("%.2f", err / se) + " MC s.e., variance rel err " + fmt("%.3f", var_rel) + ", " +
               std::to_string(x.rows()) + " samples at eps " + fmt("%g", run.floor_used) + ", " + fmt("%.1f s", secs);
    return o;
}

Outcome austerity() {
    const auto m = run_for_metrics(sample("austerity_mh.ini"), scratch("c6"));
    const double disagreement = 1.0 - m["decision_agreement"].get<double>();

    // Same chain with the first stage forced to the whole dataset.
    const ExperimentSettings s = read_settings(sample("austerity_mh.ini"));
    const Dataset data = load_dataset(s);
    const GaussianMeanModel model(s.model.sigma2, s.model.prior);
    MhChainConfig full = s.mh;
    full.test.initial_batch = data.size();
    const GaussianRandomWalk q(s.mh_proposal_scale);
    const Vec theta0 = initial_theta(s.model, model, data);
    RngStream a(s.seed, kRunStream), b(s.seed, kRunStream);
    std::vector<bool> exact;
    const ChainTrace approx = approx_mh_chain(model, data, q, full, theta0, a, &exact);
    const ChainTrace ref = exact_mh_chain(model, data, q, full, theta0, b);
    bool identical = approx.size() == ref.size();
    std::size_t agree = 0;
    for (std::size_t t = 0; identical && t < approx.size(); ++t) {
        identical = approx.steps[t].theta == ref.steps[t].theta && approx.steps[t].accepted == ref.steps[t].accepted;
        agree += *approx.steps[t].accepted == exact[t] ? 1 : 0;
    }
    Outcome o;
    o.pass = m["steps"].get<int>() == 500 && disagreement <= 0.07 && identical && agree == approx.size();
    o.detail = "disagreement " + fmt("%.3f", disagreement) + " over 500 events (limit 0.070); forced full batch: " +
               std::to_string(agree) + "/" + std::to_string(approx.size()) + " agree, traces " +
               (identical ? "identical" : "differ");
    return o;
}

Outcome fpc_exactness() {
    const double s = 1.7;
    bool pass = true;
    for (std::size_t big : {std::size_t{10}, std::size_t{1000}, std::size_t{1} << 40})
        pass = pass && std::bit_cast<std::uint64_t>(std_of_mean(s, big, big)) == 0;  // +0.0 exactly
    double worst = 0.0;
    const std::size_t population = std::size_t{1} << 50;
    for (std::size_t n = 1; n <= 1024; n *= 2) {
        const double scaled = std_of_mean(s, n, population) * std::sqrt(static_cast<double>(n)) / s;
        worst = std::max(worst, std::abs(scaled - 1.0));
    }
    pass = pass && worst < 1e-12;
    return {pass, "zero at n = N; max deviation of sqrt(n) scaling " + fmt("%.1e", worst)};
}

Outcome gps_abc() {
    const Config cfg = sample("gps_abc.ini");
    const ExperimentSettings s = read_settings(cfg);
    const auto t0 = Clock::now();
    const auto m = run_for_metrics(cfg, scratch("c8"));
    const double secs = seconds_since(t0);
    const double lik_var = s.abc.noise_sd * s.abc.noise_sd / static_cast<double>(s.abc.replicates);
    const double prior_var = s.abc.prior.b * s.abc.prior.b;
    const double post_var = 1.0 / (1.0 / prior_var + 1.0 / lik_var);
    const double post_mean = post_var * (s.abc.prior.a / prior_var + s.abc.observed[0] / lik_var);
    const double mean = m["posterior_mean"][0];
    const double sd = std::sqrt(m["posterior_variance"][0].get<double>());
    const double sd_rel = std::abs(sd - std::sqrt(post_var)) / std::sqrt(post_var);
    const std::size_t first = m["sim_calls_first_half"], second = m["sim_calls_second_half"];
    Outcome o;
    o.pass = m["steps"].get<int>() == 5000 && std::abs(mean - post_mean) < 0.1 && sd_rel < 0.25 && second < first &&
             secs < 300.0;
    o.detail = "mean " + fmt("%.3f", mean) + " vs " + fmt("%.3f", post_mean) + ", sd rel err " + fmt("%.3f", sd_rel) +
               ", simulator calls " + std::to_string(first) + " then " + std::to_string(second) + ", " +
               fmt("%.1f s", secs);
    return o;
}

Outcome dsgld_compensation() {
    int better = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        double bias[2];
        for (int on = 0; on < 2; ++on) {
            Config cfg = sample("dsgld.ini");
            cfg.set("experiment", "seed", std::to_string(seed));
            cfg.set("dsgld", "compensate", on ? "true" : "false");
            const auto m = run_for_metrics(cfg, scratch("c9_" + std::to_string(seed) + "_" + std::to_string(on)));
            bias[on] = std::abs(m["pooled_mean"][0].get<double>() - m["reference_mean"][0].get<double>());
        }
        better += bias[1] < bias[0] ? 1 : 0;
        detail += (detail.empty() ? "" : ", ") + fmt("%.4f", bias[1]) + "/" + fmt("%.4f", bias[0]);
    }
    return {better == 5, std::to_string(better) + "/5 seeds less biased with compensation (on/off: " + detail + ")"};
}

Outcome determinism() {
    const std::vector<std::string> files{"lsnr_monitor.ini", "adaptive_sgd.ini", "sgld.ini", "austerity_mh.ini",
                                         "sl_abc.ini",       "gps_abc.ini",      "dsgld.ini"};
    std::size_t compared = 0;
    std::string differing;
    for (const auto& f : files) {
        const fs::path a = scratch("c10_a_" + f), b = scratch("c10_b_" + f);
        const RunResult ra = run_experiment(sample(f), a.string());
        const RunResult rb = run_experiment(sample(f), b.string());
        if (ra.files != rb.files) differing += " " + f + "(file list)";
        for (const auto& name : ra.files) {
            if (name == "manifest.json") continue;  // carries wall-clock timestamps
            ++compared;
            if (slurp(a / name) != slurp(b / name)) differing += " " + f + "/" + name;
        }
    }
    return {differing.empty(), std::to_string(compared) + " files compared across 7 kinds" +
                                   (differing.empty() ? std::string(", all identical") : ", differ:" + differing)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"full-batch LSNR monitoring on the spam fixture", full_batch_monitoring},
        {"bootstrap LSNR vs fitted noncentral chi-square", bootstrap_fit},
        {"LSNR invariance under invertible linear maps", affine_invariance},
        {"LSNR sampling law for Gaussian gradients", sampling_law},
        {"SGLD on the conjugate Gaussian posterior", sgld_conjugate},
        {"approximate MH against the exact-MH oracle", austerity},
        {"finite-population correction at n = N", fpc_exactness},
        {"GPS-ABC on the Gaussian location model", gps_abc},
        {"distributed SGLD drift compensation", dsgld_compensation},
        {"byte-identical reruns for every experiment kind", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s criterion %zu: %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::error_code ec;
    fs::remove_all(fs::temp_directory_path() / "stli_acceptance", ec);
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
