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

// ABC-MCMC with a GP surrogate of the simulator.
//
// Every simulation goes into a SurrogateStore. An MH step draws joint
// realizations of the latent statistic means at the current and proposed
// points, turns each realization into a Gaussian synthetic likelihood with
// the GP noise level as observation variance, and counts how often the
// resulting verdict disagrees with the majority. If that fraction exceeds xi,
// more simulations are run where the surrogate is least certain.

#ifndef STLI_ABC_GPS_ABC_HPP
#define STLI_ABC_GPS_ABC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "stli/abc/gp.hpp"
#include "stli/abc/simulator.hpp"
#include "stli/chain.hpp"
#include "stli/errors.hpp"
#include "stli/mh/proposal.hpp"
#include "stli/numerics/linalg.hpp"
#include "stli/numerics/rng.hpp"

namespace stli {

/// Simulations grouped by the parameter value they were run at.
struct SimulationGroup {
    Vec theta;
    std::vector<Vec> stats;
};

/// Kernel settings from initialization runs: lengthscale = median pairwise
/// distance of the group thetas, noise = pooled within-group variance,
/// signal = variance of group means (at least the noise), prior mean = mean
/// of all statistics.
inline std::vector<GpHyper> heuristic_hyper(const std::vector<SimulationGroup>& groups) {
    if (groups.size() < 2) throw InvalidArgument("hyperparameter heuristic needs >= 2 groups");
    const Eigen::Index k = groups.front().stats.at(0).size();

    std::vector<double> dist;
    for (std::size_t i = 0; i < groups.size(); ++i)
        for (std::size_t j = i + 1; j < groups.size(); ++j) dist.push_back((groups[i].theta - groups[j].theta).norm());
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2), dist.end());
    double lengthscale = dist[dist.size() / 2];
    if (!(lengthscale > 0.0)) lengthscale = 1.0;

    std::vector<GpHyper> out(static_cast<std::size_t>(k));
    for (Eigen::Index d = 0; d < k; ++d) {
        double within = 0.0, total = 0.0;
        std::size_t count = 0, dof = 0;
        std::vector<double> means;
        for (const auto& g : groups) {
            if (g.stats.empty()) throw InvalidArgument("empty simulation group");
            double m = 0.0;
            for (const auto& s : g.stats) m += s[d];
            m /= static_cast<double>(g.stats.size());
            for (const auto& s : g.stats) within += (s[d] - m) * (s[d] - m);
            dof += g.stats.size() - 1;
            total += m * static_cast<double>(g.stats.size());
            count += g.stats.size();
            means.push_back(m);
        }
        double mbar = 0.0;
        for (double m : means) mbar += m;
        mbar /= static_cast<double>(means.size());
        double between = 0.0;
        for (double m : means) between += (m - mbar) * (m - mbar);
        between /= static_cast<double>(means.size() - 1);

        GpHyper& h = out[static_cast<std::size_t>(d)];
        h.lengthscale = lengthscale;
        h.noise_var = dof > 0 ? within / static_cast<double>(dof) : 0.0;
        if (!(h.noise_var > 0.0)) h.noise_var = 1e-6 * std::max(between, 1.0);
        h.signal_var = std::max(between, h.noise_var);
        h.prior_mean = total / static_cast<double>(count);
    }
    return out;
}

struct AbcDecision {
    /// Empty when the surrogate is too uncertain to decide.
    std::optional<bool> verdict;
    double tau = 0.0;
    bool majority = false;
    std::size_t accept_votes = 0;
};

/// Log-acceptance threshold for the likelihood difference:
/// accept iff ll(prop) - ll(cur) >= log u - [lp(prop) - lp(cur) + lq(cur|prop) - lq(prop|cur)].
inline double abc_threshold(double log_u, double log_prior_cur, double log_prior_prop, double log_q_forward,
                            double log_q_reverse) {
    return log_u - (log_prior_prop - log_prior_cur + log_q_reverse - log_q_forward);
}

inline AbcDecision uncertain_mh_decision(const SurrogateStore& store, const Vec& current, const Vec& proposed,
                                         double threshold, double xi, std::size_t mc_rounds, RngStream& rng,
                                         const Vec& y) {
    if (!(xi > 0.0 && xi < 0.5)) throw InvalidArgument("xi must be in (0, 0.5)");
    if (mc_rounds < 100) throw InvalidArgument("mc_rounds must be >= 100");
    if (store.empty()) throw EmptyTrace("surrogate store is empty");
    if (y.size() != store.stat_dim()) throw DimensionMismatch("observed statistic length");

    struct Factor {
        GpJoint j;
        double l11, l21, l22, inv2noise;
    };
    std::vector<Factor> f;
    for (Eigen::Index d = 0; d < store.stat_dim(); ++d) {
        const GaussianProcess& gp = store.gp(d);
        Factor x{gp.predict_joint(current, proposed), 0, 0, 0, 0.5 / gp.hyper().noise_var};
        x.l11 = std::sqrt(x.j.var_a);
        x.l21 = x.l11 > 0.0 ? x.j.cov / x.l11 : 0.0;
        x.l22 = std::sqrt(std::max(x.j.var_b - x.l21 * x.l21, 0.0));
        f.push_back(x);
    }

    AbcDecision out;
    for (std::size_t r = 0; r < mc_rounds; ++r) {
        double diff = 0.0;
        for (std::size_t d = 0; d < f.size(); ++d) {
            const double z1 = rng.normal(), z2 = rng.normal();
            const double fa = f[d].j.mean_a + f[d].l11 * z1;
            const double fb = f[d].j.mean_b + f[d].l21 * z1 + f[d].l22 * z2;
            const double yd = y[static_cast<Eigen::Index>(d)];
            diff += f[d].inv2noise * ((yd - fa) * (yd - fa) - (yd - fb) * (yd - fb));
        }
        if (diff >= threshold) ++out.accept_votes;
    }
    const std::size_t reject_votes = mc_rounds - out.accept_votes;
    out.majority = out.accept_votes >= reject_votes;
    out.tau = static_cast<double>(std::min(out.accept_votes, reject_votes)) / static_cast<double>(mc_rounds);
    if (out.tau <= xi) out.verdict = out.majority;
    return out;
}

/// Runs `batch` simulations at whichever of the two points has the larger
/// mean latent variance (the proposal on ties). Returns true if that was the
/// proposal.
inline bool acquire(SurrogateStore& store, const Vec& current, const Vec& proposed, Simulator& sim, std::size_t batch,
                    RngStream& rng) {
    if (batch < 1) throw InvalidArgument("acquisition batch must be >= 1");
    const bool at_proposal = store.mean_latent_var(proposed) >= store.mean_latent_var(current);
    const Vec& where = at_proposal ? proposed : current;
    for (std::size_t i = 0; i < batch; ++i) store.add(where, sim.run(where, rng));
    return at_proposal;
}

struct GpsAbcConfig {
    std::size_t steps = 1000;
    std::size_t burn_in = 0;
    std::size_t init_thetas = 10;
    std::size_t init_sims = 5;
    double xi = 0.2;
    std::size_t mc_rounds = 200;
    std::size_t acquire_batch = 1;
    /// Acquisitions per step before the majority verdict is forced.
    std::size_t max_acquisitions = 10;
    /// Overrides the initialization heuristic when set.
    std::optional<std::vector<GpHyper>> hyper;

    void validate() const {
        if (init_thetas < 2) throw InvalidArgument("gps: init_thetas must be >= 2");
        if (init_sims < 2) throw InvalidArgument("gps: init_sims must be >= 2");
        if (!(xi > 0.0 && xi < 0.5)) throw InvalidArgument("gps: xi must be in (0, 0.5)");
        if (mc_rounds < 100) throw InvalidArgument("gps: mc_rounds must be >= 100");
        if (acquire_batch < 1) throw InvalidArgument("gps: acquire_batch must be >= 1");
        if (burn_in > steps) throw InvalidArgument("gps: burn-in exceeds steps");
    }
};

struct GpsAbcRun {
    ChainTrace trace;
    SurrogateStore store;
};

/// Fills a fresh store with init_thetas prior draws x init_sims simulations.
inline SurrogateStore initialize_store(Simulator& sim, const AbcPrior& prior, const GpsAbcConfig& cfg, RngStream& rng) {
    RngStream thetas = rng.split(0), sims = rng.split(1);
    std::vector<SimulationGroup> groups;
    for (std::size_t g = 0; g < cfg.init_thetas; ++g) {
        SimulationGroup grp{prior.sample(sim.theta_dim(), thetas), {}};
        for (std::size_t s = 0; s < cfg.init_sims; ++s) grp.stats.push_back(sim.run(grp.theta, sims));
        groups.push_back(std::move(grp));
    }
    SurrogateStore store(sim.theta_dim(), cfg.hyper ? *cfg.hyper : heuristic_hyper(groups));
    for (const auto& g : groups)
        for (const auto& s : g.stats) store.add(g.theta, s);
    return store;
}

template <Proposal Q>
GpsAbcRun gps_abc_chain(Simulator& sim, const AbcPrior& prior, const Q& proposal, const Vec& y, const GpsAbcConfig& cfg,
                        Vec theta, RngStream& rng) {
    cfg.validate();
    if (theta.size() != sim.theta_dim()) throw DimensionMismatch("initial theta length");
    if (y.size() != sim.stat_dim()) throw DimensionMismatch("observed statistic length");
    if (!std::isfinite(prior.log_density(theta))) throw InvalidArgument("initial theta outside the prior support");

    RngStream init_rng = rng.split(10);
    GpsAbcRun run{{}, initialize_store(sim, prior, cfg, init_rng)};
    run.trace.init_sim_calls = cfg.init_thetas * cfg.init_sims;
    run.trace.burn_in = cfg.burn_in;
    run.trace.steps.reserve(cfg.steps);
    const RngStream mc_root = rng.split(11);
    RngStream sims = rng.split(12);

    for (std::size_t t = 0; t < cfg.steps; ++t) {
        const Vec prop = proposal.propose(theta, rng);
        const double log_u = std::log(rng.uniform_open());
        const double lp_cur = prior.log_density(theta), lp_prop = prior.log_density(prop);
        ChainStep s;
        s.iteration = t;
        bool acc = false;
        if (std::isfinite(lp_prop)) {
            const double thr = abc_threshold(log_u, lp_cur, lp_prop, proposal.log_density(prop, theta),
                                             proposal.log_density(theta, prop));
            RngStream mc = mc_root.split(t);
            std::size_t acquisitions = 0;
            for (;;) {
                const AbcDecision d = uncertain_mh_decision(run.store, theta, prop, thr, cfg.xi, cfg.mc_rounds, mc, y);
                s.error_estimate = d.tau;
                if (d.verdict) {
                    acc = *d.verdict;
                    break;
                }
                if (acquisitions == cfg.max_acquisitions) {
                    acc = d.majority;
                    s.forced = true;
                    break;
                }
                acquire(run.store, theta, prop, sim, cfg.acquire_batch, sims);
                s.sim_calls += cfg.acquire_batch;
                ++acquisitions;
            }
        }
        if (acc) theta = prop;
        s.theta = theta;
        s.accepted = acc;
        run.trace.steps.push_back(std::move(s));
    }
    return run;
}

struct PredictiveSet {
    /// One simulated statistic vector per row.
    Mat samples;
    std::vector<double> levels;
    /// quantiles(l, d): level l of statistic d.
    Mat quantiles;
};

/// Type-7 (linear interpolation) sample quantile; `sorted` ascending.
inline double sample_quantile(const std::vector<double>& sorted, double level) {
    if (sorted.empty()) throw EmptyTrace("quantile of an empty sample");
    const double h = level * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Simulates `draws` statistic vectors at every `thin`-th post-burn-in sample.
inline PredictiveSet posterior_predictive(const ChainTrace& trace, Simulator& sim, std::size_t draws, std::size_t thin,
                                          RngStream& rng) {
    if (draws < 1 || thin < 1) throw InvalidArgument("posterior_predictive needs draws >= 1 and thin >= 1");
    std::vector<const Vec*> picked;
    for (std::size_t i = trace.burn_in; i < trace.steps.size(); i += thin) picked.push_back(&trace.steps[i].theta);
    if (picked.empty()) throw EmptyTrace("no samples to simulate from");

    PredictiveSet out;
    out.samples.resize(static_cast<Eigen::Index>(picked.size() * draws), sim.stat_dim());
    Eigen::Index row = 0;
    for (const Vec* th : picked)
        for (std::size_t r = 0; r < draws; ++r) out.samples.row(row++) = sim.run(*th, rng).transpose();

    out.levels = {0.025, 0.25, 0.5, 0.75, 0.975};
    out.quantiles.resize(static_cast<Eigen::Index>(out.levels.size()), sim.stat_dim());
    for (Eigen::Index d = 0; d < sim.stat_dim(); ++d) {
        std::vector<double> col(out.samples.col(d).data(), out.samples.col(d).data() + out.samples.rows());
        std::sort(col.begin(), col.end());
        for (std::size_t l = 0; l < out.levels.size(); ++l)
            out.quantiles(static_cast<Eigen::Index>(l), d) = sample_quantile(col, out.levels[l]);
    }
    return out;
}

}  // namespace stli

#endif  // STLI_ABC_GPS_ABC_HPP
