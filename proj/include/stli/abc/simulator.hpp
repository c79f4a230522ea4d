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

#ifndef STLI_ABC_SIMULATOR_HPP
#define STLI_ABC_SIMULATOR_HPP

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "stli/errors.hpp"
#include "stli/numerics/linalg.hpp"
#include "stli/numerics/rng.hpp"

namespace stli {

/// Stochastic forward model: theta -> summary-statistic vector of fixed length.
class Simulator {
public:
    virtual ~Simulator() = default;
    virtual Eigen::Index theta_dim() const = 0;
    virtual Eigen::Index stat_dim() const = 0;
    virtual Vec simulate(const Vec& theta, RngStream& rng) = 0;

    /// Counts every simulate() call routed through run().
    Vec run(const Vec& theta, RngStream& rng) {
        ++calls_;
        Vec s = simulate(theta, rng);
        if (s.size() != stat_dim()) throw SimulatorFailure("statistic length changed");
        if (!s.allFinite()) throw SimulatorFailure("non-finite statistic");
        return s;
    }
    std::size_t calls() const noexcept { return calls_; }

private:
    std::size_t calls_ = 0;
};

/// Statistic = mean of `replicates` draws of N(theta, noise_sd^2), per coordinate.
class GaussianLocationSimulator final : public Simulator {
public:
    explicit GaussianLocationSimulator(Eigen::Index dim = 1, double noise_sd = 1.0, int replicates = 1)
        : dim_(dim), sd_(noise_sd), reps_(replicates) {
        if (dim < 1 || !(noise_sd > 0.0) || replicates < 1) throw InvalidArgument("bad gaussian-location simulator");
    }
    Eigen::Index theta_dim() const override { return dim_; }
    Eigen::Index stat_dim() const override { return dim_; }
    Vec simulate(const Vec& theta, RngStream& rng) override {
        if (theta.size() != dim_) throw DimensionMismatch("simulator theta length");
        Vec s = Vec::Zero(dim_);
        for (int r = 0; r < reps_; ++r)
            for (Eigen::Index i = 0; i < dim_; ++i) s[i] += theta[i] + sd_ * rng.normal();
        return s / reps_;
    }
    /// Variance of one statistic draw.
    double stat_variance() const { return sd_ * sd_ / reps_; }

private:
    Eigen::Index dim_;
    double sd_;
    int reps_;
};

/// Statistic = mean of `replicates` draws of Exponential(rate theta), theta > 0.
class ExponentialRateSimulator final : public Simulator {
public:
    explicit ExponentialRateSimulator(int replicates = 10) : reps_(replicates) {
        if (replicates < 1) throw InvalidArgument("bad exponential-rate simulator");
    }
    Eigen::Index theta_dim() const override { return 1; }
    Eigen::Index stat_dim() const override { return 1; }
    Vec simulate(const Vec& theta, RngStream& rng) override {
        if (theta.size() != 1 || !(theta[0] > 0.0)) throw SimulatorFailure("exponential rate must be > 0");
        double s = 0.0;
        for (int r = 0; r < reps_; ++r) s += -std::log(rng.uniform_open()) / theta[0];
        return Vec::Constant(1, s / reps_);
    }

private:
    int reps_;
};

/// Runs an external program per simulation.
///
/// Protocol: the command is run through /bin/sh with STLI_SIM_SEED set to a
/// seed drawn from the caller's stream. It receives one line on stdin (the
/// theta vector, space-separated), must print one statistic vector per line
/// (space-separated) and exit with status 0. Extra lines are buffered and
/// served to later calls at the same theta.
class ExternalProcessSimulator final : public Simulator {
public:
    ExternalProcessSimulator(std::string command, Eigen::Index theta_dim, Eigen::Index stat_dim)
        : cmd_(std::move(command)), tdim_(theta_dim), sdim_(stat_dim) {
        if (cmd_.empty() || theta_dim < 1 || stat_dim < 1) throw InvalidArgument("bad external simulator");
        // A child that exits without reading stdin must not kill us on write.
        ::signal(SIGPIPE, SIG_IGN);
    }
    Eigen::Index theta_dim() const override { return tdim_; }
    Eigen::Index stat_dim() const override { return sdim_; }

    Vec simulate(const Vec& theta, RngStream& rng) override {
        if (theta.size() != tdim_) throw DimensionMismatch("simulator theta length");
        if (pending_.empty() || pending_theta_.size() != theta.size() || pending_theta_ != theta) {
            pending_ = invoke(theta, rng.next_u64());
            pending_theta_ = theta;
        }
        Vec out = pending_.front();
        pending_.erase(pending_.begin());
        return out;
    }

private:
    std::vector<Vec> invoke(const Vec& theta, std::uint64_t seed) const {
        int in_pipe[2], out_pipe[2];
        if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) throw SimulatorFailure("pipe() failed");
        const pid_t pid = ::fork();
        if (pid < 0) throw SimulatorFailure("fork() failed");
        if (pid == 0) {
            ::dup2(in_pipe[0], STDIN_FILENO);
            ::dup2(out_pipe[1], STDOUT_FILENO);
            ::close(in_pipe[0]);
            ::close(in_pipe[1]);
            ::close(out_pipe[0]);
            ::close(out_pipe[1]);
            const std::string s = std::to_string(seed);
            ::setenv("STLI_SIM_SEED", s.c_str(), 1);
            ::execl("/bin/sh", "sh", "-c", cmd_.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::close(in_pipe[0]);
        ::close(out_pipe[1]);

        std::string line;
        char buf[64];
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.17g", i ? " " : "", theta[i]);
            line += buf;
        }
        line += '\n';
        [[maybe_unused]] const auto wrote = ::write(in_pipe[1], line.data(), line.size());
        ::close(in_pipe[1]);

        std::string output;
        char chunk[4096];
        ssize_t got;
        while ((got = ::read(out_pipe[0], chunk, sizeof chunk)) > 0) output.append(chunk, static_cast<std::size_t>(got));
        ::close(out_pipe[0]);
        int status = 0;
        while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
        }
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
            throw SimulatorFailure("'" + cmd_ + "' exited with status " + std::to_string(WEXITSTATUS(status)));

        std::vector<Vec> rows;
        std::istringstream lines(output);
        while (std::getline(lines, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::istringstream fields(line);
            std::vector<double> v;
            double x;
            while (fields >> x) v.push_back(x);
            if (!fields.eof() || static_cast<Eigen::Index>(v.size()) != sdim_)
                throw SimulatorFailure("bad output line '" + line + "'");
            rows.push_back(Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
        }
        if (rows.empty()) throw SimulatorFailure("'" + cmd_ + "' printed no statistics");
        return rows;
    }

    std::string cmd_;
    Eigen::Index tdim_, sdim_;
    std::vector<Vec> pending_;
    Vec pending_theta_;
};

/// Prior over simulator parameters, identical and independent per coordinate.
struct AbcPrior {
    enum class Kind { Normal, Uniform };
    Kind kind = Kind::Normal;
    /// Normal: mean and sd. Uniform: lower and upper bound.
    double a = 0.0;
    double b = 1.0;

    static AbcPrior normal(double mean, double sd) {
        if (!(sd > 0.0)) throw InvalidArgument("normal prior sd must be > 0");
        return {Kind::Normal, mean, sd};
    }
    static AbcPrior uniform(double lo, double hi) {
        if (!(hi > lo)) throw InvalidArgument("uniform prior needs lo < hi");
        return {Kind::Uniform, lo, hi};
    }

    double log_density(const Vec& theta) const {
        double s = 0.0;
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            if (kind == Kind::Normal) {
                s += normal_log_pdf_scalar(theta[i]);
            } else {
                if (theta[i] < a || theta[i] > b) return -std::numeric_limits<double>::infinity();
                s -= std::log(b - a);
            }
        }
        return s;
    }

    Vec sample(Eigen::Index dim, RngStream& rng) const {
        Vec out(dim);
        for (Eigen::Index i = 0; i < dim; ++i) out[i] = kind == Kind::Normal ? a + b * rng.normal() : a + (b - a) * rng.uniform();
        return out;
    }

private:
    double normal_log_pdf_scalar(double x) const {
        const double z = (x - a) / b;
        return -0.5 * z * z - std::log(b) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
};

}  // namespace stli

#endif  // STLI_ABC_SIMULATOR_HPP
