// Copyright 2026 The supnorm Authors
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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "supnorm/function_space.hpp"
#include "supnorm/model_density.hpp"
#include "supnorm/model_wn.hpp"
#include "supnorm/wavelet.hpp"

namespace supnorm {

/// alpha / (2 alpha + 1), the exponent of the minimax sup-norm rate.
double target_exponent(double alpha);

struct Cutoff {
    double bandwidth;  // h_n = (n / log n)^{-1/(2 alpha + 1)}
    int level;         // L_n = floor(log2(1 / h_n))
};

/// Natural logarithm in log n; requires n >= 3.
Cutoff cutoff(double n, double alpha);

enum class ModelKind { WhiteNoise, DensityHistogram, DensityLogDensity };

std::string to_string(ModelKind m);
std::optional<ModelKind> parse_model_kind(const std::string& s);

struct UniformPrior {
    double bound = 2.0;
};
struct ExponentialPowerPrior {
    double delta = 1.0;
};
/// alpha_k = value, or value * 2^{-L exponent} when `exponent` is set.
struct DirichletPrior {
    double value = 1.0;
    std::optional<double> exponent;
};
struct LogDensityPrior {
    CoefficientLaw law = CoefficientLaw::Gaussian;
    double r = 0.5;
    double tau = 0.0;
};

using PriorSpec = std::variant<UniformPrior, ExponentialPowerPrior, DirichletPrior, LogDensityPrior>;

/// "uniform", "exponential-power", "dirichlet", "gaussian", "heavy-tail" or "laplace".
std::string prior_name(const PriorSpec& p);

struct ExperimentConfig {
    ModelKind model = ModelKind::DensityHistogram;
    PriorSpec prior = DirichletPrior{};
    double alpha = 1.0;
    double radius = 1.0;
    std::vector<int> n_grid;
    int replications = 5;
    int draws = 200;
    int resolution = 12;
    WaveletKind basis = WaveletKind::BoundarySmooth;
    int basis_order = 4;
    /// Deepest level carried by the truth; -1 means resolution - 4.
    int truth_depth = -1;
    TruthKind truth = TruthKind::SignedCoefficient;
    McmcConfig mcmc;
    std::uint64_t seed = 1;

    int effective_truth_depth() const noexcept { return truth_depth >= 0 ? truth_depth : resolution - 4; }

    /// Structural checks; throws ConfigError naming the rule.
    void validate() const;
    /// Problems that make the loss curve unsuitable for a slope fit
    /// (fewer than 3 n values, span below 16, fewer than 5 replications).
    std::vector<std::string> fit_warnings() const;
};

struct LossRecord {
    std::string model;
    std::string prior;
    double alpha = 0.0;
    long n = 0;
    int rep = 0;
    double sup_loss = 0.0;
    double l2_loss = 0.0;
    double hellinger_loss = 0.0;  // NaN for white noise
    double q90_sup = 0.0;
    double trunc_bias = 0.0;  // NaN for density models
    std::uint64_t seed = 0;
    bool flagged = false;

    friend bool operator==(const LossRecord&, const LossRecord&) = default;
};

/// Deterministic bound B sum_{l > level} 2^{l/2} sigma_l on the sup norm of the
/// truncated prior tail (B = 1 for exponential-power).
double truncation_bias_bound(const ProductPriorSpec& prior, int level);

/// Runs every (n, replication) cell. Results are ordered by (n, rep) and do
/// not depend on `threads`.
std::vector<LossRecord> run_experiment(const ExperimentConfig& cfg, int threads = 1);

/// One (n, replication) cell; exposed for tests.
LossRecord run_cell(const ExperimentConfig& cfg, const WaveletBasis& basis, std::size_t n_index, int rep);

enum class Regressor { LogNOverLogN, LogN };
enum class LossColumn { Sup, L2, Hellinger, Q90Sup };

std::string to_string(Regressor r);
std::optional<Regressor> parse_regressor(const std::string& s);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double r_squared = 0.0;
    double target = 0.0;  // -alpha / (2 alpha + 1), comparable with slope
    Regressor regressor = Regressor::LogNOverLogN;
    int n_points = 0;
    int excluded_rows = 0;
};

/// OLS of log(mean loss at n) on the regressor; flagged and non-finite rows
/// are excluded. Throws DomainError with fewer than 3 distinct n.
RateFit fit_rate(const std::vector<LossRecord>& records, Regressor regressor = Regressor::LogNOverLogN,
                 LossColumn column = LossColumn::Sup);

struct LevelSummary {
    long n = 0;
    int rows = 0;
    int flagged = 0;
    double mean_sup = 0.0, median_sup = 0.0;
    double mean_l2 = 0.0, median_l2 = 0.0;
    double mean_hellinger = 0.0, median_hellinger = 0.0;
    double mean_q90 = 0.0;
    double trunc_bias = 0.0;
};

/// Per-n statistics over unflagged rows, in increasing n.
std::vector<LevelSummary> summarize_by_n(const std::vector<LossRecord>& records);

// CSV: model,prior,alpha,n,rep,sup_loss,l2_loss,hellinger_loss,q90_sup,trunc_bias,seed,flag

class CsvError : public std::runtime_error {
public:
    explicit CsvError(const std::string& what) : std::runtime_error(what) {}
};

extern const char* const kRecordCsvHeader;

void write_records_csv(std::ostream& os, const std::vector<LossRecord>& records);
std::vector<LossRecord> read_records_csv(std::istream& is);

}  // namespace supnorm
