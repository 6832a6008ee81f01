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

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "supnorm/grid.hpp"
#include "supnorm/random.hpp"
#include "supnorm/wavelet.hpp"

namespace supnorm {

// ---------------------------------------------------------------------------
// Data

/// n i.i.d. observations on [0,1].
struct Sample {
    std::vector<double> points;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return points.size(); }
};

/// Draws from a grid density: a cell by inverse CDF, then a uniform position inside it.
/// Throws DomainError if f0 is negative somewhere or has no mass.
Sample sample_data(const GridFunction& f0, int n, std::uint64_t seed);

/// Counts per dyadic bin I_k^L = (k 2^-L, (k+1) 2^-L], the first bin closed on the left.
std::vector<std::int64_t> bin_counts(std::span<const double> points, int level);
inline std::vector<std::int64_t> bin_counts(const Sample& s, int level) { return bin_counts(s.points, level); }

/// Counts per grid cell, the sufficient statistic for grid-cell likelihoods.
std::vector<std::int64_t> cell_counts(const Sample& s, const DyadicGrid& grid);

// ---------------------------------------------------------------------------
// Random dyadic histograms

/// Dirichlet prior D(alpha_0, ..., alpha_{2^L - 1}) on the bin masses at level L,
/// with c1 2^{-L a} <= alpha_k <= c2.
struct HistogramPriorSpec {
    int level = 0;
    std::vector<double> concentration;
    double a = 1.0;
    double c1 = 1.0;
    double c2 = 1.0;

    /// alpha_k = value for all k; records c1 = c2 = value, a = 0.
    static HistogramPriorSpec constant(int level, double value = 1.0);
    /// alpha_k = c1 2^{-L a} for all k (the smallest admissible choice); c2 = c1.
    static HistogramPriorSpec scaled(int level, double c1, double a);

    void validate() const;
};

struct HistogramPosterior {
    int level = 0;
    std::vector<double> concentration;  // alpha_k + N_k
    std::vector<std::int64_t> counts;

    /// E[omega_k | data].
    double mean_mass(std::size_t k) const;
    /// Posterior mean density, 2^L (alpha_k + N_k) / sum_j (alpha_j + N_j) on bin k.
    GridFunction mean_density(const DyadicGrid& grid) const;
    /// This posterior reused as the prior for a further batch of counts.
    HistogramPriorSpec as_prior() const;
};

HistogramPosterior histogram_posterior(const HistogramPriorSpec& prior, std::span<const std::int64_t> counts);

/// Dirichlet draw by normalised Gamma variates, computed in log space so tiny
/// concentrations cannot underflow to an all-zero vector.
std::vector<double> draw_dirichlet(std::span<const double> concentration, Rng& rng);

/// f(x) = 2^L sum_k omega_k 1{x in I_k^L} on the grid (requires grid resolution >= L).
GridFunction histogram_density(std::span<const double> masses, const DyadicGrid& grid);

std::vector<GridFunction> draw_histogram_posterior(const HistogramPosterior& post, int draws, std::uint64_t seed,
                                                   const DyadicGrid& grid);

// ---------------------------------------------------------------------------
// Likelihood and normalisation

/// sum_i log f(X_i) with f read by grid-cell lookup. Throws DomainError if f <= 0 at an observation.
double log_likelihood(const GridFunction& f, const Sample& s);

/// exp(T - c(T)), c(T) = log int e^T.
GridFunction normalize_logdensity(const GridFunction& log_density);

// ---------------------------------------------------------------------------
// Losses

struct LossSummary {
    double sup = 0.0;
    double l2 = 0.0;
    double hellinger = 0.0;
    double q90_sup = 0.0;  // 0.9 posterior quantile of the sup loss
    std::size_t draws = 0;
};

/// Monte Carlo posterior means of ||f - f0||_inf, ||f - f0||_2 and h(f, f0).
/// With `densities` false the Hellinger term is skipped and reported as NaN.
LossSummary posterior_expected_losses(std::span<const GridFunction> draws, const GridFunction& f0,
                                      bool densities = true);

/// Accumulates losses of posterior draws one at a time.
class LossAccumulator {
public:
    void add(double sup, double l2, double hellinger);
    LossSummary summary() const;

private:
    std::vector<double> sup_;
    double l2_sum_ = 0.0;
    double hellinger_sum_ = 0.0;
};

/// Exact grid-quadrature losses of level-L histograms against a fixed f0,
/// in O(2^L) per draw from per-bin moments of f0.
class HistogramLossEvaluator {
public:
    HistogramLossEvaluator(const GridFunction& f0, int level);

    /// (sup, L2, Hellinger) of the histogram with bin masses `masses`.
    std::array<double, 3> evaluate(std::span<const double> masses) const;

private:
    int level_;
    double bin_width_;
    std::vector<double> lo_, hi_, m1_, m2_, root_;
};

// ---------------------------------------------------------------------------
// Log-density priors and MCMC

enum class CoefficientLaw {
    Gaussian,   // phi_G, sigma_l = 2^{-l(1/2+r)}, 0 < r <= alpha - 1/4
    HeavyTail,  // phi(x) ∝ exp(-(1+|x|)^{1-tau}), 0 <= tau < 1, sigma_l = 2^{-l alpha}
    Laplace,    // phi(x) ∝ exp(-|x|), sigma_l = 2^{-l alpha}
};

/// Prior f = exp(T - c(T)) with T = sum_{l <= cutoff} sum_k sigma_l a_{lk} psi_{lk}, a_{lk} i.i.d. phi.
struct LogDensityPriorSpec {
    CoefficientLaw law = CoefficientLaw::Gaussian;
    double alpha = 1.0;
    double r = 0.5;
    double tau = 0.0;
    int cutoff = 0;

    double scale(int level) const;
    double log_phi(double u) const;
    /// Throws ConfigError naming the violated constraint.
    void validate() const;
};

struct McmcConfig {
    int iterations = 20000;
    int burn_in = 5000;
    int thin = 5;
    double target_acceptance = 0.3;
    int adapt_window = 100;

    void validate() const;
};

/// Log-target for the sampler over a coefficient tree (scaling coefficient unused).
struct CoefficientTarget {
    int max_level = 0;
    std::function<double(const CoefficientTree&)> log_likelihood;
    /// log prior density of one coordinate at `level`, up to a constant.
    std::function<double(int level, double value)> log_prior;
    /// Natural scale of coordinates at `level`; random-walk steps are multiples of it.
    std::function<double(int level)> scale;
    /// When set, the prior is N(0, scale(l)^2) and the prior-reversible
    /// (Crank-Nicolson) proposal is used instead of per-level random walks.
    bool gaussian_prior = false;
};

struct McmcChain {
    std::vector<CoefficientTree> states;        // post burn-in, thinned
    std::vector<double> acceptance_per_level;   // post burn-in
    std::vector<double> step_scales;            // frozen after burn-in; one entry (beta) for Crank-Nicolson
    int burn_in = 0;
    int thin = 1;
    bool flagged = false;
    std::string flag_reason;
};

McmcChain run_metropolis(const CoefficientTarget& target, const McmcConfig& cfg, std::uint64_t seed);

McmcChain logdensity_mcmc(const LogDensityPriorSpec& prior, const Sample& s, const WaveletBasis& basis,
                          const McmcConfig& cfg, std::uint64_t seed);

/// Density of each chain state, exp(T - c(T)) on the basis grid.
std::vector<GridFunction> chain_densities(const McmcChain& chain, const WaveletBasis& basis);

}  // namespace supnorm
