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

#include "supnorm/model_density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <bit>
#include <numeric>
#include <string>

#include "supnorm/errors.hpp"
#include "supnorm/function_space.hpp"

namespace supnorm {

// ---------------------------------------------------------------------------
// Data

Sample sample_data(const GridFunction& f0, int n, std::uint64_t seed) {
    if (n < 0) throw DomainError("sample_data: n must be nonnegative");
    std::vector<double> cdf(f0.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < f0.size(); ++i) {
        if (f0[i] < -1e-12) throw DomainError("sample_data: f0 is not a density (negative value)");
        acc += std::max(f0[i], 0.0);
        cdf[i] = acc;
    }
    if (!(acc > 0.0)) throw DomainError("sample_data: f0 is not a density (no mass)");
    for (double& c : cdf) c /= acc;
    cdf.back() = 1.0;

    Sample s;
    s.seed = seed;
    s.points.reserve(static_cast<std::size_t>(n));
    Rng rng(derive_seed(seed, Stream::Data));
    const double width = f0.grid().cell_width();
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        const auto cell = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        const std::size_t c = std::min(cell, cdf.size() - 1);
        s.points.push_back((static_cast<double>(c) + rng.uniform()) * width);
    }
    return s;
}

std::vector<std::int64_t> bin_counts(std::span<const double> points, int level) {
    if (level < 0 || level > 30) throw DomainError("bin_counts: level must lie in [0, 30]");
    const std::size_t bins = std::size_t{1} << level;
    const double scale = static_cast<double>(bins);
    std::vector<std::int64_t> counts(bins, 0);
    for (double x : points) {
        const double c = std::ceil(x * scale) - 1.0;
        const auto k = static_cast<std::size_t>(std::clamp(c, 0.0, scale - 1.0));
        ++counts[k];
    }
    return counts;
}

std::vector<std::int64_t> cell_counts(const Sample& s, const DyadicGrid& grid) {
    std::vector<std::int64_t> counts(grid.size(), 0);
    for (double x : s.points) ++counts[grid.cell_of(x)];
    return counts;
}

// ---------------------------------------------------------------------------
// Histograms

HistogramPriorSpec HistogramPriorSpec::constant(int level, double value) {
    HistogramPriorSpec p;
    p.level = level;
    p.concentration.assign(std::size_t{1} << level, value);
    p.a = 0.0;
    p.c1 = value;
    p.c2 = value;
    return p;
}

HistogramPriorSpec HistogramPriorSpec::scaled(int level, double c1, double a) {
    HistogramPriorSpec p;
    p.level = level;
    p.a = a;
    p.c1 = c1;
    p.c2 = c1;
    p.concentration.assign(std::size_t{1} << level, c1 * std::exp2(-level * a));
    return p;
}

void HistogramPriorSpec::validate() const {
    if (level < 0 || level > 24) throw ConfigError("histogram prior: level must lie in [0, 24]");
    if (concentration.size() != (std::size_t{1} << level)) {
        throw ConfigError("histogram prior: need 2^L Dirichlet parameters");
    }
    if (!(a >= 0.0) || !(c1 > 0.0) || !(c2 >= c1)) {
        throw ConfigError("histogram prior: need a >= 0 and 0 < c1 <= c2");
    }
    const double lower = c1 * std::exp2(-level * a);
    for (double ak : concentration) {
        if (!(ak > 0.0)) throw ConfigError("histogram prior: Dirichlet parameters must be positive");
        if (ak < lower * (1.0 - 1e-12) || ak > c2 * (1.0 + 1e-12)) {
            throw ConfigError("histogram prior: Dirichlet parameters must satisfy c1 2^{-La} <= alpha_k <= c2");
        }
    }
}

double HistogramPosterior::mean_mass(std::size_t k) const {
    const double total = std::accumulate(concentration.begin(), concentration.end(), 0.0);
    return concentration.at(k) / total;
}

GridFunction HistogramPosterior::mean_density(const DyadicGrid& grid) const {
    const double total = std::accumulate(concentration.begin(), concentration.end(), 0.0);
    std::vector<double> masses(concentration.size());
    for (std::size_t k = 0; k < masses.size(); ++k) masses[k] = concentration[k] / total;
    return histogram_density(masses, grid);
}

HistogramPriorSpec HistogramPosterior::as_prior() const {
    HistogramPriorSpec p;
    p.level = level;
    p.concentration = concentration;
    p.c1 = *std::min_element(concentration.begin(), concentration.end());
    p.c2 = *std::max_element(concentration.begin(), concentration.end());
    p.a = 0.0;
    return p;
}

HistogramPosterior histogram_posterior(const HistogramPriorSpec& prior, std::span<const std::int64_t> counts) {
    if (counts.size() != prior.concentration.size()) {
        throw std::invalid_argument("histogram_posterior: expected " + std::to_string(prior.concentration.size()) +
                                    " bin counts, got " + std::to_string(counts.size()));
    }
    HistogramPosterior post;
    post.level = prior.level;
    post.counts.assign(counts.begin(), counts.end());
    post.concentration.resize(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] < 0) throw std::invalid_argument("histogram_posterior: negative bin count");
        post.concentration[k] = prior.concentration[k] + static_cast<double>(counts[k]);
    }
    return post;
}

std::vector<double> draw_dirichlet(std::span<const double> concentration, Rng& rng) {
    std::vector<double> out(concentration.size());
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = rng.log_gamma(concentration[k]);
        peak = std::max(peak, out[k]);
    }
    double total = 0.0;
    for (double& v : out) {
        v = std::exp(v - peak);
        total += v;
    }
    for (double& v : out) v /= total;
    return out;
}

GridFunction histogram_density(std::span<const double> masses, const DyadicGrid& grid) {
    const std::size_t bins = masses.size();
    if (bins == 0 || (bins & (bins - 1)) != 0) throw DomainError("histogram_density: need 2^L bin masses");
    const int level = std::countr_zero(bins);
    if (level > grid.resolution()) throw ResolutionError("histogram_density: grid coarser than the histogram");
    const int shift = grid.resolution() - level;
    const double height = static_cast<double>(bins);
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = height * masses[i >> shift];
    return GridFunction(grid, std::move(v));
}

std::vector<GridFunction> draw_histogram_posterior(const HistogramPosterior& post, int draws, std::uint64_t seed,
                                                   const DyadicGrid& grid) {
    if (draws < 1) throw DomainError("draw_histogram_posterior: need at least one draw");
    Rng rng(derive_seed(seed, Stream::Posterior));
    std::vector<GridFunction> out;
    out.reserve(static_cast<std::size_t>(draws));
    for (int d = 0; d < draws; ++d) out.push_back(histogram_density(draw_dirichlet(post.concentration, rng), grid));
    return out;
}

// ---------------------------------------------------------------------------
// Likelihood

double log_likelihood(const GridFunction& f, const Sample& s) {
    double ll = 0.0;
    for (double x : s.points) {
        const double v = f.at(x);
        if (!(v > 0.0)) throw DomainError("log_likelihood: density is not positive at an observation");
        ll += std::log(v);
    }
    return ll;
}

GridFunction normalize_logdensity(const GridFunction& log_density) { return exp_normalize(log_density); }

// ---------------------------------------------------------------------------
// Losses

void LossAccumulator::add(double sup, double l2, double hellinger) {
    sup_.push_back(sup);
    l2_sum_ += l2;
    hellinger_sum_ += hellinger;
}

LossSummary LossAccumulator::summary() const {
    LossSummary s;
    s.draws = sup_.size();
    if (sup_.empty()) return s;
    const double m = static_cast<double>(sup_.size());
    s.sup = std::accumulate(sup_.begin(), sup_.end(), 0.0) / m;
    s.l2 = l2_sum_ / m;
    s.hellinger = hellinger_sum_ / m;
    std::vector<double> sorted = sup_;
    std::sort(sorted.begin(), sorted.end());
    const double pos = 0.9 * (m - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    s.q90_sup = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    return s;
}

LossSummary posterior_expected_losses(std::span<const GridFunction> draws, const GridFunction& f0, bool densities) {
    if (draws.empty()) throw DomainError("posterior_expected_losses: need at least one draw");
    LossAccumulator acc;
    for (const auto& f : draws) {
        acc.add(sup_distance(f, f0), l2_distance(f, f0),
                densities ? hellinger(f, f0) : std::numeric_limits<double>::quiet_NaN());
    }
    return acc.summary();
}

HistogramLossEvaluator::HistogramLossEvaluator(const GridFunction& f0, int level)
    : level_(level), bin_width_(std::exp2(-level)) {
    if (level > f0.grid().resolution()) throw ResolutionError("HistogramLossEvaluator: grid coarser than histogram");
    const std::size_t bins = std::size_t{1} << level;
    const std::size_t per_bin = f0.size() / bins;
    const double w = f0.grid().cell_width();
    lo_.assign(bins, std::numeric_limits<double>::infinity());
    hi_.assign(bins, -std::numeric_limits<double>::infinity());
    m1_.assign(bins, 0.0);
    m2_.assign(bins, 0.0);
    root_.assign(bins, 0.0);
    for (std::size_t i = 0; i < f0.size(); ++i) {
        const std::size_t b = i / per_bin;
        const double v = f0[i];
        if (v < -1e-12) throw DomainError("HistogramLossEvaluator: f0 takes a negative value");
        lo_[b] = std::min(lo_[b], v);
        hi_[b] = std::max(hi_[b], v);
        m1_[b] += v * w;
        m2_[b] += v * v * w;
        root_[b] += std::sqrt(std::max(v, 0.0)) * w;
    }
}

std::array<double, 3> HistogramLossEvaluator::evaluate(std::span<const double> masses) const {
    if (masses.size() != lo_.size()) throw std::invalid_argument("HistogramLossEvaluator: wrong number of bins");
    const double height = std::exp2(level_);
    double sup = 0.0;
    double l2 = 0.0;
    double h2 = 0.0;
    for (std::size_t b = 0; b < masses.size(); ++b) {
        const double c = height * masses[b];
        sup = std::max({sup, std::abs(c - lo_[b]), std::abs(c - hi_[b])});
        l2 += std::max(c * c * bin_width_ - 2.0 * c * m1_[b] + m2_[b], 0.0);
        h2 += std::max(c * bin_width_ - 2.0 * std::sqrt(c) * root_[b] + m1_[b], 0.0);
    }
    return {sup, std::sqrt(l2), std::sqrt(h2)};
}

// ---------------------------------------------------------------------------
// Log-density prior

double LogDensityPriorSpec::scale(int level) const {
    const double l = level;
    if (law == CoefficientLaw::Gaussian) return std::exp2(-l * (0.5 + r));
    return std::exp2(-l * alpha);
}

double LogDensityPriorSpec::log_phi(double u) const {
    switch (law) {
        case CoefficientLaw::Gaussian: return -0.5 * u * u;
        case CoefficientLaw::HeavyTail: return -std::pow(1.0 + std::abs(u), 1.0 - tau);
        case CoefficientLaw::Laplace: return -std::abs(u);
    }
    return 0.0;
}

void LogDensityPriorSpec::validate() const {
    if (cutoff < 0) throw ConfigError("log-density prior: cutoff L_n must be nonnegative");
    if (!(alpha > 0.0)) throw ConfigError("log-density prior: alpha must be positive");
    switch (law) {
        case CoefficientLaw::Gaussian:
            if (!(r > 0.0) || !(r <= alpha - 0.25)) {
                throw ConfigError("gaussian log-density prior: need 0 < r <= alpha - 1/4 (r = " + std::to_string(r) +
                                  ", alpha = " + std::to_string(alpha) + ")");
            }
            break;
        case CoefficientLaw::HeavyTail:
            if (!(tau >= 0.0) || !(tau < 1.0)) throw ConfigError("heavy-tail log-density prior: need 0 <= tau < 1");
            break;
        case CoefficientLaw::Laplace: break;
    }
}

void McmcConfig::validate() const {
    if (burn_in < 0 || thin < 1) throw ConfigError("mcmc: need burn_in >= 0 and thin >= 1");
    if (iterations < burn_in + 100) throw ConfigError("mcmc: iterations must be at least burn_in + 100");
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) throw ConfigError("mcmc: target acceptance in (0,1)");
    if (adapt_window < 1) throw ConfigError("mcmc: adapt_window must be positive");
}

// ---------------------------------------------------------------------------
// Sampler

namespace {

constexpr double kMinAcceptance = 0.1;
constexpr double kMaxAcceptance = 0.6;

void finish_flags(McmcChain& chain) {
    for (std::size_t l = 0; l < chain.acceptance_per_level.size(); ++l) {
        const double a = chain.acceptance_per_level[l];
        if (a < kMinAcceptance || a > kMaxAcceptance) {
            chain.flagged = true;
            chain.flag_reason = "post-burn-in acceptance " + std::to_string(a) + " at level " + std::to_string(l) +
                                " outside [0.1, 0.6]";
            return;
        }
    }
}

McmcChain run_crank_nicolson(const CoefficientTarget& target, const McmcConfig& cfg, Rng& rng) {
    const int levels = target.max_level + 1;
    CoefficientTree theta(target.max_level);
    CoefficientTree proposal(target.max_level);
    double ll = target.log_likelihood(theta);
    double beta = 0.5;
    int window_accepts = 0;
    long post_accepts = 0;

    McmcChain chain;
    chain.burn_in = cfg.burn_in;
    chain.thin = cfg.thin;
    for (int it = 0; it < cfg.iterations; ++it) {
        const double keep = std::sqrt(1.0 - beta * beta);
        for (int l = 0; l < levels; ++l) {
            const double sd = target.scale(l);
            auto cur = theta.level(l);
            auto prop = proposal.level(l);
            for (std::size_t k = 0; k < cur.size(); ++k) prop[k] = keep * cur[k] + beta * sd * rng.normal();
        }
        const double ll_prop = target.log_likelihood(proposal);
        const bool accept = std::log(rng.uniform()) < ll_prop - ll;
        if (accept) {
            std::swap(theta, proposal);
            ll = ll_prop;
        }
        if (it < cfg.burn_in) {
            window_accepts += accept ? 1 : 0;
            if ((it + 1) % cfg.adapt_window == 0) {
                const double rate = static_cast<double>(window_accepts) / cfg.adapt_window;
                beta = std::clamp(beta * std::exp(2.0 * (rate - cfg.target_acceptance)), 1e-4, 1.0);
                window_accepts = 0;
            }
        } else {
            post_accepts += accept ? 1 : 0;
            if ((it - cfg.burn_in) % cfg.thin == 0) chain.states.push_back(theta);
        }
    }
    const double rate = static_cast<double>(post_accepts) / (cfg.iterations - cfg.burn_in);
    chain.acceptance_per_level.assign(static_cast<std::size_t>(levels), rate);
    chain.step_scales = {beta};
    return chain;
}

McmcChain run_random_walk(const CoefficientTarget& target, const McmcConfig& cfg, Rng& rng) {
    const int levels = target.max_level + 1;
    CoefficientTree theta(target.max_level);
    CoefficientTree proposal(target.max_level);
    double ll = target.log_likelihood(theta);
    std::vector<double> step(static_cast<std::size_t>(levels));
    for (int l = 0; l < levels; ++l) step[static_cast<std::size_t>(l)] = 2.38 / std::sqrt(std::exp2(l));
    std::vector<int> window_accepts(static_cast<std::size_t>(levels), 0);
    std::vector<long> post_accepts(static_cast<std::size_t>(levels), 0);

    McmcChain chain;
    chain.burn_in = cfg.burn_in;
    chain.thin = cfg.thin;
    for (int it = 0; it < cfg.iterations; ++it) {
        for (int l = 0; l < levels; ++l) {
            const auto li = static_cast<std::size_t>(l);
            const double sd = step[li] * target.scale(l);
            proposal = theta;
            auto cur = theta.level(l);
            auto prop = proposal.level(l);
            double log_prior_diff = 0.0;
            for (std::size_t k = 0; k < cur.size(); ++k) {
                prop[k] = cur[k] + sd * rng.normal();
                log_prior_diff += target.log_prior(l, prop[k]) - target.log_prior(l, cur[k]);
            }
            double ll_prop = -std::numeric_limits<double>::infinity();
            if (std::isfinite(log_prior_diff)) ll_prop = target.log_likelihood(proposal);
            const bool accept = std::log(rng.uniform()) < ll_prop - ll + log_prior_diff;
            if (accept) {
                std::swap(theta, proposal);
                ll = ll_prop;
            }
            if (it < cfg.burn_in) {
                window_accepts[li] += accept ? 1 : 0;
                if ((it + 1) % cfg.adapt_window == 0) {
                    const double rate = static_cast<double>(window_accepts[li]) / cfg.adapt_window;
                    step[li] = std::clamp(step[li] * std::exp(2.0 * (rate - cfg.target_acceptance)), 1e-6, 1e3);
                    window_accepts[li] = 0;
                }
            } else {
                post_accepts[li] += accept ? 1 : 0;
            }
        }
        if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) chain.states.push_back(theta);
    }
    chain.acceptance_per_level.resize(static_cast<std::size_t>(levels));
    for (std::size_t l = 0; l < step.size(); ++l) {
        chain.acceptance_per_level[l] = static_cast<double>(post_accepts[l]) / (cfg.iterations - cfg.burn_in);
    }
    chain.step_scales = step;
    return chain;
}

GridFunction log_density_values(const CoefficientTree& theta, const WaveletBasis& basis) {
    CoefficientTree t = theta;
    t.scaling() = 0.0;
    return basis.synthesize(t);
}

}  // namespace

McmcChain run_metropolis(const CoefficientTarget& target, const McmcConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (target.max_level < 0 || !target.log_likelihood || !target.scale) {
        throw std::invalid_argument("run_metropolis: incomplete target");
    }
    if (!target.gaussian_prior && !target.log_prior) throw std::invalid_argument("run_metropolis: missing log prior");
    Rng rng(derive_seed(seed, Stream::Mcmc));
    McmcChain chain = target.gaussian_prior ? run_crank_nicolson(target, cfg, rng) : run_random_walk(target, cfg, rng);
    finish_flags(chain);
    return chain;
}

McmcChain logdensity_mcmc(const LogDensityPriorSpec& prior, const Sample& s, const WaveletBasis& basis,
                          const McmcConfig& cfg, std::uint64_t seed) {
    prior.validate();
    if (prior.cutoff > basis.max_level()) {
        throw std::out_of_range("logdensity_mcmc: cutoff exceeds the basis max level");
    }
    const auto counts = cell_counts(s, basis.grid());
    const double n = static_cast<double>(s.size());

    CoefficientTarget target;
    target.max_level = prior.cutoff;
    target.scale = [&prior](int l) { return prior.scale(l); };
    target.gaussian_prior = prior.law == CoefficientLaw::Gaussian;
    target.log_prior = [&prior](int l, double v) { return prior.log_phi(v / prior.scale(l)); };
    target.log_likelihood = [&](const CoefficientTree& theta) {
        const GridFunction t = log_density_values(theta, basis);
        double linear = 0.0;
        for (std::size_t c = 0; c < counts.size(); ++c) {
            if (counts[c] != 0) linear += static_cast<double>(counts[c]) * t[c];
        }
        return n > 0.0 ? linear - n * log_partition(t) : 0.0;
    };
    return run_metropolis(target, cfg, seed);
}

std::vector<GridFunction> chain_densities(const McmcChain& chain, const WaveletBasis& basis) {
    std::vector<GridFunction> out;
    out.reserve(chain.states.size());
    for (const auto& theta : chain.states) out.push_back(normalize_logdensity(log_density_values(theta, basis)));
    return out;
}

}  // namespace supnorm
