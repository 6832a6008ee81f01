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

#include "supnorm/model_wn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "supnorm/errors.hpp"

namespace supnorm {

namespace {

constexpr double kLogMassCut = 40.0;

std::size_t flat_index(int level, int position) noexcept {
    return (std::size_t{1} << level) - 1 + static_cast<std::size_t>(position);
}

std::uint64_t coord_seed(std::uint64_t seed, Stream purpose, int level, int position) {
    // The scaling coefficient sits at path (0, 0); wavelet (l, k) at (l + 1, k).
    return derive_seed(seed, purpose, {static_cast<std::uint64_t>(level + 1), static_cast<std::uint64_t>(position)});
}

}  // namespace

// ---------------------------------------------------------------------------
// ProductPriorSpec

double ProductPriorSpec::scale(int level) const {
    const double l = std::max(level, 0);
    const double base = std::exp2(-l * (0.5 + alpha));
    if (kind == ProductPriorKind::Uniform) return base;
    return base / std::pow(l + 1.0, 1.0 / (1.0 + delta));
}

double ProductPriorSpec::log_phi(double u) const {
    if (kind == ProductPriorKind::Uniform) {
        return std::abs(u) <= bound ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    return -std::pow(std::abs(u), 1.0 + delta);
}

double ProductPriorSpec::support_half_width() const {
    return kind == ProductPriorKind::Uniform ? bound : std::numeric_limits<double>::infinity();
}

void ProductPriorSpec::validate(double truth_radius) const {
    if (!(alpha > 0.0)) throw ConfigError("product prior: alpha must be positive");
    if (max_level < 0) throw ConfigError("product prior: truncation level must be nonnegative");
    if (kind == ProductPriorKind::Uniform) {
        if (!(bound > truth_radius)) {
            throw ConfigError("uniform prior: bound B must exceed the truth radius R (B = " + std::to_string(bound) +
                              ", R = " + std::to_string(truth_radius) + ")");
        }
    } else if (!(delta > 0.0)) {
        throw ConfigError("exponential-power prior: delta must be positive");
    }
}

// ---------------------------------------------------------------------------
// Data

WhiteNoiseData simulate_wn(const CoefficientTree& truth, int n, int max_level, std::uint64_t seed, NoiseMode noise) {
    if (n < 1) throw DomainError("simulate_wn: n must be at least 1");
    WhiteNoiseData data;
    data.n = n;
    data.seed = seed;
    data.observations = truth.resized(max_level);
    if (noise == NoiseMode::Zero) return data;
    const double noise_sd = 1.0 / std::sqrt(static_cast<double>(n));
    data.observations.scaling() += noise_sd * Rng(coord_seed(seed, Stream::Noise, -1, 0)).normal();
    for (int l = 0; l <= max_level; ++l) {
        auto level = data.observations.level(l);
        for (std::size_t k = 0; k < level.size(); ++k) {
            level[k] += noise_sd * Rng(coord_seed(seed, Stream::Noise, l, static_cast<int>(k))).normal();
        }
    }
    return data;
}

WhiteNoiseData simulate_wn(const GridFunction& truth, int n, const WaveletBasis& basis, std::uint64_t seed,
                           NoiseMode noise) {
    return simulate_wn(basis.analyze(truth), n, basis.max_level(), seed, noise);
}

// ---------------------------------------------------------------------------
// CoordPosterior

CoordPosterior CoordPosterior::compute(double x, int level, const ProductPriorSpec& prior, int n) {
    const double sigma = prior.scale(level);
    if (!(sigma > 0.0)) throw DomainError("coord_posterior: sigma_l must be positive");
    if (n < 1) throw DomainError("coord_posterior: n must be at least 1");
    const double nn = static_cast<double>(n);
    auto log_post = [&](double theta) {
        const double lp = prior.log_phi(theta / sigma);
        const double d = x - theta;
        return -0.5 * nn * d * d + lp;
    };

    const double half = prior.support_half_width() * sigma;
    const double lo_support = -half;
    const double hi_support = half;

    // The log posterior is concave (Gaussian likelihood times a log-concave phi).
    double mode;
    if (prior.kind == ProductPriorKind::Uniform) {
        mode = std::clamp(x, lo_support, hi_support);
    } else {
        const double p = 1.0 + prior.delta;
        auto slope = [&](double theta) {
            const double u = std::abs(theta) / sigma;
            const double prior_slope = p * std::pow(u, prior.delta) / sigma;
            return nn * (x - theta) - (theta < 0.0 ? -prior_slope : prior_slope);
        };
        double a = std::min(0.0, x);
        double b = std::max(0.0, x);
        for (int it = 0; it < 200 && b - a > 0.0; ++it) {
            const double mid = 0.5 * (a + b);
            if (mid == a || mid == b) break;
            (slope(mid) > 0.0 ? a : b) = mid;
        }
        mode = 0.5 * (a + b);
    }
    const double peak = log_post(mode);
    if (!std::isfinite(peak)) throw NumericalError("coord_posterior: posterior has no mass at its mode");

    const double step0 = std::min(1.0 / std::sqrt(nn), sigma);
    auto edge = [&](double dir) {
        const double bound = dir < 0.0 ? lo_support : hi_support;
        double inside = mode;
        double s = step0;
        double outside = mode;
        for (int it = 0; it < 400; ++it) {
            double cand = mode + dir * s;
            if ((dir < 0.0 && cand <= bound) || (dir > 0.0 && cand >= bound)) {
                if (log_post(bound) > peak - kLogMassCut) return bound;
                outside = bound;
                break;
            }
            if (log_post(cand) <= peak - kLogMassCut) {
                outside = cand;
                break;
            }
            inside = cand;
            s *= 2.0;
        }
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (inside + outside);
            if (mid == inside || mid == outside) break;
            (log_post(mid) > peak - kLogMassCut ? inside : outside) = mid;
        }
        return outside;
    };
    const double lo = edge(-1.0);
    const double hi = edge(1.0);
    if (!(hi > lo)) throw NumericalError("coord_posterior: empty quadrature window");

    CoordPosterior post;
    post.x_ = x;
    post.n_ = n;
    post.theta_.resize(kTableSize);
    post.density_.resize(kTableSize);
    post.cdf_.resize(kTableSize);
    const double h = (hi - lo) / static_cast<double>(kTableSize - 1);
    for (std::size_t i = 0; i < kTableSize; ++i) {
        post.theta_[i] = i + 1 == kTableSize ? hi : lo + h * static_cast<double>(i);
        const double v = log_post(post.theta_[i]) - peak;
        post.density_[i] = std::isfinite(v) ? std::exp(v) : 0.0;
    }
    double mass = 0.0;
    post.cdf_[0] = 0.0;
    for (std::size_t i = 1; i < kTableSize; ++i) {
        mass += 0.5 * h * (post.density_[i - 1] + post.density_[i]);
        post.cdf_[i] = mass;
    }
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw NumericalError("coord_posterior: total posterior mass underflows");
    }
    for (std::size_t i = 0; i < kTableSize; ++i) {
        post.density_[i] /= mass;
        post.cdf_[i] /= mass;
    }
    post.cdf_.back() = 1.0;

    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < kTableSize; ++i) {
        const double w = (i == 0 || i + 1 == kTableSize) ? 0.5 * h : h;
        m1 += w * post.theta_[i] * post.density_[i];
    }
    for (std::size_t i = 0; i < kTableSize; ++i) {
        const double w = (i == 0 || i + 1 == kTableSize) ? 0.5 * h : h;
        const double d = post.theta_[i] - m1;
        m2 += w * d * d * post.density_[i];
    }
    post.mean_ = m1;
    post.variance_ = m2;
    return post;
}

double CoordPosterior::quantile(double u) const noexcept {
    if (u <= 0.0) return theta_.front();
    if (u >= 1.0) return theta_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    if (i == 0) return theta_.front();
    if (i >= cdf_.size()) return theta_.back();
    const double c0 = cdf_[i - 1];
    const double c1 = cdf_[i];
    const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
    return theta_[i - 1] + frac * (theta_[i] - theta_[i - 1]);
}

double CoordPosterior::laplace(double t) const {
    const double h = theta_[1] - theta_[0];
    const double scale = t * std::sqrt(static_cast<double>(n_));
    double s = 0.0;
    for (std::size_t i = 0; i < theta_.size(); ++i) {
        const double w = (i == 0 || i + 1 == theta_.size()) ? 0.5 * h : h;
        s += w * density_[i] * std::exp(scale * (theta_[i] - x_));
    }
    return s;
}

// ---------------------------------------------------------------------------
// ProductPosterior

ProductPosterior::ProductPosterior(const WhiteNoiseData& data, const ProductPriorSpec& prior)
    : max_level_(std::min(data.observations.max_level(), prior.max_level)),
      scaling_(CoordPosterior::compute(data.observations.scaling(), 0, prior, data.n)) {
    coords_.reserve((std::size_t{1} << (max_level_ + 1)) - 1);
    for (int l = 0; l <= max_level_; ++l) {
        for (double x : data.observations.level(l)) coords_.push_back(CoordPosterior::compute(x, l, prior, data.n));
    }
}

const CoordPosterior& ProductPosterior::coordinate(int level, int position) const {
    if (level < 0 || level > max_level_ || !WaveletIndex{level, position}.valid()) {
        throw std::out_of_range("ProductPosterior: index out of range");
    }
    return coords_[flat_index(level, position)];
}

CoefficientTree ProductPosterior::mean() const {
    CoefficientTree out(max_level_);
    out.scaling() = scaling_.mean();
    auto flat = out.flat();
    for (std::size_t i = 0; i < coords_.size(); ++i) flat[i] = coords_[i].mean();
    return out;
}

std::vector<Rng> ProductPosterior::make_streams(std::uint64_t seed) const {
    std::vector<Rng> rngs;
    rngs.reserve(coords_.size() + 1);
    rngs.emplace_back(coord_seed(seed, Stream::Posterior, -1, 0));
    for (int l = 0; l <= max_level_; ++l) {
        for (int k = 0; k < (1 << l); ++k) rngs.emplace_back(coord_seed(seed, Stream::Posterior, l, k));
    }
    return rngs;
}

void ProductPosterior::draw(std::vector<Rng>& rngs, CoefficientTree& out) const {
    if (rngs.size() != coords_.size() + 1 || out.max_level() != max_level_) {
        throw std::invalid_argument("ProductPosterior::draw: stream or output size mismatch");
    }
    out.scaling() = scaling_.sample(rngs[0]);
    auto flat = out.flat();
    for (std::size_t i = 0; i < coords_.size(); ++i) flat[i] = coords_[i].sample(rngs[i + 1]);
}

std::vector<GridFunction> draw_posterior_function(const WhiteNoiseData& data, const ProductPriorSpec& prior,
                                                  const WaveletBasis& basis, int draws, std::uint64_t seed) {
    if (draws < 1) throw DomainError("draw_posterior_function: need at least one draw");
    const ProductPosterior post(data, prior);
    if (post.max_level() > basis.max_level()) {
        throw std::out_of_range("draw_posterior_function: prior truncation exceeds the basis max level");
    }
    auto rngs = post.make_streams(seed);
    CoefficientTree theta(post.max_level());
    std::vector<GridFunction> out;
    out.reserve(static_cast<std::size_t>(draws));
    for (int d = 0; d < draws; ++d) {
        post.draw(rngs, theta);
        out.push_back(basis.synthesize(theta));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Laplace transform of the centred posterior

namespace {

void check_laplace_args(const ProductPriorSpec& prior, double t) {
    if (prior.kind != ProductPriorKind::Uniform) throw DomainError("laplace_check: requires the uniform prior");
    if (!(std::abs(t) <= 3.0)) throw DomainError("laplace_check: |t| must not exceed 3");
}

}  // namespace

double laplace_check(const WhiteNoiseData& data, const ProductPriorSpec& prior, int level, int position, double t) {
    check_laplace_args(prior, t);
    const double x = data.observations(level, position);
    return CoordPosterior::compute(x, level, prior, data.n).laplace(t);
}

double laplace_average(double true_coeff, int level, int position, const ProductPriorSpec& prior, int n, double t,
                       int replications, std::uint64_t seed, bool flip_noise) {
    check_laplace_args(prior, t);
    if (replications < 1) throw DomainError("laplace_average: need at least one replication");
    const double noise_sd = 1.0 / std::sqrt(static_cast<double>(n));
    double total = 0.0;
    for (int r = 0; r < replications; ++r) {
        Rng rng(derive_seed(seed, Stream::Noise, {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(level),
                                                 static_cast<std::uint64_t>(position)}));
        const double eps = rng.normal();
        const double x = true_coeff + (flip_noise ? -eps : eps) * noise_sd;
        total += CoordPosterior::compute(x, level, prior, n).laplace(t);
    }
    return total / replications;
}

}  // namespace supnorm
