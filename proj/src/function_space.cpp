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

#include "supnorm/function_space.hpp"

#include <algorithm>
#include <cmath>

#include "supnorm/errors.hpp"
#include "supnorm/random.hpp"

namespace supnorm {

double besov_norm(const CoefficientTree& coeffs, double s) {
    if (!(s > 0.0)) throw DomainError("besov_norm: smoothness must be positive");
    double best = 0.0;
    for (int l = 0; l <= coeffs.max_level(); ++l) {
        double level_max = 0.0;
        for (double c : coeffs.level(l)) level_max = std::max(level_max, std::abs(c));
        best = std::max(best, std::exp2(l * (0.5 + s)) * level_max);
    }
    return best;
}

double besov_norm(const GridFunction& f, double s, const WaveletBasis& basis) {
    return besov_norm(basis.analyze(f), s);
}

double sup_distance(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f.grid(), g.grid(), "sup_distance");
    double d = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) d = std::max(d, std::abs(f[i] - g[i]));
    return d;
}

double l2_distance(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f.grid(), g.grid(), "l2_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = f[i] - g[i];
        s += d * d;
    }
    return std::sqrt(s * f.grid().cell_width());
}

namespace {

double checked_sqrt(double v) {
    if (v < -1e-12) throw DomainError("hellinger: density takes a negative value");
    return std::sqrt(std::max(v, 0.0));
}

}  // namespace

double hellinger(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f.grid(), g.grid(), "hellinger");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = checked_sqrt(f[i]) - checked_sqrt(g[i]);
        s += d * d;
    }
    return std::sqrt(s * f.grid().cell_width());
}

void HolderTruthSpec::validate() const {
    if (!(alpha > 0.0)) throw DomainError("Hölder truth: alpha must be positive");
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw DomainError("Hölder truth: radius must be nonnegative");
}

CoefficientTree holder_truth_coefficients(const HolderTruthSpec& spec, int max_level) {
    spec.validate();
    CoefficientTree c(max_level);
    Rng rng(derive_seed(spec.seed, Stream::Truth));
    for (int l = 0; l <= max_level; ++l) {
        const double magnitude = spec.radius * std::exp2(-l * (0.5 + spec.alpha));
        auto level = c.level(l);
        for (std::size_t k = 0; k < level.size(); ++k) {
            double sign;
            if (spec.kind == TruthKind::SignedCoefficient) {
                sign = (rng() >> 63) ? 1.0 : -1.0;
            } else {
                sign = (k % 2 == 0) ? 1.0 : -1.0;
            }
            level[k] = sign * magnitude;
        }
    }
    return c;
}

GridFunction make_holder_truth(const HolderTruthSpec& spec, const WaveletBasis& basis) {
    return basis.synthesize(holder_truth_coefficients(spec, basis.max_level()));
}

double log_partition(const GridFunction& log_values) {
    const double shift = log_values.max();
    double s = 0.0;
    for (double v : log_values.values()) s += std::exp(v - shift);
    return shift + std::log(s * log_values.grid().cell_width());
}

GridFunction exp_normalize(const GridFunction& log_values) {
    const double c = log_partition(log_values);
    std::vector<double> out(log_values.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_values[i] - c);
    return GridFunction(log_values.grid(), std::move(out));
}

DensityTruth make_density_truth(const DensityTruthSpec& spec, const WaveletBasis& basis) {
    GridFunction f0 = exp_normalize(make_holder_truth(spec.log_density, basis));
    const double lo = f0.min();
    const double hi = f0.max();
    return {std::move(f0), lo, hi};
}

}  // namespace supnorm
