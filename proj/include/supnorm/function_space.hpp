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

#include "supnorm/grid.hpp"
#include "supnorm/wavelet.hpp"

namespace supnorm {

/// sup over levels l <= max_level of 2^{l(1/2+s)} |theta_{lk}|. A truncation
/// of the B^s_{inf,inf} norm; the scaling coefficient does not enter.
double besov_norm(const CoefficientTree& coeffs, double s);
double besov_norm(const GridFunction& f, double s, const WaveletBasis& basis);

double sup_distance(const GridFunction& f, const GridFunction& g);
double l2_distance(const GridFunction& f, const GridFunction& g);

/// Unnormalised Hellinger distance, h^2 = int (sqrt f - sqrt g)^2, so 0 <= h <= sqrt 2
/// for densities. Values down to -1e-12 are clamped to zero; anything more
/// negative throws DomainError.
double hellinger(const GridFunction& f, const GridFunction& g);

enum class TruthKind {
    /// f_{0,lk} = R s_{lk} 2^{-l(1/2+alpha)} with seeded random signs.
    SignedCoefficient,
    /// Same magnitudes with signs (-1)^k; independent of the seed.
    FixedAnalytic,
};

struct HolderTruthSpec {
    double alpha = 1.0;
    double radius = 1.0;
    std::uint64_t seed = 0;
    TruthKind kind = TruthKind::SignedCoefficient;

    void validate() const;
};

/// Coefficients saturating the Besov ball constraint at every level <= max_level.
CoefficientTree holder_truth_coefficients(const HolderTruthSpec& spec, int max_level);
GridFunction make_holder_truth(const HolderTruthSpec& spec, const WaveletBasis& basis);

/// exp(T - c(T)) with c(T) = log int e^T, computed with a max shift.
GridFunction exp_normalize(const GridFunction& log_values);
/// c(T) = log int e^T by midpoint quadrature, overflow-safe.
double log_partition(const GridFunction& log_values);

struct DensityTruthSpec {
    HolderTruthSpec log_density;
};

struct DensityTruth {
    GridFunction density;
    double lower;  // rho_0 = min f_0
    double upper;  // D_0 = max f_0
};

/// f_0 = exp(g_0 - c(g_0)) for the Hölder truth g_0.
DensityTruth make_density_truth(const DensityTruthSpec& spec, const WaveletBasis& basis);

}  // namespace supnorm
