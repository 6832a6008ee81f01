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

#include "supnorm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "supnorm/errors.hpp"

namespace supnorm {

DyadicGrid::DyadicGrid(int resolution) : resolution_(resolution), width_(std::ldexp(1.0, -resolution)) {
    if (resolution < 1 || resolution > 24) {
        throw DomainError("grid resolution must lie in [1, 24], got " + std::to_string(resolution));
    }
}

std::size_t DyadicGrid::cell_of(double x) const noexcept {
    const double scaled = std::ceil(x * static_cast<double>(size()));
    if (!(scaled >= 1.0)) return 0;
    const auto i = static_cast<std::size_t>(scaled) - 1;
    return std::min(i, size() - 1);
}

void require_same_grid(const DyadicGrid& a, const DyadicGrid& b, const char* context) {
    if (!(a == b)) {
        throw GridMismatchError(std::string(context) + ": grid resolutions differ (" +
                                std::to_string(a.resolution()) + " vs " + std::to_string(b.resolution()) + ")");
    }
}

GridFunction::GridFunction(DyadicGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}

GridFunction::GridFunction(DyadicGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw GridMismatchError("GridFunction: expected " + std::to_string(grid_.size()) + " values, got " +
                                std::to_string(values_.size()));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw DomainError("GridFunction: non-finite value");
    }
}

GridFunction GridFunction::constant(DyadicGrid grid, double c) {
    return GridFunction(grid, std::vector<double>(grid.size(), c));
}

double GridFunction::integral() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * grid_.cell_width();
}

double GridFunction::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

GridFunction& GridFunction::operator+=(const GridFunction& other) {
    require_same_grid(grid_, other.grid_, "GridFunction::operator+=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
    require_same_grid(grid_, other.grid_, "GridFunction::operator-=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

GridFunction& GridFunction::operator*=(double c) noexcept {
    for (double& v : values_) v *= c;
    return *this;
}

void GridFunction::write_csv(std::ostream& os) const {
    os << "midpoint,value\n";
    char buf[64];
    for (std::size_t i = 0; i < values_.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", grid_.midpoint(i), values_[i]);
        os << buf;
    }
}

}  // namespace supnorm
