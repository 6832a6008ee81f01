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

#include <stdexcept>
#include <string>

namespace supnorm {

/// Two grid-carried objects were combined but live on different grids.
class GridMismatchError : public std::invalid_argument {
public:
    explicit GridMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

/// The grid cannot resolve the requested number of wavelet levels.
class ResolutionError : public std::invalid_argument {
public:
    explicit ResolutionError(const std::string& what) : std::invalid_argument(what) {}
};

/// A value violates a documented precondition or model invariant.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Numerical breakdown (underflow, rank loss) that the caller cannot fix by retrying.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid experiment configuration; the message names the violated rule.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace supnorm
