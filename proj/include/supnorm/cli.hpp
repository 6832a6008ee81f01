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
#include <string>
#include <vector>

#include "supnorm/rates.hpp"

namespace supnorm {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Parses and validates a JSON experiment config. Throws ConfigError.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

/// The config with every default filled in, as canonical JSON (sorted keys).
std::string config_to_json(const ExperimentConfig& cfg, int indent = -1);

/// FNV-1a over the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

struct RunManifest {
    std::string config_hash;
    std::string tool_version;
    std::uint64_t seed = 0;
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;

    std::string to_json(const ExperimentConfig& cfg) const;
};

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int threads, std::ostream& out,
                 std::ostream& err);
int cmd_fit_rate(const std::string& csv_path, const std::string& regressor, std::ostream& out, std::ostream& err);
int cmd_report(const std::string& csv_path, std::ostream& out, std::ostream& err);

}  // namespace supnorm
