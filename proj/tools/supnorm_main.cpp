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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "supnorm/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"supnorm: sup-norm posterior contraction experiments"};
    app.set_version_flag("--version", SUPNORM_VERSION);
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    int threads = 1;
    auto* sim = app.add_subcommand("simulate", "run an experiment and write records.csv and manifest.json");
    sim->add_option("config", config, "experiment config (JSON)")->required();
    sim->add_option("--out", out_dir, "output directory")->required();
    sim->add_option("--threads", threads, "worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);

    std::string csv;
    std::string regressor = "nlogn";
    auto* fit = app.add_subcommand("fit-rate", "fit the log-log slope of the mean sup loss");
    fit->add_option("records", csv, "records CSV")->required();
    fit->add_option("--regressor", regressor, "nlogn (log(n/log n)) or n (log n)");

    auto* report = app.add_subcommand("report", "per-n summary table in markdown");
    report->add_option("records", csv, "records CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : supnorm::kExitConfig;
    }

    if (*sim) return supnorm::cmd_simulate(config, out_dir, threads, std::cout, std::cerr);
    if (*fit) return supnorm::cmd_fit_rate(csv, regressor, std::cout, std::cerr);
    return supnorm::cmd_report(csv, std::cout, std::cerr);
}
