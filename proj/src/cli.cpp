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

#include "supnorm/cli.hpp"

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "supnorm/errors.hpp"

namespace supnorm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("key '") + key + "' has the wrong type");
    }
}

PriorSpec parse_prior(const json& j) {
    json p = j.is_string() ? json{{"kind", j}} : j;
    if (!p.is_object() || !p.contains("kind") || !p["kind"].is_string()) {
        throw ConfigError("prior must be a string or an object with a 'kind'");
    }
    const std::string kind = p["kind"];
    if (kind == "uniform") {
        check_keys(p, {"kind", "B"}, "prior");
        return UniformPrior{get_or(p, "B", 2.0)};
    }
    if (kind == "exponential-power") {
        check_keys(p, {"kind", "delta"}, "prior");
        return ExponentialPowerPrior{get_or(p, "delta", 1.0)};
    }
    if (kind == "dirichlet") {
        check_keys(p, {"kind", "value", "exponent"}, "prior");
        DirichletPrior d{get_or(p, "value", 1.0), std::nullopt};
        if (p.contains("exponent") && !p["exponent"].is_null()) d.exponent = get_or(p, "exponent", 0.0);
        return d;
    }
    if (kind == "gaussian" || kind == "heavy-tail" || kind == "laplace") {
        check_keys(p, {"kind", "r", "tau"}, "prior");
        LogDensityPrior q;
        q.law = kind == "gaussian" ? CoefficientLaw::Gaussian
                : kind == "heavy-tail" ? CoefficientLaw::HeavyTail
                                       : CoefficientLaw::Laplace;
        q.r = get_or(p, "r", 0.5);
        q.tau = get_or(p, "tau", 0.0);
        return q;
    }
    throw ConfigError("unknown prior kind '" + kind + "'");
}

json prior_json(const PriorSpec& prior) {
    json p;
    p["kind"] = prior_name(prior);
    if (const auto* u = std::get_if<UniformPrior>(&prior)) p["B"] = u->bound;
    if (const auto* e = std::get_if<ExponentialPowerPrior>(&prior)) p["delta"] = e->delta;
    if (const auto* d = std::get_if<DirichletPrior>(&prior)) {
        p["value"] = d->value;
        p["exponent"] = d->exponent ? json(*d->exponent) : json(nullptr);
    }
    if (const auto* q = std::get_if<LogDensityPrior>(&prior)) {
        if (q->law == CoefficientLaw::Gaussian) p["r"] = q->r;
        if (q->law == CoefficientLaw::HeavyTail) p["tau"] = q->tau;
    }
    return p;
}

json config_json(const ExperimentConfig& cfg) {
    json j;
    j["model"] = to_string(cfg.model);
    j["prior"] = prior_json(cfg.prior);
    j["alpha"] = cfg.alpha;
    j["R"] = cfg.radius;
    j["n_grid"] = cfg.n_grid;
    j["replications"] = cfg.replications;
    j["draws"] = cfg.draws;
    j["resolution"] = cfg.resolution;
    j["basis"] = {{"kind", cfg.basis == WaveletKind::Haar ? "haar" : "boundary-smooth"}, {"order", cfg.basis_order}};
    j["truth_depth"] = cfg.effective_truth_depth();
    j["truth"] = cfg.truth == TruthKind::FixedAnalytic ? "fixed" : "signed";
    j["mcmc"] = {{"iterations", cfg.mcmc.iterations},
                 {"burn_in", cfg.mcmc.burn_in},
                 {"thin", cfg.mcmc.thin},
                 {"target_acceptance", cfg.mcmc.target_acceptance},
                 {"adapt_window", cfg.mcmc.adapt_window}};
    j["seed"] = cfg.seed;
    return j;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<LossRecord> load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open " + path);
    return read_records_csv(in);
}

std::string fmt(double v, const char* spec = "%.4g") {
    if (!std::isfinite(v)) return "-";
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    check_keys(j,
               {"model", "prior", "alpha", "R", "n_grid", "replications", "draws", "resolution", "basis",
                "truth_depth", "truth", "mcmc", "seed"},
               "config");

    ExperimentConfig cfg;
    if (!j.contains("model")) throw ConfigError("missing 'model'");
    const auto model = parse_model_kind(get_or<std::string>(j, "model", ""));
    if (!model) throw ConfigError("unknown model kind '" + get_or<std::string>(j, "model", "") + "'");
    cfg.model = *model;
    if (!j.contains("prior")) throw ConfigError("missing 'prior'");
    cfg.prior = parse_prior(j["prior"]);
    if (!j.contains("alpha")) throw ConfigError("missing 'alpha'");
    cfg.alpha = get_or(j, "alpha", 0.0);
    cfg.radius = get_or(j, "R", 1.0);
    if (!j.contains("n_grid")) throw ConfigError("missing 'n_grid'");
    cfg.n_grid = get_or<std::vector<int>>(j, "n_grid", {});
    cfg.replications = get_or(j, "replications", cfg.replications);
    cfg.draws = get_or(j, "draws", cfg.model == ModelKind::DensityHistogram ? 2000 : cfg.draws);
    cfg.resolution = get_or(j, "resolution", cfg.resolution);
    cfg.basis = cfg.model == ModelKind::DensityHistogram ? WaveletKind::Haar : WaveletKind::BoundarySmooth;
    if (j.contains("basis")) {
        const json& b = j["basis"];
        json obj = b.is_string() ? json{{"kind", b}} : b;
        if (!obj.is_object()) throw ConfigError("basis must be a string or an object");
        check_keys(obj, {"kind", "order"}, "basis");
        const std::string kind =
            get_or<std::string>(obj, "kind", cfg.basis == WaveletKind::Haar ? "haar" : "boundary-smooth");
        if (kind == "haar") {
            cfg.basis = WaveletKind::Haar;
        } else if (kind == "boundary-smooth") {
            cfg.basis = WaveletKind::BoundarySmooth;
        } else {
            throw ConfigError("unknown basis kind '" + kind + "'");
        }
        cfg.basis_order = get_or(obj, "order", cfg.basis_order);
    }
    cfg.truth_depth = get_or(j, "truth_depth", -1);
    const std::string truth = get_or<std::string>(j, "truth", "signed");
    if (truth == "signed") {
        cfg.truth = TruthKind::SignedCoefficient;
    } else if (truth == "fixed") {
        cfg.truth = TruthKind::FixedAnalytic;
    } else {
        throw ConfigError("unknown truth kind '" + truth + "'");
    }
    if (j.contains("mcmc")) {
        const json& m = j["mcmc"];
        if (!m.is_object()) throw ConfigError("mcmc must be an object");
        check_keys(m, {"iterations", "burn_in", "thin", "target_acceptance", "adapt_window"}, "mcmc");
        cfg.mcmc.iterations = get_or(m, "iterations", cfg.mcmc.iterations);
        cfg.mcmc.burn_in = get_or(m, "burn_in", cfg.mcmc.burn_in);
        cfg.mcmc.thin = get_or(m, "thin", cfg.mcmc.thin);
        cfg.mcmc.target_acceptance = get_or(m, "target_acceptance", cfg.mcmc.target_acceptance);
        cfg.mcmc.adapt_window = get_or(m, "adapt_window", cfg.mcmc.adapt_window);
    }
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);

    try {
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg, int indent) { return config_json(cfg).dump(indent); }

std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : config_to_json(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunManifest::to_json(const ExperimentConfig& cfg) const {
    json j;
    j["config_hash"] = config_hash;
    j["tool_version"] = tool_version;
    j["seed"] = seed;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["outputs"] = outputs;
    j["warnings"] = warnings;
    j["config"] = config_json(cfg);
    return j.dump(2);
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int threads, std::ostream& out,
                 std::ostream& err) {
    ExperimentConfig cfg;
    try {
        cfg = parse_config(config_path);
        if (const char* env = std::getenv("SUPNORM_SEED"); env != nullptr && *env != '\0') {
            char* end = nullptr;
            errno = 0;
            const unsigned long long s = std::strtoull(env, &end, 10);
            if (*end != '\0' || errno == ERANGE || env[0] == '-') {
                throw ConfigError(std::string("SUPNORM_SEED is not a nonnegative integer: ") + env);
            }
            cfg.seed = s;
        }
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    RunManifest manifest;
    manifest.config_hash = config_hash(cfg);
    manifest.tool_version = SUPNORM_VERSION;
    manifest.seed = cfg.seed;
    manifest.warnings = cfg.fit_warnings();
    for (const auto& w : manifest.warnings) err << "warning: " << w << '\n';

    try {
        const fs::path dir(out_dir);
        fs::create_directories(dir);
        const fs::path csv = dir / "records.csv";
        const fs::path man = dir / "manifest.json";
        manifest.started_at = utc_now();
        const auto records = run_experiment(cfg, threads);
        manifest.finished_at = utc_now();
        {
            std::ofstream os(csv, std::ios::binary);
            if (!os) throw std::runtime_error("cannot write " + csv.string());
            write_records_csv(os, records);
            if (!os) throw std::runtime_error("write failed: " + csv.string());
        }
        manifest.outputs = {csv.string(), man.string()};
        {
            std::ofstream os(man, std::ios::binary);
            if (!os) throw std::runtime_error("cannot write " + man.string());
            os << manifest.to_json(cfg) << '\n';
            if (!os) throw std::runtime_error("write failed: " + man.string());
        }
        int flagged = 0;
        for (const auto& r : records) flagged += r.flagged ? 1 : 0;
        out << "wrote " << records.size() << " records to " << csv.string();
        if (flagged > 0) out << " (" << flagged << " flagged)";
        out << '\n';
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_fit_rate(const std::string& csv_path, const std::string& regressor, std::ostream& out, std::ostream& err) {
    const auto reg = parse_regressor(regressor);
    if (!reg) {
        err << "unknown regressor '" << regressor << "' (expected nlogn or n)\n";
        return kExitConfig;
    }
    try {
        const RateFit fit = fit_rate(load_csv(csv_path), *reg);
        json j;
        j["slope"] = fit.slope;
        j["intercept"] = fit.intercept;
        j["stderr"] = fit.stderr_slope;
        j["r2"] = fit.r_squared;
        j["target"] = fit.target;
        j["regressor"] = to_string(fit.regressor);
        j["n_points"] = fit.n_points;
        j["excluded_rows"] = fit.excluded_rows;
        out << j.dump() << '\n';
    } catch (const std::exception& e) {
        err << "fit-rate: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

int cmd_report(const std::string& csv_path, std::ostream& out, std::ostream& err) {
    std::vector<LossRecord> records;
    try {
        records = load_csv(csv_path);
    } catch (const std::exception& e) {
        err << "report: " << e.what() << '\n';
        return kExitConfig;
    }
    if (records.empty()) {
        out << "no records\n";
        return kExitOk;
    }
    const auto rows = summarize_by_n(records);
    int flagged = 0;
    for (const auto& s : rows) flagged += s.flagged;
    out << "model: " << records.front().model << ", prior: " << records.front().prior
        << ", alpha: " << fmt(records.front().alpha) << "\n\n";
    out << "| n | rows | flagged | mean sup | median sup | mean L2 | median L2 | mean hellinger | mean q90 sup | "
           "trunc bias |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& s : rows) {
        out << "| " << s.n << " | " << s.rows << " | " << s.flagged << " | " << fmt(s.mean_sup) << " | "
            << fmt(s.median_sup) << " | " << fmt(s.mean_l2) << " | " << fmt(s.median_l2) << " | "
            << fmt(s.mean_hellinger) << " | " << fmt(s.mean_q90) << " | " << fmt(s.trunc_bias) << " |\n";
    }
    out << "\nexcluded (flagged) rows: " << flagged << '\n';
    return kExitOk;
}

}  // namespace supnorm
