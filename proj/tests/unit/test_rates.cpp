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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "supnorm/errors.hpp"
#include "supnorm/rates.hpp"

using namespace supnorm;

namespace {

LossRecord record(long n, int rep, double sup, bool flagged = false) {
    LossRecord r;
    r.model = "white-noise";
    r.prior = "uniform";
    r.alpha = 1.0;
    r.n = n;
    r.rep = rep;
    r.sup_loss = sup;
    r.l2_loss = sup / 4;
    r.hellinger_loss = NAN;
    r.q90_sup = 1.5 * sup;
    r.trunc_bias = 0.125;
    r.seed = 1234567890123456789ULL;
    r.flagged = flagged;
    return r;
}

ExperimentConfig tiny_histogram() {
    ExperimentConfig cfg;
    cfg.model = ModelKind::DensityHistogram;
    cfg.prior = DirichletPrior{};
    cfg.alpha = 0.75;
    cfg.n_grid = {256, 1024, 4096};
    cfg.replications = 5;
    cfg.draws = 100;
    cfg.resolution = 10;
    cfg.basis = WaveletKind::Haar;
    return cfg;
}

std::string csv(const std::vector<LossRecord>& recs) {
    std::ostringstream os;
    write_records_csv(os, recs);
    return os.str();
}

}  // namespace

TEST_CASE("target exponent") {
    CHECK(target_exponent(1.0) == doctest::Approx(1.0 / 3));
    CHECK(target_exponent(0.75) == doctest::Approx(0.3));
    CHECK(target_exponent(1e6) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK_THROWS_AS(target_exponent(0.0), DomainError);
    double prev = 0.0;
    for (double a = 0.1; a < 20; a *= 1.3) {
        CHECK(target_exponent(a) > prev);
        CHECK(target_exponent(a) < 0.5);
        prev = target_exponent(a);
    }
}

TEST_CASE("cutoffs") {
    // n / ln n = 4096 at this n
    double n = 4096.0 * 10;
    for (int i = 0; i < 100; ++i) n = 4096.0 * std::log(n);
    const auto c = cutoff(n, 1.0);
    CHECK(c.bandwidth == doctest::Approx(1.0 / 16).epsilon(1e-12));
    CHECK(c.level == 4);
    CHECK(cutoff(3, 1.0).level >= 0);
    CHECK_THROWS_AS(cutoff(2, 1.0), DomainError);
    int prev = 0;
    for (double m = 10; m <= 1e6; m *= 1.1) {
        const int l = cutoff(m, 1.0).level;
        CHECK(l >= prev);
        prev = l;
    }
}

TEST_CASE("rate fits recover exact power laws") {
    std::vector<LossRecord> recs;
    for (long n : {100L, 1000L, 10000L, 100000L}) {
        for (int r = 0; r < 3; ++r) recs.push_back(record(n, r, std::pow(n / std::log(double(n)), -1.0 / 3)));
    }
    const auto fit = fit_rate(recs);
    CHECK(std::abs(fit.slope + 1.0 / 3) < 1e-12);
    CHECK(fit.r_squared == doctest::Approx(1.0));
    CHECK(fit.n_points == 4);
    CHECK(fit.target == doctest::Approx(-1.0 / 3));

    std::vector<LossRecord> pow4;
    for (long n : {100L, 1000L, 10000L}) pow4.push_back(record(n, 0, 2.5 * std::pow(double(n), -0.25)));
    const auto g = fit_rate(pow4, Regressor::LogN);
    CHECK(g.slope == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(g.intercept == doctest::Approx(std::log(2.5)).epsilon(1e-12));

    // scale invariance
    auto scaled = recs;
    for (auto& r : scaled) r.sup_loss *= 7.0;
    const auto h = fit_rate(scaled);
    CHECK(h.slope == doctest::Approx(fit.slope).epsilon(1e-12));
    CHECK(h.intercept == doctest::Approx(fit.intercept + std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("rate fits average before the log and skip flagged rows") {
    std::vector<LossRecord> recs{record(100, 0, 1.0), record(100, 1, 3.0), record(1000, 0, 1.0),
                                 record(10000, 0, 0.5), record(10000, 1, 99.0, true)};
    const auto fit = fit_rate(recs, Regressor::LogN);
    CHECK(fit.excluded_rows == 1);
    const double x0 = std::log(100.0), x2 = std::log(10000.0);
    const double y0 = std::log(2.0), y2 = std::log(0.5);
    CHECK(fit.n_points == 3);
    CHECK(fit.stderr_slope > 0.0);
    CHECK(fit.slope == doctest::Approx((y2 - y0) / (x2 - x0)).epsilon(0.2));

    std::vector<LossRecord> two{record(100, 0, 1.0), record(1000, 0, 0.5)};
    CHECK_THROWS_AS(fit_rate(two), DomainError);
}

TEST_CASE("csv round trip") {
    std::vector<LossRecord> recs{record(256, 0, 0.1234567890123), record(1024, 3, 1e-300, true)};
    recs[1].model = "density-histogram";
    recs[1].hellinger_loss = 0.5;
    recs[1].trunc_bias = NAN;
    std::stringstream ss;
    write_records_csv(ss, recs);
    const auto text = ss.str();
    CHECK(text.rfind(std::string(kRecordCsvHeader) + "\n", 0) == 0);
    const auto back = read_records_csv(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].sup_loss == recs[0].sup_loss);
    CHECK(back[1].sup_loss == recs[1].sup_loss);
    CHECK(std::isnan(back[0].hellinger_loss));
    CHECK(std::isnan(back[1].trunc_bias));
    CHECK(back[1].flagged);
    CHECK(back[0].seed == recs[0].seed);
    std::stringstream again;
    write_records_csv(again, back);
    CHECK(again.str() == text);

    std::stringstream bad_header("model,prior\n");
    CHECK_THROWS_AS(read_records_csv(bad_header), CsvError);
    std::stringstream bad_row(std::string(kRecordCsvHeader) + "\nwhite-noise,uniform,1,abc,0,1,1,nan,1,1,1,ok\n");
    CHECK_THROWS_AS(read_records_csv(bad_row), CsvError);
    std::stringstream short_row(std::string(kRecordCsvHeader) + "\nwhite-noise,uniform,1\n");
    CHECK_THROWS_AS(read_records_csv(short_row), CsvError);
    std::stringstream empty("");
    CHECK_THROWS_AS(read_records_csv(empty), CsvError);
}

TEST_CASE("config validation") {
    auto cfg = tiny_histogram();
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.fit_warnings().empty());
    auto narrow = cfg;
    narrow.n_grid = {256, 1024, 2048};
    narrow.replications = 2;
    CHECK(narrow.fit_warnings().size() == 2);

    auto bad = cfg;
    bad.n_grid = {1000, 500, 2000};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.prior = UniformPrior{};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.model = ModelKind::WhiteNoise;
    bad.prior = UniformPrior{0.5};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.model = ModelKind::DensityLogDensity;
    bad.alpha = 1.0;
    bad.prior = LogDensityPrior{CoefficientLaw::Gaussian, 0.9, 0.0};
    CHECK_THROWS_WITH(bad.validate(), doctest::Contains("r <= alpha - 1/4"));
    bad = cfg;
    bad.replications = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("experiments are deterministic and thread independent") {
    const auto cfg = tiny_histogram();
    const auto a = run_experiment(cfg, 1);
    CHECK(a.size() == 15);
    const auto b = run_experiment(cfg, 3);
    CHECK(csv(a) == csv(b));
    for (const auto& r : a) {
        CHECK(r.sup_loss >= 0.0);
        CHECK(std::isfinite(r.sup_loss));
        CHECK(std::isfinite(r.hellinger_loss));
        CHECK(std::isnan(r.trunc_bias));
    }
    // the truth depends only on the replication
    auto other = cfg;
    other.n_grid = {256, 2048, 4096};
    const auto c = run_experiment(other, 2);
    CHECK(csv({c[0]}) == csv({a[0]}));
    CHECK_FALSE(csv({c[5]}) == csv({a[5]}));
}

TEST_CASE("histogram loss curve decreases") {
    auto cfg = tiny_histogram();
    cfg.n_grid = {1024, 16384, 262144};
    cfg.replications = 5;
    const auto rows = summarize_by_n(run_experiment(cfg, 1));
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].median_sup < rows[0].median_sup);
    CHECK(rows[2].median_sup < rows[1].median_sup);
}

TEST_CASE("white-noise cells") {
    ExperimentConfig cfg;
    cfg.model = ModelKind::WhiteNoise;
    cfg.prior = UniformPrior{2.0};
    cfg.alpha = 1.0;
    cfg.n_grid = {256, 4096, 65536};
    cfg.replications = 2;
    cfg.draws = 20;
    cfg.resolution = 10;
    const auto recs = run_experiment(cfg, 2);
    REQUIRE(recs.size() == 6);
    for (const auto& r : recs) {
        CHECK(std::isnan(r.hellinger_loss));
        CHECK(r.trunc_bias > 0.0);
        CHECK(r.q90_sup >= r.sup_loss * 0.5);
    }
    cfg.prior = ExponentialPowerPrior{1.0};
    CHECK(run_experiment(cfg, 1).size() == 6);
}

TEST_CASE("truncation bias bounds") {
    ProductPriorSpec u;
    u.kind = ProductPriorKind::Uniform;
    u.bound = 2.0;
    u.alpha = 1.0;
    CHECK(truncation_bias_bound(u, 3) == doctest::Approx(2.0 * std::exp2(-4.0) / 0.5));
    ProductPriorSpec e;
    e.kind = ProductPriorKind::ExponentialPower;
    e.alpha = 1.0;
    double direct = 0.0;
    for (int l = 4; l < 200; ++l) direct += std::exp2(-l) / std::sqrt(l + 1.0);
    CHECK(truncation_bias_bound(e, 3) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("summaries") {
    std::vector<LossRecord> recs{record(100, 0, 1.0), record(100, 1, 3.0), record(100, 2, 9.0, true),
                                 record(1000, 0, 0.5)};
    const auto rows = summarize_by_n(recs);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].rows == 3);
    CHECK(rows[0].flagged == 1);
    CHECK(rows[0].mean_sup == 2.0);
    CHECK(rows[0].median_sup == 2.0);
    CHECK(rows[0].trunc_bias == 0.125);
    CHECK(std::isnan(rows[0].mean_hellinger));
}
