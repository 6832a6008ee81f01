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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "supnorm/errors.hpp"
#include "supnorm/function_space.hpp"
#include "supnorm/model_wn.hpp"

using namespace supnorm;

namespace {

ProductPriorSpec uniform_prior(int max_level, double alpha = 1.0, double bound = 2.0) {
    ProductPriorSpec p;
    p.kind = ProductPriorKind::Uniform;
    p.bound = bound;
    p.alpha = alpha;
    p.max_level = max_level;
    return p;
}

ProductPriorSpec ep_prior(int max_level, double delta = 1.0, double alpha = 1.0) {
    ProductPriorSpec p;
    p.kind = ProductPriorKind::ExponentialPower;
    p.delta = delta;
    p.alpha = alpha;
    p.max_level = max_level;
    return p;
}

}  // namespace

TEST_CASE("prior scales and validation") {
    const auto u = uniform_prior(5);
    CHECK(u.scale(2) == doctest::Approx(std::exp2(-3.0)));
    CHECK(u.support_half_width() == 2.0);
    CHECK(u.log_phi(2.5) == -INFINITY);
    const auto e = ep_prior(5);
    CHECK(e.scale(3) == doctest::Approx(std::exp2(-4.5) / std::sqrt(4.0)));
    CHECK(std::isinf(e.support_half_width()));
    CHECK_THROWS_AS(u.validate(2.0), ConfigError);
    CHECK_NOTHROW(u.validate(1.0));
    CHECK_THROWS_AS(ep_prior(5, 0.0).validate(1.0), ConfigError);
}

TEST_CASE("white noise data") {
    const auto truth = holder_truth_coefficients({1.0, 1.0, 3, TruthKind::SignedCoefficient}, 6);
    const auto quiet = simulate_wn(truth, 100, 6, 1, NoiseMode::Zero);
    CHECK(quiet.observations == truth);

    const auto a = simulate_wn(truth, 100, 6, 1);
    const auto b = simulate_wn(truth, 100, 6, 1);
    const auto c = simulate_wn(truth, 100, 6, 2);
    CHECK(a.observations == b.observations);
    CHECK_FALSE(a.observations == c.observations);

    const auto shallow = simulate_wn(truth, 100, 3, 1);
    CHECK(shallow.observations.max_level() == 3);
    CHECK(shallow.observations(3, 5) == a.observations(3, 5));

    const int n = 400;
    const int reps = 10000;
    double s2 = 0.0;
    for (int r = 0; r < reps; ++r) {
        const auto d = simulate_wn(truth, n, 0, static_cast<std::uint64_t>(r));
        const double e = d.observations(0, 0) - truth(0, 0);
        s2 += e * e;
    }
    CHECK(s2 / reps == doctest::Approx(1.0 / n).epsilon(0.05));
}

TEST_CASE("coordinate posterior under a wide uniform prior is nearly gaussian") {
    const int n = 10000;
    const auto prior = uniform_prior(2, 1.0, 2.0);
    const double sigma = prior.scale(0);
    const auto zero = CoordPosterior::compute(0.0, 0, prior, n);
    CHECK(std::abs(zero.mean()) < 1e-12);
    for (double x : {0.0, 0.3, -0.7}) {
        const auto post = CoordPosterior::compute(x, 0, prior, n);
        const auto ref = oracle::truncated_normal(x, 1.0 / std::sqrt(n), -2.0 * sigma, 2.0 * sigma);
        CHECK(std::abs(post.mean() - x) < 1e-3 / std::sqrt(n));
        CHECK(post.variance() == doctest::Approx(1.0 / n).epsilon(0.01));
        CHECK(post.mean() == doctest::Approx(ref.mean).epsilon(1e-8));
        CHECK(post.variance() == doctest::Approx(ref.variance).epsilon(1e-6));
    }
}

TEST_CASE("coordinate posterior near the support edge matches the truncated normal") {
    const int n = 256;
    const auto prior = uniform_prior(4);
    for (int level : {2, 3, 4}) {
        const double sigma = prior.scale(level);
        for (double x : {1.9 * sigma, 2.0 * sigma, 2.3 * sigma, -2.1 * sigma}) {
            const auto post = CoordPosterior::compute(x, level, prior, n);
            const auto ref = oracle::truncated_normal(x, 1.0 / std::sqrt(n), -2.0 * sigma, 2.0 * sigma);
            CHECK(post.mean() == doctest::Approx(ref.mean).epsilon(1e-7));
            CHECK(post.variance() == doctest::Approx(ref.variance).epsilon(1e-5));
            CHECK(post.lower() >= -2.0 * sigma);
            CHECK(post.upper() <= 2.0 * sigma);
        }
    }
}

TEST_CASE("exponential-power coordinate posterior matches quadrature") {
    const int n = 1000;
    const auto prior = ep_prior(6, 1.0);
    for (int level : {0, 3, 6}) {
        const double sigma = prior.scale(level);
        for (double x : {0.05, -0.2, 0.01}) {
            auto w = [&](double t) { return std::exp(-0.5 * n * (x - t) * (x - t) - std::pow(std::abs(t) / sigma, 2.0)); };
            const double lo = -1.0, hi = 1.0;
            const double z = oracle::simpson(w, lo, hi, 400000);
            const double m = oracle::simpson([&](double t) { return t * w(t); }, lo, hi, 400000) / z;
            const auto post = CoordPosterior::compute(x, level, prior, n);
            CHECK(post.mean() == doctest::Approx(m).epsilon(1e-6));
        }
    }
}

TEST_CASE("a collapsing prior pulls the posterior to zero") {
    const auto prior = uniform_prior(14);
    REQUIRE(prior.scale(14) * 1.0 <= 1e-6);
    for (double x : {0.5, -2.0, 1e-3}) {
        const auto post = CoordPosterior::compute(x, 14, prior, 1);
        CHECK(std::abs(post.mean()) <= 1e-6 * std::abs(x) + 1e-12);
    }
    const auto ep = ep_prior(14);
    const auto post = CoordPosterior::compute(0.8, 14, ep, 1);
    CHECK(std::abs(post.mean()) <= 1e-6 * 0.8 + 1e-12);
}

TEST_CASE("posterior tables are proper distributions") {
    for (const auto& prior : {uniform_prior(5), ep_prior(5)}) {
        for (int level : {0, 5}) {
            const auto post = CoordPosterior::compute(0.02, level, prior, 500);
            const auto& cdf = post.cdf();
            CHECK(std::is_sorted(cdf.begin(), cdf.end()));
            CHECK(std::abs(cdf.back() - 1.0) < 1e-10);
            CHECK(post.quantile(0.0) >= post.lower());
            CHECK(post.quantile(1.0) <= post.upper());
        }
    }
}

TEST_CASE("coordinate sampling passes a Kolmogorov-Smirnov test") {
    const auto prior = uniform_prior(3);
    const auto post = CoordPosterior::compute(0.24, 2, prior, 400);
    Rng rng(8);
    const int m = 10000;
    std::vector<double> xs(m);
    for (double& v : xs) v = post.sample(rng);
    std::sort(xs.begin(), xs.end());
    const double sigma = prior.scale(2);
    const double s = 1.0 / 20.0;
    const double a = oracle::normal_cdf((-2 * sigma - 0.24) / s);
    const double b = oracle::normal_cdf((2 * sigma - 0.24) / s);
    auto cdf = [&](double t) { return (oracle::normal_cdf((t - 0.24) / s) - a) / (b - a); };
    CHECK(oracle::ks_statistic(xs, cdf) < 1.63 / std::sqrt(m));
}

TEST_CASE("product posterior draws") {
    const auto basis = WaveletBasis::build(WaveletKind::BoundarySmooth, 5, 10);
    const auto truth = holder_truth_coefficients({1.0, 1.0, 5, TruthKind::SignedCoefficient}, 5);

    SUBCASE("a collapsing prior gives the zero function above level 0") {
        // sigma_0 = 1 whatever alpha is, so only levels >= 1 can collapse
        const ProductPriorSpec p = uniform_prior(5, 30.0);
        const auto draws = draw_posterior_function(simulate_wn(truth, 1, 5, 1, NoiseMode::Zero), p, basis, 1, 3);
        REQUIRE(draws.size() == 1);
        const auto high = basis.project_high(draws[0], 0);
        CHECK(std::max(std::abs(high.min()), std::abs(high.max())) < 1e-6);
    }
    SUBCASE("same seeds give the same draws") {
        const auto data = simulate_wn(truth, 1000, 5, 9);
        const auto a = draw_posterior_function(data, uniform_prior(5), basis, 3, 4);
        const auto b = draw_posterior_function(data, uniform_prior(5), basis, 3, 4);
        for (int i = 0; i < 3; ++i) CHECK(sup_distance(a[i], b[i]) == 0.0);
    }
    SUBCASE("the posterior mean is the coordinate means") {
        const auto data = simulate_wn(truth, 1000, 5, 9);
        const ProductPosterior post(data, uniform_prior(5));
        const auto m = post.mean();
        CHECK(m(3, 2) == doctest::Approx(post.coordinate(3, 2).mean()));
        CHECK(m.scaling() == doctest::Approx(post.scaling().mean()));
    }
}

TEST_CASE("sup loss shrinks as n grows") {
    const auto basis = WaveletBasis::build(WaveletKind::BoundarySmooth, 8, 12);
    const HolderTruthSpec spec{1.0, 1.0, 2, TruthKind::SignedCoefficient};
    const auto f0 = make_holder_truth(spec, basis);
    auto median_loss = [&](int n) {
        std::vector<double> losses;
        for (std::uint64_t r = 0; r < 10; ++r) {
            const auto data = simulate_wn(f0, n, basis, 100 + r);
            const auto draws = draw_posterior_function(data, uniform_prior(8), basis, 20, 200 + r);
            double s = 0.0;
            for (const auto& d : draws) s += sup_distance(d, f0);
            losses.push_back(s / draws.size());
        }
        std::sort(losses.begin(), losses.end());
        return 0.5 * (losses[4] + losses[5]);
    };
    CHECK(median_loss(4096) < median_loss(256));
}

TEST_CASE("laplace transform of the posterior") {
    const auto prior = uniform_prior(6);
    const auto truth = holder_truth_coefficients({1.0, 1.0, 5, TruthKind::SignedCoefficient}, 6);
    const auto data = simulate_wn(truth, 1024, 6, 1);
    CHECK(laplace_check(data, prior, 2, 1, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(laplace_check(data, prior, 2, 1, 3.5), DomainError);
    CHECK_THROWS_AS(laplace_check(data, ep_prior(6), 2, 1, 1.0), DomainError);

    // A wide uniform posterior is N(x, 1/n) and the transform is e^{t^2/2}.
    const auto wide = CoordPosterior::compute(0.0, 0, prior, 100000);
    CHECK(wide.laplace(1.5) == doctest::Approx(std::exp(1.125)).epsilon(1e-6));

    // Mirror symmetry of the uniform prior: x -> -x, t -> -t.
    for (double t : {-2.0, 1.0, 2.0}) {
        const double a = laplace_average(0.0, 2, 1, prior, 1024, t, 50, 7, false);
        const double b = laplace_average(0.0, 2, 1, prior, 1024, -t, 50, 7, true);
        CHECK(a == doctest::Approx(b).epsilon(1e-9));
    }
    // Flipped noise at a nonzero truth agrees within Monte Carlo error.
    const double f = truth(3, 2);
    const double a = laplace_average(f, 3, 2, prior, 1024, 1.0, 400, 11, false);
    const double b = laplace_average(f, 3, 2, prior, 1024, 1.0, 400, 11, true);
    CHECK(std::abs(a - b) < 0.15 * std::max(a, b));
}
