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

#include "supnorm/rates.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "supnorm/errors.hpp"
#include "supnorm/random.hpp"

namespace supnorm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double median(std::vector<double> v) {
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return kNaN;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

double target_exponent(double alpha) {
    if (!(alpha > 0.0)) throw DomainError("target_exponent: alpha must be positive");
    return alpha / (2.0 * alpha + 1.0);
}

Cutoff cutoff(double n, double alpha) {
    if (!(n >= 3.0)) throw DomainError("cutoff: n must be at least 3");
    if (!(alpha > 0.0)) throw DomainError("cutoff: alpha must be positive");
    const double h = std::pow(n / std::log(n), -1.0 / (2.0 * alpha + 1.0));
    // tolerance so that exact powers of two are not lost to rounding in pow
    const double l = std::floor(std::log2(1.0 / h) + 1e-9);
    return {h, static_cast<int>(std::max(l, 0.0))};
}

std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::WhiteNoise: return "white-noise";
        case ModelKind::DensityHistogram: return "density-histogram";
        case ModelKind::DensityLogDensity: return "density-logdensity";
    }
    return "unknown";
}

std::optional<ModelKind> parse_model_kind(const std::string& s) {
    if (s == "white-noise") return ModelKind::WhiteNoise;
    if (s == "density-histogram") return ModelKind::DensityHistogram;
    if (s == "density-logdensity") return ModelKind::DensityLogDensity;
    return std::nullopt;
}

std::string prior_name(const PriorSpec& p) {
    return std::visit(Overloaded{
                          [](const UniformPrior&) -> std::string { return "uniform"; },
                          [](const ExponentialPowerPrior&) -> std::string { return "exponential-power"; },
                          [](const DirichletPrior&) -> std::string { return "dirichlet"; },
                          [](const LogDensityPrior& q) -> std::string {
                              switch (q.law) {
                                  case CoefficientLaw::Gaussian: return "gaussian";
                                  case CoefficientLaw::HeavyTail: return "heavy-tail";
                                  case CoefficientLaw::Laplace: return "laplace";
                              }
                              return "unknown";
                          },
                      },
                      p);
}

// ---------------------------------------------------------------------------
// Config

namespace {

ProductPriorSpec product_prior(const ExperimentConfig& cfg, int level) {
    ProductPriorSpec p;
    p.alpha = cfg.alpha;
    p.max_level = level;
    if (const auto* u = std::get_if<UniformPrior>(&cfg.prior)) {
        p.kind = ProductPriorKind::Uniform;
        p.bound = u->bound;
    } else if (const auto* e = std::get_if<ExponentialPowerPrior>(&cfg.prior)) {
        p.kind = ProductPriorKind::ExponentialPower;
        p.delta = e->delta;
    } else {
        throw ConfigError("white-noise model needs a uniform or exponential-power prior");
    }
    return p;
}

HistogramPriorSpec histogram_prior(const ExperimentConfig& cfg, int level) {
    const auto* d = std::get_if<DirichletPrior>(&cfg.prior);
    if (d == nullptr) throw ConfigError("density-histogram model needs a dirichlet prior");
    return d->exponent ? HistogramPriorSpec::scaled(level, d->value, *d->exponent)
                       : HistogramPriorSpec::constant(level, d->value);
}

LogDensityPriorSpec logdensity_prior(const ExperimentConfig& cfg, int level) {
    const auto* q = std::get_if<LogDensityPrior>(&cfg.prior);
    if (q == nullptr) throw ConfigError("density-logdensity model needs a gaussian, heavy-tail or laplace prior");
    LogDensityPriorSpec p;
    p.law = q->law;
    p.alpha = cfg.alpha;
    p.r = q->r;
    p.tau = q->tau;
    p.cutoff = level;
    return p;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (!(radius > 0.0)) throw ConfigError("R must be positive");
    if (n_grid.empty()) throw ConfigError("n_grid must not be empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 3) throw ConfigError("n_grid values must be at least 3");
        if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ConfigError("n_grid must be strictly increasing");
    }
    if (replications < 1) throw ConfigError("replications must be at least 1");
    if (draws < 1) throw ConfigError("draws must be at least 1");
    if (resolution < 4 || resolution > 16) throw ConfigError("resolution J must lie in [4, 16]");
    const int depth = effective_truth_depth();
    if (depth < 0 || depth > resolution - 2) throw ConfigError("truth_depth must lie in [0, J - 2]");
    if (basis == WaveletKind::BoundarySmooth && (basis_order < 2 || basis_order > 6)) {
        throw ConfigError("basis order must lie in [2, 6]");
    }
    const int top_level = cutoff(n_grid.back(), alpha).level;
    switch (model) {
        case ModelKind::WhiteNoise: product_prior(*this, 0).validate(radius); break;
        case ModelKind::DensityHistogram:
            if (top_level > resolution) throw ConfigError("histogram level L_n exceeds the grid resolution");
            histogram_prior(*this, top_level).validate();
            break;
        case ModelKind::DensityLogDensity:
            if (top_level > depth) throw ConfigError("log-density cutoff L_n exceeds the basis depth");
            logdensity_prior(*this, top_level).validate();
            mcmc.validate();
            break;
    }
}

std::vector<std::string> ExperimentConfig::fit_warnings() const {
    std::vector<std::string> w;
    if (n_grid.size() < 3) w.emplace_back("n_grid has fewer than 3 points; fit-rate will refuse it");
    if (!n_grid.empty() && n_grid.back() < 16 * n_grid.front()) w.emplace_back("n_grid spans less than a factor 16");
    if (replications < 5) w.emplace_back("fewer than 5 replications per n");
    return w;
}

// ---------------------------------------------------------------------------
// Experiment

double truncation_bias_bound(const ProductPriorSpec& prior, int level) {
    if (prior.kind == ProductPriorKind::Uniform) {
        const double q = std::exp2(-prior.alpha);
        return prior.bound * std::pow(q, level + 1) / (1.0 - q);
    }
    double total = 0.0;
    for (int l = level + 1; l < level + 100000; ++l) {
        const double term = std::exp2(l * 0.5) * prior.scale(l);
        total += term;
        if (term < 1e-17 * total) break;
    }
    return total;
}

LossRecord run_cell(const ExperimentConfig& cfg, const WaveletBasis& basis, std::size_t n_index, int rep) {
    const int n = cfg.n_grid.at(n_index);
    const Cutoff cut = cutoff(n, cfg.alpha);
    const std::uint64_t row_seed =
        derive_seed(cfg.seed, Stream::Data, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)});
    const HolderTruthSpec truth{cfg.alpha, cfg.radius, derive_seed(cfg.seed, Stream::Truth, {static_cast<std::uint64_t>(rep)}),
                                cfg.truth};

    LossRecord rec;
    rec.model = to_string(cfg.model);
    rec.prior = prior_name(cfg.prior);
    rec.alpha = cfg.alpha;
    rec.n = n;
    rec.rep = rep;
    rec.seed = row_seed;

    LossAccumulator acc;
    switch (cfg.model) {
        case ModelKind::WhiteNoise: {
            const int level = std::min(cut.level + 2, basis.max_level());
            const ProductPriorSpec prior = product_prior(cfg, level);
            const CoefficientTree f0 = holder_truth_coefficients(truth, basis.max_level());
            CoefficientTree high = f0;
            high.scaling() = 0.0;
            for (int l = 0; l <= level; ++l) std::ranges::fill(high.level(l), 0.0);
            const GridFunction f0_high = basis.synthesize(high);
            const CoefficientTree f0_low = f0.resized(level);

            const WhiteNoiseData data = simulate_wn(f0, n, level, row_seed);
            const ProductPosterior post(data, prior);
            auto streams = post.make_streams(row_seed);
            CoefficientTree theta(level);
            const double w = basis.grid().cell_width();
            for (int d = 0; d < cfg.draws; ++d) {
                post.draw(streams, theta);
                theta.scaling() -= f0_low.scaling();
                auto flat = theta.flat();
                const auto truth_flat = f0_low.flat();
                for (std::size_t i = 0; i < flat.size(); ++i) flat[i] -= truth_flat[i];
                const GridFunction diff = basis.synthesize(theta);
                double sup = 0.0;
                double ss = 0.0;
                for (std::size_t i = 0; i < diff.size(); ++i) {
                    const double e = diff[i] - f0_high[i];
                    sup = std::max(sup, std::abs(e));
                    ss += e * e;
                }
                acc.add(sup, std::sqrt(ss * w), kNaN);
            }
            rec.trunc_bias = truncation_bias_bound(prior, level);
            break;
        }
        case ModelKind::DensityHistogram: {
            const GridFunction f0 = make_density_truth({truth}, basis).density;
            const int level = cut.level;
            const Sample sample = sample_data(f0, n, row_seed);
            const HistogramPosterior post = histogram_posterior(histogram_prior(cfg, level), bin_counts(sample, level));
            const HistogramLossEvaluator eval(f0, level);
            Rng rng(derive_seed(row_seed, Stream::Posterior));
            for (int d = 0; d < cfg.draws; ++d) {
                const auto masses = draw_dirichlet(post.concentration, rng);
                const auto [sup, l2, h] = eval.evaluate(masses);
                acc.add(sup, l2, h);
            }
            rec.trunc_bias = kNaN;
            break;
        }
        case ModelKind::DensityLogDensity: {
            const GridFunction f0 = make_density_truth({truth}, basis).density;
            const LogDensityPriorSpec prior = logdensity_prior(cfg, std::min(cut.level, basis.max_level()));
            const Sample sample = sample_data(f0, n, row_seed);
            const McmcChain chain = logdensity_mcmc(prior, sample, basis, cfg.mcmc, row_seed);
            for (const auto& f : chain_densities(chain, basis)) {
                acc.add(sup_distance(f, f0), l2_distance(f, f0), hellinger(f, f0));
            }
            rec.flagged = chain.flagged;
            rec.trunc_bias = kNaN;
            break;
        }
    }
    const LossSummary s = acc.summary();
    rec.sup_loss = s.sup;
    rec.l2_loss = s.l2;
    rec.hellinger_loss = s.hellinger;
    rec.q90_sup = s.q90_sup;
    return rec;
}

std::vector<LossRecord> run_experiment(const ExperimentConfig& cfg, int threads) {
    cfg.validate();
    const WaveletBasis basis =
        WaveletBasis::build(cfg.basis, cfg.effective_truth_depth(), cfg.resolution, cfg.basis_order);
    const std::size_t reps = static_cast<std::size_t>(cfg.replications);
    const std::size_t cells = cfg.n_grid.size() * reps;
    std::vector<LossRecord> out(cells);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells) return;
            try {
                out[i] = run_cell(cfg, basis, i / reps, static_cast<int>(i % reps));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(cells);
                return;
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, cells);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

// ---------------------------------------------------------------------------
// Fitting

std::string to_string(Regressor r) { return r == Regressor::LogN ? "n" : "nlogn"; }

std::optional<Regressor> parse_regressor(const std::string& s) {
    if (s == "nlogn") return Regressor::LogNOverLogN;
    if (s == "n") return Regressor::LogN;
    return std::nullopt;
}

namespace {

double column_value(const LossRecord& r, LossColumn c) {
    switch (c) {
        case LossColumn::Sup: return r.sup_loss;
        case LossColumn::L2: return r.l2_loss;
        case LossColumn::Hellinger: return r.hellinger_loss;
        case LossColumn::Q90Sup: return r.q90_sup;
    }
    return kNaN;
}

}  // namespace

RateFit fit_rate(const std::vector<LossRecord>& records, Regressor regressor, LossColumn column) {
    std::map<long, std::vector<double>> by_n;
    int excluded = 0;
    std::optional<double> alpha;
    for (const auto& r : records) {
        const double v = column_value(r, column);
        if (r.flagged || !std::isfinite(v) || !(v > 0.0)) {
            ++excluded;
            continue;
        }
        by_n[r.n].push_back(v);
        if (!alpha) alpha = r.alpha;
    }
    if (by_n.size() < 3) {
        throw DomainError("fit_rate: need at least 3 distinct n values with usable rows, got " +
                          std::to_string(by_n.size()));
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [n, losses] : by_n) {
        const double nn = static_cast<double>(n);
        if (nn < 3.0) throw DomainError("fit_rate: n must be at least 3");
        xs.push_back(regressor == Regressor::LogN ? std::log(nn) : std::log(nn / std::log(nn)));
        ys.push_back(std::log(mean(losses)));
    }
    const double k = static_cast<double>(xs.size());
    const double mx = mean(xs);
    const double my = mean(ys);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - fit.intercept - fit.slope * xs[i];
        rss += e * e;
    }
    fit.stderr_slope = std::sqrt(rss / (k - 2.0) / sxx);
    fit.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    fit.target = -target_exponent(*alpha);
    fit.regressor = regressor;
    fit.n_points = static_cast<int>(xs.size());
    fit.excluded_rows = excluded;
    return fit;
}

std::vector<LevelSummary> summarize_by_n(const std::vector<LossRecord>& records) {
    struct Bucket {
        std::vector<double> sup, l2, hel, q90, bias;
        int rows = 0;
        int flagged = 0;
    };
    std::map<long, Bucket> by_n;
    for (const auto& r : records) {
        Bucket& b = by_n[r.n];
        ++b.rows;
        if (r.flagged) {
            ++b.flagged;
            continue;
        }
        b.sup.push_back(r.sup_loss);
        b.l2.push_back(r.l2_loss);
        if (std::isfinite(r.hellinger_loss)) b.hel.push_back(r.hellinger_loss);
        b.q90.push_back(r.q90_sup);
        if (std::isfinite(r.trunc_bias)) b.bias.push_back(r.trunc_bias);
    }
    std::vector<LevelSummary> out;
    for (const auto& [n, b] : by_n) {
        LevelSummary s;
        s.n = n;
        s.rows = b.rows;
        s.flagged = b.flagged;
        s.mean_sup = mean(b.sup);
        s.median_sup = median(b.sup);
        s.mean_l2 = mean(b.l2);
        s.median_l2 = median(b.l2);
        s.mean_hellinger = mean(b.hel);
        s.median_hellinger = median(b.hel);
        s.mean_q90 = mean(b.q90);
        s.trunc_bias = mean(b.bias);
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV

const char* const kRecordCsvHeader =
    "model,prior,alpha,n,rep,sup_loss,l2_loss,hellinger_loss,q90_sup,trunc_bias,seed,flag";

namespace {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, std::size_t line, const char* field) {
    if (s == "nan") return kNaN;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
        throw CsvError("line " + std::to_string(line) + ": bad number in " + field + ": '" + s + "'");
    }
    return v;
}

long long parse_integer(const std::string& s, std::size_t line, const char* field) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
        throw CsvError("line " + std::to_string(line) + ": bad integer in " + field + ": '" + s + "'");
    }
    return v;
}

}  // namespace

void write_records_csv(std::ostream& os, const std::vector<LossRecord>& records) {
    os << kRecordCsvHeader << '\n';
    for (const auto& r : records) {
        os << r.model << ',' << r.prior << ',' << format_double(r.alpha) << ',' << r.n << ',' << r.rep << ','
           << format_double(r.sup_loss) << ',' << format_double(r.l2_loss) << ',' << format_double(r.hellinger_loss)
           << ',' << format_double(r.q90_sup) << ',' << format_double(r.trunc_bias) << ',' << r.seed << ','
           << (r.flagged ? "flagged" : "ok") << '\n';
    }
}

std::vector<LossRecord> read_records_csv(std::istream& is) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(is, line)) throw CsvError("empty input: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kRecordCsvHeader) throw CsvError("unexpected header: '" + line + "'");

    std::vector<LossRecord> out;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 12) {
            throw CsvError("line " + std::to_string(line_no) + ": expected 12 fields, got " + std::to_string(f.size()));
        }
        LossRecord r;
        r.model = f[0];
        r.prior = f[1];
        r.alpha = parse_double(f[2], line_no, "alpha");
        r.n = static_cast<long>(parse_integer(f[3], line_no, "n"));
        r.rep = static_cast<int>(parse_integer(f[4], line_no, "rep"));
        r.sup_loss = parse_double(f[5], line_no, "sup_loss");
        r.l2_loss = parse_double(f[6], line_no, "l2_loss");
        r.hellinger_loss = parse_double(f[7], line_no, "hellinger_loss");
        r.q90_sup = parse_double(f[8], line_no, "q90_sup");
        r.trunc_bias = parse_double(f[9], line_no, "trunc_bias");
        errno = 0;
        char* end = nullptr;
        r.seed = std::strtoull(f[10].c_str(), &end, 10);
        if (f[10].empty() || end != f[10].c_str() + f[10].size() || errno == ERANGE) {
            throw CsvError("line " + std::to_string(line_no) + ": bad seed '" + f[10] + "'");
        }
        if (f[11] == "flagged") {
            r.flagged = true;
        } else if (f[11] != "ok") {
            throw CsvError("line " + std::to_string(line_no) + ": flag must be 'ok' or 'flagged'");
        }
        if (!parse_model_kind(r.model)) throw CsvError("line " + std::to_string(line_no) + ": unknown model");
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace supnorm
