#include "modone/montecarlo.hpp"

#include "modone/errors.hpp"
#include "modone/parallel.hpp"
#include "modone/rng.hpp"
#include "modone/version.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace modone {

namespace {

double precision_target() { return PrecisionPolicy{}.target_abs_err; }

bool smooth_kind(const Window& w) {
    return w.kind == Window::Kind::Gaussian || w.kind == Window::Kind::Bump;
}

// point set for one draw, provisioned for the plan's largest N so any prefix
// of it equals the set a shorter run would generate
PointSet draw_points(const ExperimentPlan& plan, int sample, std::uint64_t N) {
    const double alpha = plan.alpha_at(sample);
    const SequenceSpec spec{alpha, plan.beta, N};
    const unsigned bits = required_bits(alpha, plan.reference_n(), precision_target());
    PointSet ps = frac_parts(spec, PrecisionPolicy::fixed_bits(bits), 1);
    if (!(ps.err_bound <= precision_target())) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "draw alpha=%.17g N=%llu certified only %.3g, needs %.3g", alpha,
                      static_cast<unsigned long long>(N), ps.err_bound, precision_target());
        throw PrecisionError(msg);
    }
    return ps;
}

double rk_value(const ExperimentPlan& plan, const PointSet& ps) {
    return k_level_correlation(ps, plan.window, plan.k, 1).value;
}

// the samples-long vector of R_k values the estimators reduce; order is the
// stream order, so every reduction is independent of the thread count
std::vector<double> rk_draws(const ExperimentPlan& plan, std::uint64_t N, int threads) {
    std::vector<double> values(static_cast<std::size_t>(plan.samples));
    if (plan.fixed_points) {
        const PointSet ps = plan.fixed_points->prefix(N);
        const double v = rk_value(plan, ps);
        for (double& slot : values) slot = v;
        return values;
    }
    const ChunkGrid grid{values.size(), 1};
    run_chunks(grid, threads, [&](std::size_t c) {
        const int i = static_cast<int>(c);
        values[c] = rk_value(plan, draw_points(plan, i, N));
    });
    return values;
}

double mean_of(const std::vector<double>& v) {
    long double acc = 0.0L;
    for (double x : v) acc += x;
    return static_cast<double>(acc / static_cast<long double>(v.size()));
}

double stderr_of_mean(const std::vector<double>& v, double mean) {
    long double acc = 0.0L;
    for (double x : v) {
        const long double d = static_cast<long double>(x) - mean;
        acc += d * d;
    }
    const std::size_t n = v.size();
    const long double var = acc / static_cast<long double>(n - 1);
    return static_cast<double>(sqrtl(var / static_cast<long double>(n)));
}

void require_in_grid(const ExperimentPlan& plan, std::uint64_t N) {
    for (std::uint64_t g : plan.N_grid)
        if (g == N) return;
    throw std::domain_error("N is not in the plan's grid");
}

ExpectationEstimate reduce_expectation(const ExperimentPlan& plan, std::uint64_t N,
                                       const std::vector<double>& v) {
    ExpectationEstimate e;
    e.mean = mean_of(v);
    e.std_error = stderr_of_mean(v, e.mean);
    e.reference = c_factor(plan.k, N) * poisson_reference(plan.window);
    return e;
}

VarianceEstimate reduce_variance(const ExperimentPlan& plan, std::uint64_t N,
                                 const std::vector<double>& v) {
    const double ref = c_factor(plan.k, N) * poisson_reference(plan.window);
    std::vector<double> squares(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - ref;
        squares[i] = d * d;
    }
    VarianceEstimate est;
    est.var = mean_of(squares);

    // jackknife over the leave-one-out means of the squares
    const std::size_t n = squares.size();
    long double total = 0.0L;
    for (double y : squares) total += y;
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i)
        loo[i] = static_cast<double>((total - squares[i]) / static_cast<long double>(n - 1));
    const double loo_mean = mean_of(loo);
    long double acc = 0.0L;
    for (double t : loo) {
        const long double d = static_cast<long double>(t) - loo_mean;
        acc += d * d;
    }
    est.std_error = static_cast<double>(
        sqrtl(acc * static_cast<long double>(n - 1) / static_cast<long double>(n)));
    return est;
}

nlohmann::json window_to_json(const Window& w) {
    nlohmann::json j;
    j["dimension"] = w.dimension;
    switch (w.kind) {
        case Window::Kind::Box:
            j["kind"] = "box";
            j["lo"] = w.lo;
            j["hi"] = w.hi;
            break;
        case Window::Kind::Simplex:
            j["kind"] = "simplex";
            j["dilation"] = w.dilation;
            break;
        case Window::Kind::Gaussian:
            j["kind"] = "gaussian";
            j["sigma"] = w.sigma;
            j["radius"] = w.radius;
            break;
        case Window::Kind::Bump:
            j["kind"] = "bump";
            j["radius"] = w.radius;
            j["order"] = w.order;
            break;
    }
    return j;
}

Window window_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const int dim = j.at("dimension").get<int>();
    if (kind == "box")
        return Window::box(j.at("lo").get<std::vector<double>>(),
                           j.at("hi").get<std::vector<double>>());
    if (kind == "simplex") return Window::simplex(j.at("dilation").get<double>(), dim);
    if (kind == "gaussian")
        return Window::gaussian(j.at("sigma").get<double>(), j.at("radius").get<double>(), dim);
    if (kind == "bump")
        return Window::bump(j.at("radius").get<double>(), j.at("order").get<int>(), dim);
    throw IoError("unknown window kind in manifest: " + kind);
}

}  // namespace

void ExperimentPlan::validate() const {
    if (k < 2) throw std::domain_error("plan needs k >= 2");
    J.validate();
    if (N_grid.empty()) throw std::domain_error("plan needs a nonempty N grid");
    for (std::size_t i = 0; i < N_grid.size(); ++i) {
        if (N_grid[i] < 1) throw std::domain_error("grid entries must be positive");
        if (i > 0 && N_grid[i] <= N_grid[i - 1])
            throw std::domain_error("grid must be strictly increasing");
    }
    if (samples < 2) throw std::domain_error("plan needs at least 2 samples");
    window.validate();
    if (window.dimension != k - 1) throw std::domain_error("window dimension must be k - 1");
    if (!(std::isfinite(beta)) || beta == 0.0) throw std::domain_error("beta must be finite nonzero");
    if (!(alpha_span >= 0.0 && alpha_span <= 1.0))
        throw std::domain_error("alpha_span must lie in [0, 1]");
    if (fixed_points && fixed_points->size() < N_grid.back())
        throw std::domain_error("fixed point set is shorter than the largest grid N");
}

std::uint64_t ExperimentPlan::reference_n() const {
    if (N_grid.empty()) throw std::domain_error("plan has no N grid");
    return N_grid.back();
}

double ExperimentPlan::alpha_at(int sample) const {
    if (sample < 0) throw std::domain_error("sample index must be nonnegative");
    const CounterRng rng{seed};
    return J.lo() + alpha_span * rng.uniform(static_cast<std::uint64_t>(sample));
}

ExpectationEstimate expectation_estimate(const ExperimentPlan& plan, std::uint64_t N,
                                         int threads) {
    plan.validate();
    require_in_grid(plan, N);
    return reduce_expectation(plan, N, rk_draws(plan, N, threads));
}

VarianceEstimate variance_estimate(const ExperimentPlan& plan, std::uint64_t N, int threads) {
    plan.validate();
    require_in_grid(plan, N);
    if (!plan.fixed_points && !smooth_kind(plan.window))
        throw std::domain_error("variance runs need a gaussian or bump window");
    return reduce_variance(plan, N, rk_draws(plan, N, threads));
}

DecayFit decay_fit(const std::vector<std::pair<std::uint64_t, double>>& pairs) {
    if (pairs.size() < 3) throw std::domain_error("decay fit needs at least 3 points");
    const std::size_t n = pairs.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (pairs[i].first < 1) throw std::domain_error("decay fit needs positive N");
        if (!(pairs[i].second > 0.0) || !std::isfinite(pairs[i].second))
            throw std::domain_error("decay fit needs positive finite variances");
        xs[i] = std::log(static_cast<double>(pairs[i].first));
        ys[i] = std::log(pairs[i].second);
    }
    const double xbar = mean_of(xs), ybar = mean_of(ys);
    long double sxx = 0.0L, sxy = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const long double dx = static_cast<long double>(xs[i]) - xbar;
        const long double dy = static_cast<long double>(ys[i]) - ybar;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    if (sxx == 0.0L) throw std::domain_error("decay fit needs at least two distinct N");
    const double slope = static_cast<double>(sxy / sxx);
    DecayFit fit;
    fit.rho_hat = -slope;
    fit.intercept = ybar - slope * xbar;
    fit.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) fit.residuals[i] = ys[i] - (fit.intercept + slope * xs[i]);
    fit.N_grid.resize(n);
    for (std::size_t i = 0; i < n; ++i) fit.N_grid[i] = pairs[i].first;
    return fit;
}

std::vector<std::uint64_t> nm_schedule(double rho, std::uint64_t m_max) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw std::domain_error("schedule needs rho > 0");
    if (m_max < 1) throw std::domain_error("schedule needs m_max >= 1");
    const double expo = 2.0 / rho;
    std::vector<std::uint64_t> out;
    for (std::uint64_t m = 1; m <= m_max; ++m) {
        const double v = std::floor(std::pow(static_cast<double>(m), expo));
        if (!(v < 9.2e18)) throw std::domain_error("schedule entry overflows 64 bits");
        const std::uint64_t n = static_cast<std::uint64_t>(v);
        if (out.empty() || n != out.back()) out.push_back(n);
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentPlan& plan, int threads) {
    plan.validate();
    if (!plan.fixed_points && !smooth_kind(plan.window))
        throw std::domain_error("experiment sweeps need a gaussian or bump window");
    const auto start = std::chrono::steady_clock::now();

    const std::size_t grid_n = plan.N_grid.size();
    const std::size_t n_samples = static_cast<std::size_t>(plan.samples);

    // draws[g * samples + i] = R_k at grid entry g, sample i; each sample
    // generates its point set once at the largest N and prefixes downward
    std::vector<double> draws(grid_n * n_samples);
    if (plan.fixed_points) {
        for (std::size_t g = 0; g < grid_n; ++g) {
            const double v = rk_value(plan, plan.fixed_points->prefix(plan.N_grid[g]));
            for (std::size_t i = 0; i < n_samples; ++i) draws[g * n_samples + i] = v;
        }
    } else {
        const ChunkGrid grid{n_samples, 1};
        run_chunks(grid, threads, [&](std::size_t c) {
            const PointSet full = draw_points(plan, static_cast<int>(c), plan.reference_n());
            for (std::size_t g = 0; g < grid_n; ++g)
                draws[g * n_samples + c] = rk_value(plan, full.prefix(plan.N_grid[g]));
        });
    }

    ExperimentResult result;
    result.plan = plan;
    result.expectation.reserve(grid_n);
    result.variance.reserve(grid_n);
    std::vector<std::pair<std::uint64_t, double>> pairs;
    for (std::size_t g = 0; g < grid_n; ++g) {
        const std::vector<double> v(draws.begin() + g * n_samples,
                                    draws.begin() + (g + 1) * n_samples);
        result.expectation.push_back(reduce_expectation(plan, plan.N_grid[g], v));
        result.variance.push_back(reduce_variance(plan, plan.N_grid[g], v));
        pairs.emplace_back(plan.N_grid[g], result.variance.back().var);
    }

    bool fittable = pairs.size() >= 3;
    for (const auto& p : pairs)
        if (!(p.second > 0.0)) fittable = false;
    if (fittable) result.fit = decay_fit(pairs);

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

void write_variance_csv(const ExperimentResult& result, std::ostream& out) {
    out << "n,variance,stderr\n";
    char buf[128];
    for (std::size_t g = 0; g < result.plan.N_grid.size(); ++g) {
        std::snprintf(buf, sizeof(buf), "%llu,%.17g,%.17g\n",
                      static_cast<unsigned long long>(result.plan.N_grid[g]),
                      result.variance[g].var, result.variance[g].std_error);
        out << buf;
    }
}

void write_experiment_json(const ExperimentResult& result, std::ostream& out) {
    const ExperimentPlan& plan = result.plan;
    nlohmann::json j;
    j["version"] = version();
    nlohmann::json p;
    p["k"] = plan.k;
    p["A"] = plan.J.A;
    p["n_grid"] = plan.N_grid;
    p["samples"] = plan.samples;
    p["seed"] = plan.seed;
    p["beta"] = plan.beta;
    p["alpha_span"] = plan.alpha_span;
    p["window"] = window_to_json(plan.window);
    p["precision_target"] = precision_target();
    p["precision_reference_n"] = plan.reference_n();
    p["external_points"] = static_cast<bool>(plan.fixed_points);
    j["plan"] = p;

    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t g = 0; g < plan.N_grid.size(); ++g) {
        nlohmann::json row;
        row["n"] = plan.N_grid[g];
        if (g < result.expectation.size()) {
            row["mean"] = result.expectation[g].mean;
            row["std_error"] = result.expectation[g].std_error;
            row["reference"] = result.expectation[g].reference;
        }
        if (g < result.variance.size()) {
            row["variance"] = result.variance[g].var;
            row["variance_std_error"] = result.variance[g].std_error;
        }
        rows.push_back(row);
    }
    j["estimates"] = rows;

    if (!result.fit.N_grid.empty()) {
        nlohmann::json f;
        f["rho_hat"] = result.fit.rho_hat;
        f["intercept"] = result.fit.intercept;
        f["residuals"] = result.fit.residuals;
        f["n_grid"] = result.fit.N_grid;
        j["fit"] = f;
    } else {
        j["fit"] = nullptr;
    }
    j["wall_seconds"] = result.wall_seconds;
    out << j.dump(2) << "\n";
}

ExperimentPlan read_plan_json(std::istream& in) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("manifest parse failure: ") + e.what());
    }
    const nlohmann::json& p = j.contains("plan") ? j.at("plan") : j;
    try {
        ExperimentPlan plan;
        plan.k = p.at("k").get<int>();
        plan.J = AlphaInterval{p.at("A").get<double>()};
        plan.N_grid = p.at("n_grid").get<std::vector<std::uint64_t>>();
        plan.samples = p.at("samples").get<int>();
        plan.seed = p.at("seed").get<std::uint64_t>();
        plan.beta = p.at("beta").get<double>();
        plan.alpha_span = p.value("alpha_span", 1.0);
        plan.window = window_from_json(p.at("window"));
        plan.validate();
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("manifest is missing plan fields: ") + e.what());
    }
}

}
