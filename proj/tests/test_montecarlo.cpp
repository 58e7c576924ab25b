#include "doctest.h"

#include "modone/errors.hpp"
#include "modone/montecarlo.hpp"
#include "modone/rng.hpp"
#include "modone/version.hpp"

#include "json.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

using namespace modone;

namespace {

Window unit_mass_gaussian() {
    const double sigma = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);
    return Window::gaussian(sigma, 8.0 * sigma);
}

ExperimentPlan small_plan() {
    ExperimentPlan plan;
    plan.k = 2;
    plan.J = AlphaInterval{8.0};
    plan.N_grid = {256, 512, 1024};
    plan.samples = 16;
    plan.seed = 42;
    plan.window = unit_mass_gaussian();
    return plan;
}

}  // namespace

TEST_CASE("experiment plans reject malformed configurations") {
    ExperimentPlan plan = small_plan();
    CHECK_NOTHROW(plan.validate());

    ExperimentPlan bad = plan;
    bad.k = 1;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);

    bad = plan;
    bad.N_grid = {};
    CHECK_THROWS_AS(bad.validate(), std::domain_error);

    bad = plan;
    bad.N_grid = {256, 256};
    CHECK_THROWS_AS(bad.validate(), std::domain_error);

    bad = plan;
    bad.samples = 1;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);

    bad = plan;
    bad.window = Window::gaussian(1.0, 8.0, 2);
    CHECK_THROWS_AS(bad.validate(), std::domain_error);

    bad = plan;
    bad.alpha_span = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);

    bad = plan;
    bad.fixed_points = std::make_shared<PointSet>(
        pointset_from_values(std::vector<double>(100, 0.5), 0.0));
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("the draw stream is indexed by sample alone") {
    ExperimentPlan plan = small_plan();
    for (int i = 0; i < 8; ++i) {
        const double a = plan.alpha_at(i);
        CHECK(a >= 8.0);
        CHECK(a < 9.0);
    }

    ExperimentPlan doubled = plan;
    doubled.samples = 32;
    for (int i = 0; i < plan.samples; ++i) CHECK(plan.alpha_at(i) == doubled.alpha_at(i));

    ExperimentPlan mass = plan;
    mass.alpha_span = 0.0;
    for (int i = 0; i < 4; ++i) CHECK(mass.alpha_at(i) == 8.0);

    ExperimentPlan reseeded = plan;
    reseeded.seed = 43;
    CHECK(plan.alpha_at(0) != reseeded.alpha_at(0));
}

TEST_CASE("two-sample expectation is the plain average of its two evaluations") {
    ExperimentPlan plan = small_plan();
    plan.samples = 2;
    plan.N_grid = {128, 300};

    const ExpectationEstimate est = expectation_estimate(plan, 300);
    const ExpectationEstimate rerun = expectation_estimate(plan, 300);
    CHECK(est.mean == rerun.mean);
    CHECK(est.std_error == rerun.std_error);

    const double target = PrecisionPolicy{}.target_abs_err;
    std::vector<double> vals;
    for (int i = 0; i < 2; ++i) {
        const double alpha = plan.alpha_at(i);
        const unsigned bits = required_bits(alpha, plan.reference_n(), target);
        const PointSet ps =
            frac_parts({alpha, plan.beta, 300}, PrecisionPolicy::fixed_bits(bits));
        vals.push_back(k_level_correlation(ps, plan.window, 2).value);
    }
    const double avg = static_cast<double>(
        ((static_cast<long double>(vals[0]) + static_cast<long double>(vals[1])) / 2.0L));
    CHECK(est.mean == avg);
    CHECK(est.reference == doctest::Approx(c_factor(2, 300) * poisson_reference(plan.window))
                               .epsilon(1e-16));
}

TEST_CASE("a point-mass draw stream collapses the mean to the single evaluation") {
    ExperimentPlan plan = small_plan();
    plan.alpha_span = 0.0;
    plan.samples = 3;
    plan.N_grid = {200};

    const double target = PrecisionPolicy{}.target_abs_err;
    const unsigned bits = required_bits(8.0, 200, target);
    const PointSet ps = frac_parts({8.0, 1.0, 200}, PrecisionPolicy::fixed_bits(bits));
    const double single = k_level_correlation(ps, plan.window, 2).value;

    const ExpectationEstimate est = expectation_estimate(plan, 200);
    CHECK(est.mean == single);
    CHECK(est.std_error == 0.0);
}

TEST_CASE("the sampled mean of the pair correlation matches its expected value") {
    ExperimentPlan plan;
    plan.k = 2;
    plan.J = AlphaInterval{8.0};
    plan.N_grid = {10000};
    plan.samples = 32;
    plan.seed = 42;
    plan.window = unit_mass_gaussian();

    const ExpectationEstimate est = expectation_estimate(plan, 10000);
    CHECK(est.reference == doctest::Approx(1.0 - 1e-4).epsilon(1e-10));
    CHECK(est.std_error > 0.0);
    CHECK(std::fabs(est.mean - est.reference) <= 3.0 * est.std_error);
}

TEST_CASE("an external point set turns the variance into one exact square") {
    const CounterRng rng{7};
    std::vector<double> vals(300);
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = rng.uniform(i);

    ExperimentPlan plan = small_plan();
    plan.N_grid = {200, 300};
    plan.samples = 5;
    plan.fixed_points = std::make_shared<PointSet>(pointset_from_values(vals, 0.0));

    const double r = k_level_correlation(plan.fixed_points->prefix(300), plan.window, 2).value;
    const double ref = c_factor(2, 300) * poisson_reference(plan.window);
    const double dev = r - ref;

    const VarianceEstimate est = variance_estimate(plan, 300);
    CHECK(est.var == dev * dev);
    CHECK(est.std_error == 0.0);

    const ExpectationEstimate mean_est = expectation_estimate(plan, 300);
    CHECK(mean_est.mean == r);
    CHECK(mean_est.std_error == 0.0);
}

TEST_CASE("variance runs demand a smooth window") {
    ExperimentPlan plan = small_plan();
    plan.window = Window::box1(-0.5, 0.5);
    CHECK_THROWS_AS(variance_estimate(plan, 256), std::domain_error);
    CHECK_THROWS_AS(run_experiment(plan), std::domain_error);
    CHECK_NOTHROW(expectation_estimate(plan, 256));
    CHECK_THROWS_AS(variance_estimate(small_plan(), 999), std::domain_error);
}

TEST_CASE("grid sweeps reproduce the per-N estimators bit for bit") {
    const ExperimentPlan plan = small_plan();
    const ExperimentResult result = run_experiment(plan);
    REQUIRE(result.expectation.size() == 3);
    REQUIRE(result.variance.size() == 3);
    CHECK(result.wall_seconds >= 0.0);

    const ExpectationEstimate e0 = expectation_estimate(plan, 256);
    const VarianceEstimate v1 = variance_estimate(plan, 512);
    const VarianceEstimate v2 = variance_estimate(plan, 1024);
    CHECK(result.expectation[0].mean == e0.mean);
    CHECK(result.expectation[0].std_error == e0.std_error);
    CHECK(result.variance[1].var == v1.var);
    CHECK(result.variance[1].std_error == v1.std_error);
    CHECK(result.variance[2].var == v2.var);

    const ExperimentResult rerun = run_experiment(plan);
    for (int g = 0; g < 3; ++g) {
        CHECK(rerun.variance[g].var == result.variance[g].var);
        CHECK(rerun.expectation[g].mean == result.expectation[g].mean);
    }

    REQUIRE(result.fit.N_grid.size() == 3);
    CHECK(result.fit.rho_hat ==
          decay_fit({{256, result.variance[0].var},
                     {512, result.variance[1].var},
                     {1024, result.variance[2].var}})
              .rho_hat);
}

TEST_CASE("sweeps at doubled thread counts keep identical bits") {
    ExperimentPlan plan = small_plan();
    plan.N_grid = {128, 256};
    plan.samples = 6;
    const ExperimentResult one = run_experiment(plan, 1);
    const ExperimentResult four = run_experiment(plan, 4);
    REQUIRE(one.variance.size() == four.variance.size());
    for (std::size_t g = 0; g < one.variance.size(); ++g) {
        CHECK(one.variance[g].var == four.variance[g].var);
        CHECK(one.expectation[g].mean == four.expectation[g].mean);
    }
}

TEST_CASE("variance decays along the acceptance grid") {
    ExperimentPlan plan;
    plan.k = 2;
    plan.J = AlphaInterval{8.0};
    plan.N_grid = {512, 1024, 2048, 4096};
    plan.samples = 64;
    plan.seed = 42;
    plan.window = unit_mass_gaussian();

    const ExperimentResult result = run_experiment(plan);
    REQUIRE(result.variance.size() == 4);
    for (int g = 0; g < 4; ++g) CHECK(result.variance[g].var > 0.0);
    for (int g = 1; g < 4; ++g) CHECK(result.variance[g].var < result.variance[g - 1].var);
    CHECK(result.fit.rho_hat > 0.0);
}

TEST_CASE("decay fits recover exact power laws") {
    const DecayFit unit = decay_fit({{2, 0.5}, {4, 0.25}, {8, 0.125}, {16, 0.0625}, {32, 0.03125}});
    CHECK(unit.rho_hat == 1.0);
    CHECK(unit.intercept == 0.0);
    for (double r : unit.residuals) CHECK(r == 0.0);
    REQUIRE(unit.N_grid.size() == 5);
    CHECK(unit.N_grid.front() == 2);

    const double c = 3.7;
    std::vector<std::pair<std::uint64_t, double>> pairs;
    for (std::uint64_t n : {3ull, 5ull, 9ull, 17ull, 33ull})
        pairs.emplace_back(n, c / (static_cast<double>(n) * static_cast<double>(n)));
    const DecayFit quad = decay_fit(pairs);
    CHECK(quad.rho_hat == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(quad.intercept == doctest::Approx(std::log(c)).epsilon(1e-12));

    CHECK_THROWS_AS(decay_fit({{2, 0.5}, {4, 0.25}}), std::domain_error);
    CHECK_THROWS_AS(decay_fit({{2, 0.5}, {4, -0.25}, {8, 0.125}}), std::domain_error);
    CHECK_THROWS_AS(decay_fit({{2, 0.5}, {4, 0.0}, {8, 0.125}}), std::domain_error);
}

TEST_CASE("the sampling schedule floors the fractional powers and deduplicates") {
    CHECK(nm_schedule(2.0, 5) == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
    CHECK(nm_schedule(1.0, 4) == std::vector<std::uint64_t>{1, 4, 9, 16});
    CHECK(nm_schedule(0.5, 3) == std::vector<std::uint64_t>{1, 16, 81});
    CHECK(nm_schedule(4.0, 5) == std::vector<std::uint64_t>{1, 2});

    const std::vector<std::uint64_t> dense = nm_schedule(1.0, 200);
    const double last = static_cast<double>(dense.back());
    const double prev = static_cast<double>(dense[dense.size() - 2]);
    CHECK(last / prev < 1.05);

    CHECK_THROWS_AS(nm_schedule(0.0, 5), std::domain_error);
    CHECK_THROWS_AS(nm_schedule(-1.0, 5), std::domain_error);
    CHECK_THROWS_AS(nm_schedule(2.0, 0), std::domain_error);
    CHECK_THROWS_AS(nm_schedule(0.01, 100), std::domain_error);
}

TEST_CASE("experiment manifests round-trip the plan and embed the estimates") {
    ExperimentPlan plan = small_plan();
    plan.N_grid = {128, 256, 512};
    plan.samples = 4;
    const ExperimentResult result = run_experiment(plan);

    std::ostringstream out;
    write_experiment_json(result, out);
    const nlohmann::json j = nlohmann::json::parse(out.str());
    CHECK(j["version"].get<std::string>() == version());
    CHECK(j["plan"]["k"].get<int>() == 2);
    CHECK(j["plan"]["A"].get<double>() == 8.0);
    CHECK(j["plan"]["seed"].get<std::uint64_t>() == 42);
    CHECK(j["plan"]["window"]["kind"].get<std::string>() == "gaussian");
    CHECK(j["plan"]["precision_reference_n"].get<std::uint64_t>() == 512);
    REQUIRE(j["estimates"].size() == 3);
    CHECK(j["estimates"][1]["n"].get<std::uint64_t>() == 256);
    CHECK(j["estimates"][1]["variance"].get<double>() == result.variance[1].var);
    CHECK(j["fit"]["rho_hat"].get<double>() == result.fit.rho_hat);

    std::istringstream in(out.str());
    const ExperimentPlan back = read_plan_json(in);
    CHECK(back.k == plan.k);
    CHECK(back.J.A == plan.J.A);
    CHECK(back.N_grid == plan.N_grid);
    CHECK(back.samples == plan.samples);
    CHECK(back.seed == plan.seed);
    CHECK(back.window.sigma == plan.window.sigma);
    const VarianceEstimate again = variance_estimate(back, 256);
    CHECK(again.var == result.variance[1].var);

    std::istringstream garbage("{not json");
    CHECK_THROWS_AS(read_plan_json(garbage), IoError);
    std::istringstream hollow("{\"plan\": {\"k\": 2}}");
    CHECK_THROWS_AS(read_plan_json(hollow), IoError);
}

TEST_CASE("short grids leave the fit empty and the manifest marks it null") {
    ExperimentPlan plan = small_plan();
    plan.N_grid = {128, 256};
    plan.samples = 4;
    const ExperimentResult result = run_experiment(plan);
    CHECK(result.fit.N_grid.empty());
    std::ostringstream out;
    write_experiment_json(result, out);
    const nlohmann::json j = nlohmann::json::parse(out.str());
    CHECK(j["fit"].is_null());
}

TEST_CASE("variance tables list one row per grid entry") {
    ExperimentPlan plan = small_plan();
    plan.N_grid = {128, 256};
    plan.samples = 4;
    const ExperimentResult result = run_experiment(plan);
    std::ostringstream out;
    write_variance_csv(result, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "n,variance,stderr");
    std::getline(in, line);
    unsigned long long n = 0;
    double var = 0, se = 0;
    REQUIRE(std::sscanf(line.c_str(), "%llu,%lg,%lg", &n, &var, &se) == 3);
    CHECK(n == 128);
    CHECK(var == result.variance[0].var);
    int rows = 1;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);
}
