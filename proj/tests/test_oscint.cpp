#include "doctest.h"

#include "modone/errors.hpp"
#include "modone/oscint.hpp"
#include "modone/rng.hpp"

#include "json.hpp"

#include <cmath>
#include <complex>
#include <set>
#include <sstream>
#include <vector>

using namespace modone;

namespace {

constexpr double kTau = 6.2831853071795864769;

// the four-term phase behind the derivative-curve picture: n(x1^a - x2^a) -
// m(y1^a - y2^a) with n=5135, m=10000, x=(10000,1000), y=(9500,7890)
PhaseSpec curve_phase() {
    return canonicalize({5135.0, -5135.0, -10000.0, 10000.0},
                        {10000.0, 1000.0, 9500.0, 7890.0})
        .first;
}

// composite Simpson reference for integrals of e(phi) over [a, b]
template <class Phi>
std::complex<double> simpson_reference(Phi phi, double a, double b, int n) {
    const double h = (b - a) / n;
    double re = 0.0, im = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        const double p = phi(a + i * h);
        const double fr = p - std::floor(p);
        re += w * std::cos(kTau * fr);
        im += w * std::sin(kTau * fr);
    }
    return {re * h / 3.0, im * h / 3.0};
}

}  // namespace

TEST_CASE("phase evaluation covers the hand examples and the exact cancellations") {
    PhaseSpec single;
    single.u = {1.0};
    single.x = {2.0};
    single.canonical = true;
    CHECK(phase_eval(single, 1.0, 1) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));
    CHECK(phase_eval(single, 1000.0, 0) == std::ldexp(1.0, 1000));

    PhaseSpec several;
    several.u = {0.3, -1.2, 4.5};
    several.x = {2.0, 5.0, 9.0};
    several.canonical = true;
    CHECK(phase_eval(several, 0.0, 0) == doctest::Approx(3.6).epsilon(1e-15));

    const PhaseSpec cancelled = canonicalize({1.0, -1.0}, {3.0, 3.0}).first;
    CHECK(cancelled.d() == 0);
    CHECK(phase_eval(cancelled, 2.7, 0) == 0.0);
    CHECK(phase_eval(cancelled, 2.7, 3) == 0.0);

    PhaseSpec quad;
    quad.u = {1.0};
    quad.x = {4.0};
    quad.canonical = true;
    const double lg = std::log(4.0);
    CHECK(phase_eval(quad, 0.5, 2) == doctest::Approx(lg * lg * 2.0).epsilon(1e-14));
    CHECK_THROWS_AS(phase_eval(single, 1.0, -1), std::domain_error);
}

TEST_CASE("canonicalization merges bases, drops constants, and reports degeneracy") {
    const auto [zero, deg4] = canonicalize({5.0, -5.0, 3.0, -3.0}, {7.0, 7.0, 4.0, 4.0});
    CHECK(zero.d() == 0);
    CHECK(deg4 == 4);
    CHECK(zero.canonical);

    const auto [merged, deg2] = canonicalize({2.0, -1.0, -1.0}, {5.0, 5.0, 1.0});
    CHECK(merged.u == std::vector<double>{1.0});
    CHECK(merged.x == std::vector<double>{5.0});
    CHECK(deg2 == 2);

    const auto [same, deg0] = canonicalize({1.5, -2.0}, {3.0, 8.0});
    CHECK(same.u == std::vector<double>{1.5, -2.0});
    CHECK(same.x == std::vector<double>{3.0, 8.0});
    CHECK(deg0 == 0);

    const auto [pruned, deg1] = canonicalize({0.0, 1.0}, {4.0, 6.0});
    CHECK(pruned.u == std::vector<double>{1.0});
    CHECK(pruned.x == std::vector<double>{6.0});
    CHECK(deg1 == 1);

    CHECK_THROWS_AS(canonicalize({1.0}, {1.5}), std::domain_error);
    CHECK_THROWS_AS(canonicalize({1.0}, {0.5}), std::domain_error);
    CHECK_THROWS_AS(canonicalize({1.0, 2.0}, {3.0}), std::domain_error);
}

TEST_CASE("non-canonical phases are rejected where canonical form is required") {
    PhaseSpec raw;
    raw.u = {1.0, 2.0};
    raw.x = {2.0, 3.0};
    CHECK_THROWS_AS(raw.require_canonical(), std::domain_error);
    raw.canonical = true;
    CHECK_NOTHROW(raw.require_canonical());
    raw.x = {3.0, 2.0};
    CHECK_THROWS_AS(raw.require_canonical(), std::domain_error);
    raw.x = {2.0, 3.0};
    raw.u = {0.0, 2.0};
    CHECK_THROWS_AS(raw.require_canonical(), std::domain_error);
}

TEST_CASE("maximum derivative function picks the dominating order") {
    PhaseSpec p;
    p.u = {1.0};
    p.x = {2.0};
    p.canonical = true;
    CHECK(m_function(p, 1.0, 2) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));
    CHECK(m_function(p, 1.0, 1) == doctest::Approx(std::fabs(phase_eval(p, 1.0, 1))).epsilon(1e-16));

    const PhaseSpec empty = canonicalize(std::vector<double>{}, std::vector<double>{}).first;
    CHECK(m_function(empty, 3.0, 4) == 0.0);
    CHECK_THROWS_AS(m_function(p, 1.0, 0), std::domain_error);
}

TEST_CASE("inverse power-matrix entries reproduce the two-by-two case exactly") {
    const std::vector<double> L{1.0, 2.0};
    CHECK(vandermonde_inverse_entry(L, 1, 1) == 2.0);
    CHECK(vandermonde_inverse_entry(L, 1, 2) == -1.0);
    CHECK(vandermonde_inverse_entry(L, 2, 1) == -0.5);
    CHECK(vandermonde_inverse_entry(L, 2, 2) == 0.5);

    CHECK(vandermonde_inverse_entry({4.0}, 1, 1) == 0.25);

    CHECK_THROWS_AS(vandermonde_inverse_entry({1.0, 1.0}, 1, 1), std::domain_error);
    CHECK_THROWS_AS(vandermonde_inverse_entry({0.0, 1.0}, 1, 1), std::domain_error);
    CHECK_THROWS_AS(vandermonde_inverse_entry(L, 0, 1), std::domain_error);
    CHECK_THROWS_AS(vandermonde_inverse_entry(L, 1, 3), std::domain_error);
}

TEST_CASE("inverse entries cancel the power matrix to ten digits through dimension six") {
    const CounterRng rng{971};
    std::uint64_t idx = 0;
    for (int d = 2; d <= 6; ++d) {
        for (int rep = 0; rep < 30; ++rep) {
            std::vector<double> L;
            while (static_cast<int>(L.size()) < d) {
                double cand;
                if (d <= 3) {
                    cand = -3.0 + 6.0 * rng.uniform(idx++);
                    if (std::fabs(cand) < 0.15) continue;
                } else {
                    cand = 0.3 + 1.0 * rng.uniform(idx++);
                }
                bool ok = true;
                for (double prev : L)
                    if (std::fabs(prev - cand) < 0.1) ok = false;
                if (ok) L.push_back(cand);
            }
            double worst = 0.0;
            for (int r = 1; r <= d; ++r)
                for (int c = 1; c <= d; ++c) {
                    long double acc = 0.0L;
                    for (int m = 1; m <= d; ++m)
                        acc += powl(static_cast<long double>(L[m - 1]), r) *
                               static_cast<long double>(vandermonde_inverse_entry(L, m, c));
                    const double target = (r == c) ? 1.0 : 0.0;
                    worst = std::max(worst, std::fabs(static_cast<double>(acc) - target));
                }
            REQUIRE(worst <= 1e-10);
        }
    }
}

TEST_CASE("derivative stacks equal the power matrix applied to the weighted terms") {
    const PhaseSpec p = canonicalize({1.3, -0.7, 2.1}, {2.0, 5.0, 11.0}).first;
    const double alpha = 1.7;
    for (int k = 1; k <= 3; ++k) {
        long double acc = 0.0L;
        for (int i = 0; i < p.d(); ++i) {
            const long double lg = logl(static_cast<long double>(p.x[i]));
            acc += powl(lg, k) * static_cast<long double>(p.u[i]) *
                   powl(static_cast<long double>(p.x[i]), alpha);
        }
        CHECK(phase_eval(p, alpha, k) ==
              doctest::Approx(static_cast<double>(acc)).epsilon(1e-10));
    }
}

TEST_CASE("repulsion bound hits its closed-form examples") {
    const PhaseSpec p = canonicalize({3.0, -7.0}, {10.0, 100.0}).first;
    CHECK(repulsion_lambda(p, AlphaInterval{7.0}, 100.0, 0.0) == 6.3e14);

    const PhaseSpec q = canonicalize({1.0, 1.0}, {2.0, 3.0}).first;
    CHECK(repulsion_lambda(q, AlphaInterval{1.0}, 3.0, 0.0) == 1.0);
    CHECK(repulsion_lambda(q, AlphaInterval{1.0}, 3.0, 1.0) ==
          repulsion_lambda(q, AlphaInterval{1.0}, 3.0, 0.0) / 3.0);

    PhaseSpec single;
    single.u = {1.0};
    single.x = {2.0};
    single.canonical = true;
    CHECK_THROWS_AS(repulsion_lambda(single, AlphaInterval{1.0}, 10.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(repulsion_lambda(q, AlphaInterval{1.0}, 2.5, 0.0), std::domain_error);
}

TEST_CASE("zero counting resolves the sign-definite and the exactly-crossing cases") {
    const PhaseSpec neg = canonicalize({1.0, -1.0}, {2.0, 3.0}).first;
    CHECK(count_zeros(neg, 0, AlphaInterval{7.0}) == 0);

    PhaseSpec single;
    single.u = {4.2};
    single.x = {5.0};
    single.canonical = true;
    for (int order : {0, 1, 5}) CHECK(count_zeros(single, order, AlphaInterval{2.0}) == 0);

    // 2^a - 4^a vanishes only at a = 0, sitting exactly on the left endpoint
    const PhaseSpec endpoint = canonicalize({1.0, -1.0}, {2.0, 4.0}).first;
    const std::vector<double> at_zero = zero_locations(endpoint, 0, AlphaInterval{0.0});
    REQUIRE(at_zero.size() == 1);
    CHECK(at_zero[0] == 0.0);

    // 2*2^a - 4^a vanishes only at a = 1
    const PhaseSpec interior = canonicalize({2.0, -1.0}, {2.0, 4.0}).first;
    const std::vector<double> at_one = zero_locations(interior, 0, AlphaInterval{0.5});
    REQUIRE(at_one.size() == 1);
    CHECK(at_one[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("derivative curves of the four-term showcase phase cross where computed") {
    const PhaseSpec p = curve_phase();
    REQUIRE(p.d() == 4);
    CHECK(p.x == std::vector<double>{1000.0, 7890.0, 9500.0, 10000.0});
    CHECK(p.u == std::vector<double>{-5135.0, 10000.0, -10000.0, 5135.0});

    const AlphaInterval J{7.5};
    CHECK(count_zeros(p, 1, J) == 0);
    CHECK(count_zeros(p, 2, J) == 2);
    CHECK(count_zeros(p, 3, J) == 2);
    CHECK(count_zeros(p, 4, J) == 2);

    const std::vector<double> z2 = zero_locations(p, 2, J);
    const std::vector<double> z3 = zero_locations(p, 3, J);
    const std::vector<double> z4 = zero_locations(p, 4, J);
    REQUIRE(z2.size() == 2);
    REQUIRE(z3.size() == 2);
    REQUIRE(z4.size() == 2);
    CHECK(z2[0] == doctest::Approx(8.004).epsilon(5e-3));
    CHECK(z2[1] == doctest::Approx(8.038).epsilon(5e-3));
    CHECK(z3[0] == doctest::Approx(7.800).epsilon(5e-3));
    CHECK(z3[1] == doctest::Approx(8.022).epsilon(5e-3));
    CHECK(z4[0] == doctest::Approx(7.646).epsilon(5e-3));
    CHECK(z4[1] == doctest::Approx(7.958).epsilon(5e-3));
}

TEST_CASE("zero counts never exceed the term count minus one") {
    const CounterRng rng{4242};
    std::uint64_t idx = 0;
    for (int rep = 0; rep < 400; ++rep) {
        const int d = 2 + static_cast<int>(rng.uniform(idx++) * 4.0);
        std::set<double> bases;
        while (static_cast<int>(bases.size()) < d)
            bases.insert(2.0 + std::floor(rng.uniform(idx++) * 39.0));
        std::vector<double> u, x;
        for (double b : bases) {
            const double mag = 0.5 + 2.5 * rng.uniform(idx++);
            u.push_back(rng.uniform(idx++) < 0.5 ? -mag : mag);
            x.push_back(b);
        }
        const PhaseSpec p = canonicalize(u, x).first;
        const AlphaInterval J{0.5 + 3.0 * rng.uniform(idx++)};
        for (int order : {0, 1, 3}) {
            const int zeros = count_zeros(p, order, J);
            REQUIRE(zeros <= p.d() - 1);
        }
    }
}

TEST_CASE("oscillatory integral handles the empty and constant phases exactly") {
    const IntegralResult unit = oscillatory_integral(PhaseSpec{}, AlphaInterval{3.0}, 1e-10);
    CHECK(unit.value.real() == 1.0);
    CHECK(unit.value.imag() == 0.0);
    CHECK(unit.panels == 0);

    PhaseSpec constant;
    constant.u = {0.3};
    constant.x = {1.0};
    const IntegralResult rot = oscillatory_integral(constant, AlphaInterval{3.0}, 1e-10);
    CHECK(rot.value.real() == doctest::Approx(std::cos(kTau * 0.3)).epsilon(1e-14));
    CHECK(rot.value.imag() == doctest::Approx(std::sin(kTau * 0.3)).epsilon(1e-14));
    CHECK(std::abs(rot.value) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("oscillatory integral agrees with oversampled references") {
    PhaseSpec p;
    p.u = {1.0};
    p.x = {2.0};
    const IntegralResult slow = oscillatory_integral(p, AlphaInterval{0.0}, 1e-10);
    const std::complex<double> ref =
        simpson_reference([](double a) { return std::pow(2.0, a); }, 0.0, 1.0, 400000);
    CHECK(slow.value.real() == doctest::Approx(ref.real()).epsilon(1e-10));
    CHECK(slow.value.imag() == doctest::Approx(ref.imag()).epsilon(1e-10));
    CHECK(slow.err_estimate <= 1e-10);
    CHECK(slow.panels > 0);

    PhaseSpec q;
    q.u = {3.0, -2.0};
    q.x = {2.0, 5.0};
    const IntegralResult fast = oscillatory_integral(q, AlphaInterval{2.0}, 1e-9);
    const std::complex<double> qref = simpson_reference(
        [](double a) { return 3.0 * std::pow(2.0, a) - 2.0 * std::pow(5.0, a); }, 2.0, 3.0,
        2000000);
    CHECK(fast.value.real() == doctest::Approx(qref.real()).epsilon(5e-9).scale(1.0));
    CHECK(fast.value.imag() == doctest::Approx(qref.imag()).epsilon(5e-9).scale(1.0));

    const IntegralResult again = oscillatory_integral(q, AlphaInterval{2.0}, 1e-9);
    CHECK(again.value.real() == fast.value.real());
    CHECK(again.value.imag() == fast.value.imag());
    CHECK(again.panels == fast.panels);
}

TEST_CASE("oscillatory integral modulus never exceeds the interval length") {
    const CounterRng rng{77};
    std::uint64_t idx = 0;
    for (int rep = 0; rep < 20; ++rep) {
        std::set<double> bases;
        while (bases.size() < 2) bases.insert(2.0 + std::floor(rng.uniform(idx++) * 8.0));
        std::vector<double> u, x;
        for (double b : bases) {
            const double mag = 0.5 + 1.5 * rng.uniform(idx++);
            u.push_back(rng.uniform(idx++) < 0.5 ? -mag : mag);
            x.push_back(b);
        }
        const PhaseSpec p = canonicalize(u, x).first;
        const double tol = 1e-9;
        const IntegralResult r =
            oscillatory_integral(p, AlphaInterval{0.5 + 1.5 * rng.uniform(idx++)}, tol);
        REQUIRE(std::abs(r.value) <= 1.0 + tol);
        REQUIRE(r.err_estimate <= tol);
    }
}

TEST_CASE("oscillatory integral stops at the panel budget") {
    PhaseSpec p;
    p.u = {1e7};
    p.x = {2.0};
    CHECK_THROWS_AS(oscillatory_integral(p, AlphaInterval{2.0}, 1e-9, 100000), BudgetError);
    CHECK_THROWS_AS(oscillatory_integral(p, AlphaInterval{2.0}, 0.0), std::domain_error);
}

TEST_CASE("repulsion report bound-checks the fast phase and integrates the slow one") {
    const PhaseSpec fast = canonicalize({3.0, -7.0}, {10.0, 100.0}).first;
    const RepulsionReport rf = vdc_check(fast, AlphaInterval{7.0}, 100.0, 0.0, 101);
    CHECK(rf.lambda == 6.3e14);
    CHECK(rf.vdc_bound_value == doctest::Approx(std::pow(6.3e14, -0.5)).epsilon(1e-12));
    CHECK_FALSE(rf.integral_known);
    CHECK_FALSE(rf.consistent);
    CHECK(std::isnan(rf.integral_abs));
    CHECK(rf.min_m_d > 0.0);
    CHECK(rf.m_ratio > 0.0);
    CHECK(rf.d == 2);

    const PhaseSpec slow = canonicalize({1.0, -1.0}, {2.0, 3.0}).first;
    const RepulsionReport rs = vdc_check(slow, AlphaInterval{1.5}, 10.0, 0.0, 101, true);
    CHECK(rs.integral_known);
    CHECK(rs.consistent);
    CHECK_FALSE(rs.anomaly);
    CHECK(rs.integral_abs <= 1.0 + 1e-9);
    CHECK(rs.fitted_constant ==
          doctest::Approx(rs.integral_abs * std::pow(rs.lambda, 0.5)).epsilon(1e-12));
    REQUIRE(rs.zero_counts.size() == 2);
    CHECK(rs.zero_counts[0] <= 1);
    CHECK(rs.zero_counts[1] <= 1);

    CHECK_THROWS_AS(vdc_check(slow, AlphaInterval{1.5}, 10.0, 0.0, 1), std::domain_error);
    PhaseSpec single;
    single.u = {1.0};
    single.x = {2.0};
    single.canonical = true;
    CHECK_THROWS_AS(vdc_check(single, AlphaInterval{1.5}, 10.0, 0.0, 64), std::domain_error);
}

TEST_CASE("repulsion reports serialize with null integrals where none was computed") {
    const PhaseSpec fast = canonicalize({3.0, -7.0}, {10.0, 100.0}).first;
    const PhaseSpec slow = canonicalize({1.0, -1.0}, {2.0, 3.0}).first;
    std::vector<RepulsionReport> reports;
    reports.push_back(vdc_check(fast, AlphaInterval{7.0}, 100.0, 0.0, 65));
    reports.push_back(vdc_check(slow, AlphaInterval{1.5}, 10.0, 0.0, 65));
    std::ostringstream out;
    write_repulsion_json(reports, out);
    const nlohmann::json j = nlohmann::json::parse(out.str());
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 2);
    CHECK(j[0]["lambda"].get<double>() == 6.3e14);
    CHECK(j[0]["integral_abs"].is_null());
    CHECK_FALSE(j[0]["integral_known"].get<bool>());
    CHECK(j[1]["integral_known"].get<bool>());
    CHECK(j[1]["u"].size() == 2);
    CHECK(j[1]["vdc_ratio"].get<double>() > 0.0);
}

TEST_CASE("curve table samples the first four derivatives on the requested grid") {
    const PhaseSpec p = curve_phase();
    std::ostringstream out;
    write_phase_curves_csv(p, AlphaInterval{7.5}, 5, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "alpha,d1,d2,d3,d4");
    std::getline(in, line);
    double a = 0, d1 = 0, d2 = 0, d3 = 0, d4 = 0;
    REQUIRE(std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg,%lg", &a, &d1, &d2, &d3, &d4) == 5);
    CHECK(a == 7.5);
    CHECK(d1 == doctest::Approx(phase_eval(p, 7.5, 1)).epsilon(1e-15));
    int rows = 1;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5);
}
