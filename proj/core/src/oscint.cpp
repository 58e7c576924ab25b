#include "modone/oscint.hpp"

#include "modone/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace modone {

namespace {

constexpr double kTau = 6.2831853071795864769;

double neumaier_sum(const std::vector<double>& terms) {
    double s = 0.0, comp = 0.0;
    for (double t : terms) {
        const double tmp = s + t;
        comp += std::fabs(s) >= std::fabs(t) ? (s - tmp) + t : (t - tmp) + s;
        s = tmp;
    }
    return s + comp;
}

// E(a) = sum c_i b_i^a; the shape both phase derivatives and their reduced
// forms share during root isolation
struct ExpPoly {
    std::vector<double> c, b;
};

double ep_eval(const ExpPoly& E, double a) {
    double max_bits = 0.0;
    for (double bb : E.b) max_bits = std::max(max_bits, std::fabs(a * std::log2(bb)));
    if (max_bits > 900.0) {
        long double acc = 0.0L;
        for (std::size_t i = 0; i < E.c.size(); ++i)
            acc += static_cast<long double>(E.c[i]) *
                   powl(static_cast<long double>(E.b[i]), static_cast<long double>(a));
        return static_cast<double>(acc);
    }
    std::vector<double> terms(E.c.size());
    for (std::size_t i = 0; i < E.c.size(); ++i) terms[i] = E.c[i] * std::pow(E.b[i], a);
    return neumaier_sum(terms);
}

double checked_eval(const ExpPoly& E, double a) {
    const double v = ep_eval(E, a);
    if (!std::isfinite(v))
        throw ToleranceError("sign undecidable: non-finite phase value during root isolation");
    return v;
}

double bisect_zero(const ExpPoly& E, double a, double b, double fa, double fb) {
    (void)fb;
    while (b - a > 1e-12) {
        const double m = a + 0.5 * (b - a);
        if (m <= a || m >= b) break;
        const double fm = checked_eval(E, m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    if (b - a > 1e-12)
        throw ToleranceError("root interval cannot shrink to width 1e-12");
    return a + 0.5 * (b - a);
}

// Zeros of E on [lo, hi], ascending. Dividing by the smallest exponential
// turns one term into a constant, so the derivative of the quotient has one
// term fewer; its zeros (found recursively) cut [lo, hi] into monotone
// pieces, and each sign change is bisected.
void isolate_zeros(const ExpPoly& E, double lo, double hi, std::vector<double>& out) {
    if (E.c.size() <= 1) return;
    std::size_t imin = 0;
    for (std::size_t i = 1; i < E.b.size(); ++i)
        if (E.b[i] < E.b[imin]) imin = i;
    ExpPoly F;
    F.c = E.c;
    F.b.resize(E.b.size());
    for (std::size_t i = 0; i < E.b.size(); ++i) F.b[i] = E.b[i] / E.b[imin];
    ExpPoly G;
    for (std::size_t i = 0; i < F.b.size(); ++i) {
        if (i == imin) continue;
        G.c.push_back(F.c[i] * std::log(F.b[i]));
        G.b.push_back(F.b[i]);
    }
    std::vector<double> pts{lo};
    isolate_zeros(G, lo, hi, pts);
    pts.push_back(hi);

    double f_prev = checked_eval(F, pts[0]);
    if (f_prev == 0.0) out.push_back(pts[0]);
    for (std::size_t j = 1; j < pts.size(); ++j) {
        const double f_next = checked_eval(F, pts[j]);
        if (f_next == 0.0)
            out.push_back(pts[j]);
        else if (f_prev != 0.0 && (f_prev > 0.0) != (f_next > 0.0))
            out.push_back(bisect_zero(F, pts[j - 1], pts[j], f_prev, f_next));
        f_prev = f_next;
    }
}

struct QNode {
    double t, w;
};

constexpr QNode kGl7[7] = {
    {-9.49107912342758486e-01, 1.29484966168870647e-01},
    {-7.41531185599394460e-01, 2.79705391489276589e-01},
    {-4.05845151377397184e-01, 3.81830050505118312e-01},
    {0.00000000000000000e+00, 4.17959183673468959e-01},
    {4.05845151377397184e-01, 3.81830050505118312e-01},
    {7.41531185599394460e-01, 2.79705391489276589e-01},
    {9.49107912342758486e-01, 1.29484966168870647e-01},
};

constexpr QNode kGl15[15] = {
    {-9.87992518020485377e-01, 3.07532419961186465e-02},
    {-9.37273392400705951e-01, 7.03660474881080689e-02},
    {-8.48206583410427206e-01, 1.07159220467171773e-01},
    {-7.24417731360170070e-01, 1.39570677926153908e-01},
    {-5.70972172608538830e-01, 1.66269205816993781e-01},
    {-3.94151347077563385e-01, 1.86161000015561878e-01},
    {-2.01194093997434514e-01, 1.98431485327111246e-01},
    {0.00000000000000000e+00, 2.02578241925560898e-01},
    {2.01194093997434514e-01, 1.98431485327111246e-01},
    {3.94151347077563385e-01, 1.86161000015561878e-01},
    {5.70972172608538830e-01, 1.66269205816993781e-01},
    {7.24417731360170070e-01, 1.39570677926153908e-01},
    {8.48206583410427206e-01, 1.07159220467171773e-01},
    {9.37273392400705951e-01, 7.03660474881080689e-02},
    {9.87992518020485377e-01, 3.07532419961186465e-02},
};

void check_phase_shape(const PhaseSpec& p) {
    if (p.u.size() != p.x.size())
        throw std::domain_error("phase: coefficient and base counts differ");
    for (double b : p.x)
        if (!(b > 0.0) || !std::isfinite(b))
            throw std::domain_error("phase: bases must be positive and finite");
    for (double c : p.u)
        if (!std::isfinite(c)) throw std::domain_error("phase: coefficients must be finite");
}

}  // namespace

void PhaseSpec::require_canonical() const {
    if (!canonical) throw std::domain_error("phase must be canonicalized first");
    if (u.size() != x.size())
        throw std::domain_error("phase: coefficient and base counts differ");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (u[i] == 0.0 || !std::isfinite(u[i]))
            throw std::domain_error("canonical phase: coefficients must be nonzero");
        if (!(x[i] >= 2.0) || !std::isfinite(x[i]))
            throw std::domain_error("canonical phase: bases must be at least 2");
        if (i > 0 && !(x[i] > x[i - 1]))
            throw std::domain_error("canonical phase: bases must be strictly increasing");
    }
}

void AlphaInterval::validate() const {
    if (!(A >= 0.0) || !std::isfinite(A))
        throw std::domain_error("interval left endpoint must be non-negative and finite");
}

double phase_eval(const PhaseSpec& phase, double alpha, int order) {
    if (order < 0) throw std::domain_error("derivative order must be non-negative");
    if (!std::isfinite(alpha)) throw std::domain_error("alpha must be finite");
    check_phase_shape(phase);
    double max_bits = 0.0;
    for (double b : phase.x) max_bits = std::max(max_bits, std::fabs(alpha * std::log2(b)));
    if (max_bits > 900.0) {
        long double acc = 0.0L;
        for (std::size_t i = 0; i < phase.u.size(); ++i) {
            const long double lg = logl(static_cast<long double>(phase.x[i]));
            acc += static_cast<long double>(phase.u[i]) * powl(lg, static_cast<long double>(order)) *
                   powl(static_cast<long double>(phase.x[i]), static_cast<long double>(alpha));
        }
        return static_cast<double>(acc);
    }
    std::vector<double> terms(phase.u.size());
    for (std::size_t i = 0; i < phase.u.size(); ++i)
        terms[i] = phase.u[i] * std::pow(std::log(phase.x[i]), static_cast<double>(order)) *
                   std::pow(phase.x[i], alpha);
    return neumaier_sum(terms);
}

std::pair<PhaseSpec, int> canonicalize(const std::vector<double>& u, const std::vector<double>& x) {
    if (u.size() != x.size())
        throw std::domain_error("phase: coefficient and base counts differ");
    std::vector<std::pair<double, double>> terms;   // (base, coefficient)
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!std::isfinite(u[i]) || !std::isfinite(x[i]))
            throw std::domain_error("phase: entries must be finite");
        if (!(x[i] > 0.0)) throw std::domain_error("phase: bases must be positive");
        if (x[i] != 1.0 && x[i] < 2.0)
            throw std::domain_error("phase: bases must be 1 or at least 2");
        if (x[i] == 1.0) continue;      // constants never change |I|
        terms.emplace_back(x[i], u[i]);
    }
    std::sort(terms.begin(), terms.end());
    PhaseSpec out;
    out.canonical = true;
    for (std::size_t i = 0; i < terms.size();) {
        double coeff = 0.0;
        const double base = terms[i].first;
        for (; i < terms.size() && terms[i].first == base; ++i) coeff += terms[i].second;
        if (coeff == 0.0) continue;
        out.u.push_back(coeff);
        out.x.push_back(base);
    }
    return {std::move(out), static_cast<int>(u.size()) - out.d()};
}

double m_function(const PhaseSpec& phase, double alpha, int d) {
    phase.require_canonical();
    if (d < 1) throw std::domain_error("derivative count must be at least 1");
    double m = 0.0;
    for (int i = 1; i <= d; ++i) m = std::max(m, std::fabs(phase_eval(phase, alpha, i)));
    return m;
}

double vandermonde_inverse_entry(const std::vector<double>& L, int i, int j) {
    const int d = static_cast<int>(L.size());
    if (d < 1) throw std::domain_error("empty node list");
    if (i < 1 || i > d || j < 1 || j > d)
        throw std::domain_error("matrix indices are 1-based and bounded by the dimension");
    const double li = L[i - 1];
    if (li == 0.0) throw std::domain_error("singular system: node at zero");
    __float128 denom = li;
    for (int m = 0; m < d; ++m) {
        if (m == i - 1) continue;
        if (L[m] == li) throw std::domain_error("singular system: repeated node");
        denom *= static_cast<__float128>(L[m]) - static_cast<__float128>(li);
    }
    // elementary symmetric sums of the nodes omitting L_i
    std::vector<__float128> e(static_cast<std::size_t>(d), 0);
    e[0] = 1;
    int used = 0;
    for (int m = 0; m < d; ++m) {
        if (m == i - 1) continue;
        ++used;
        for (int k = std::min(used, d - 1); k >= 1; --k)
            e[k] += e[k - 1] * static_cast<__float128>(L[m]);
    }
    __float128 val = e[static_cast<std::size_t>(d - j)] / denom;
    if ((j - 1) % 2 != 0) val = -val;
    return static_cast<double>(val);
}

double repulsion_lambda(const PhaseSpec& phase, const AlphaInterval& J, double N, double epsilon) {
    phase.require_canonical();
    J.validate();
    const int d = phase.d();
    if (d < 2) throw std::domain_error("repulsion bound needs at least two terms");
    if (!std::isfinite(N) || !(N >= phase.x.back()))
        throw std::domain_error("bases must lie in [2, N]");
    if (!std::isfinite(epsilon)) throw std::domain_error("epsilon must be finite");
    double v = std::fabs(phase.u.back()) * std::pow(phase.x.back(), J.A + 1.0 - d);
    for (int m = 0; m + 1 < d; ++m) v *= phase.x[m + 1] - phase.x[m];
    return v / std::pow(N, epsilon);
}

std::vector<double> zero_locations(const PhaseSpec& phase, int order, const AlphaInterval& J) {
    phase.require_canonical();
    if (phase.d() < 1) throw std::domain_error("phase must have at least one term");
    if (order < 0) throw std::domain_error("derivative order must be non-negative");
    J.validate();
    ExpPoly E;
    for (int i = 0; i < phase.d(); ++i) {
        E.c.push_back(phase.u[i] * std::pow(std::log(phase.x[i]), static_cast<double>(order)));
        E.b.push_back(phase.x[i]);
    }
    std::vector<double> out;
    isolate_zeros(E, J.lo(), J.hi(), out);
    return out;
}

int count_zeros(const PhaseSpec& phase, int order, const AlphaInterval& J) {
    return static_cast<int>(zero_locations(phase, order, J).size());
}

IntegralResult oscillatory_integral(const PhaseSpec& phase, const AlphaInterval& J, double tol,
                                    std::uint64_t panel_budget) {
    J.validate();
    if (!(tol > 0.0) || !std::isfinite(tol)) throw std::domain_error("tolerance must be positive");
    check_phase_shape(phase);
    IntegralResult res;
    if (phase.u.empty()) {
        res.value = {1.0, 0.0};
        return res;
    }

    auto quad = [&](const QNode* q, int n, double a, double b) {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double re = 0.0, im = 0.0;
        for (int i = 0; i < n; ++i) {
            const double ph = phase_eval(phase, c + h * q[i].t, 0);
            const double fr = ph - std::floor(ph);
            re += q[i].w * std::cos(kTau * fr);
            im += q[i].w * std::sin(kTau * fr);
        }
        return std::complex<double>{re * h, im * h};
    };

    std::vector<std::pair<double, double>> stack{{J.lo(), J.hi()}};
    std::uint64_t created = 1;
    std::complex<double> total{0.0, 0.0};
    while (!stack.empty()) {
        const auto [a, b] = stack.back();
        stack.pop_back();
        const double w = b - a;
        const double m = a + 0.5 * w;
        const double slope = std::max({std::fabs(phase_eval(phase, a, 1)),
                                       std::fabs(phase_eval(phase, m, 1)),
                                       std::fabs(phase_eval(phase, b, 1))});
        // resolve the phase first (1/8 of a period per panel), then the
        // quadrature discrepancy against the panel's share of the tolerance
        bool split = slope * w > 0.125;
        std::complex<double> g15{0.0, 0.0};
        double perr = 0.0;
        if (!split) {
            g15 = quad(kGl15, 15, a, b);
            const std::complex<double> g7 = quad(kGl7, 7, a, b);
            perr = std::abs(g15 - g7);
            split = perr > 0.5 * tol * w;
        }
        if (split) {
            created += 2;
            if (created > panel_budget) {
                char msg[160];
                std::snprintf(msg, sizeof msg,
                              "oscillatory integral exceeded %llu panels (local phase slope %.3g)",
                              static_cast<unsigned long long>(panel_budget), slope);
                throw BudgetError(msg);
            }
            stack.emplace_back(m, b);
            stack.emplace_back(a, m);
            continue;
        }
        total += g15;
        res.err_estimate += perr;
        ++res.panels;
    }
    res.value = total;
    return res;
}

RepulsionReport vdc_check(const PhaseSpec& phase, const AlphaInterval& J, double N, double epsilon,
                          int grid_size, bool with_zero_counts, double integral_tol,
                          std::uint64_t panel_budget) {
    phase.require_canonical();
    if (phase.d() < 2) throw std::domain_error("repulsion check needs at least two terms");
    if (grid_size < 2) throw std::domain_error("grid needs at least two points");
    J.validate();

    RepulsionReport r;
    r.u = phase.u;
    r.x = phase.x;
    r.A = J.A;
    r.N = N;
    r.epsilon = epsilon;
    r.d = phase.d();
    r.lambda = repulsion_lambda(phase, J, N, epsilon);
    r.vdc_bound_value = std::pow(r.lambda, -1.0 / r.d);

    double minm = std::numeric_limits<double>::infinity();
    double max_slope = 0.0;
    for (int g = 0; g < grid_size; ++g) {
        const double alpha = J.lo() + (J.hi() - J.lo()) * g / (grid_size - 1);
        minm = std::min(minm, m_function(phase, alpha, r.d));
        max_slope = std::max(max_slope, std::fabs(phase_eval(phase, alpha, 1)));
    }
    r.min_m_d = minm;
    r.m_ratio = minm / r.lambda;

    // a phase oscillating past the panel budget is bound-checked, not
    // integrated: |I| <= 1 trivially and lambda^(-1/d) carries the content
    if (10.0 * max_slope + 64.0 <= static_cast<double>(panel_budget)) {
        try {
            const IntegralResult ir = oscillatory_integral(phase, J, integral_tol, panel_budget);
            r.integral = ir.value;
            r.integral_abs = std::abs(ir.value);
            r.integral_known = true;
        } catch (const BudgetError&) {
            r.integral_known = false;
        }
    }
    if (r.integral_known) {
        r.fitted_constant = r.integral_abs * std::pow(r.lambda, 1.0 / r.d);
        r.anomaly = r.integral_abs > 100.0 * r.vdc_bound_value;
        r.consistent = minm > 0.0 && std::isfinite(r.fitted_constant);
    } else {
        r.integral_abs = std::numeric_limits<double>::quiet_NaN();
        r.fitted_constant = std::numeric_limits<double>::quiet_NaN();
        r.consistent = false;
    }
    if (with_zero_counts)
        for (int order = 1; order <= r.d; ++order)
            r.zero_counts.push_back(count_zeros(phase, order, J));
    return r;
}

void write_repulsion_json(const std::vector<RepulsionReport>& reports, std::ostream& out) {
    nlohmann::json arr = nlohmann::json::array();
    for (const RepulsionReport& r : reports) {
        nlohmann::json o;
        o["u"] = r.u;
        o["x"] = r.x;
        o["A"] = r.A;
        o["N"] = r.N;
        o["epsilon"] = r.epsilon;
        o["d"] = r.d;
        o["lambda"] = r.lambda;
        o["min_M_d"] = r.min_m_d;
        o["m_ratio"] = r.m_ratio;
        o["integral_known"] = r.integral_known;
        o["integral_re"] = r.integral.real();
        o["integral_im"] = r.integral.imag();
        o["integral_abs"] = r.integral_abs;
        o["vdc_bound_value"] = r.vdc_bound_value;
        o["vdc_ratio"] = r.fitted_constant;
        o["consistent"] = r.consistent;
        o["anomaly"] = r.anomaly;
        if (!r.zero_counts.empty()) o["zero_counts"] = r.zero_counts;
        arr.push_back(std::move(o));
    }
    out << arr.dump(2) << "\n";
}

void write_phase_curves_csv(const PhaseSpec& phase, const AlphaInterval& J, int samples,
                            std::ostream& out) {
    if (samples < 2) throw std::domain_error("curve table needs at least two samples");
    J.validate();
    check_phase_shape(phase);
    char buf[160];
    out << "alpha,d1,d2,d3,d4\n";
    for (int g = 0; g < samples; ++g) {
        const double alpha = J.lo() + (J.hi() - J.lo()) * g / (samples - 1);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", alpha,
                      phase_eval(phase, alpha, 1), phase_eval(phase, alpha, 2),
                      phase_eval(phase, alpha, 3), phase_eval(phase, alpha, 4));
        out << buf;
    }
}

}
