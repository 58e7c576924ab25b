#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace modone {

// ============================================================================
// Phase functions phi(alpha) = sum_i u_i x_i^alpha and the repulsion
// machinery built on them: derivatives, the M_d maximum function, Vandermonde
// inversion, the repulsion bound lambda, zero counting by recursive root
// isolation, numerical oscillatory integrals, and the consistency report
// that ties |I(phi, J)| to lambda^(-1/d).
// ============================================================================

// Canonical form: bases strictly increasing, distinct, all >= 2, every
// coefficient nonzero. canonicalize() is the only intended producer; the flag
// records that the invariants were established.
struct PhaseSpec {
    std::vector<double> u;      // coefficients
    std::vector<double> x;      // bases
    bool canonical = false;

    int d() const { return static_cast<int>(u.size()); }
    void require_canonical() const;
};

// the unit interval J = [A, A+1]
struct AlphaInterval {
    double A = 1.0;

    void validate() const;
    double lo() const { return A; }
    double hi() const { return A + 1.0; }
};

struct RepulsionReport {
    std::vector<double> u, x;       // canonical phase, echoed
    double A = 0.0;
    double N = 0.0;
    double epsilon = 0.0;
    int d = 0;
    double lambda = 0.0;
    double min_m_d = 0.0;           // grid minimum of M_d phi over J
    double m_ratio = 0.0;           // min_m_d / lambda
    bool integral_known = false;    // false when the phase oscillates past the panel budget
    std::complex<double> integral{0.0, 0.0};
    double integral_abs = 0.0;
    double vdc_bound_value = 0.0;   // lambda^(-1/d)
    double fitted_constant = 0.0;   // |I| * lambda^(1/d)
    bool consistent = false;        // min_m_d > 0 and the fitted constant finite
    bool anomaly = false;           // |I| > 100 lambda^(-1/d)
    std::vector<int> zero_counts;   // zeros of phi^(i) in J for i = 1..d, when requested
};

// sum_i u_i (log x_i)^order x_i^alpha; switches to extended precision when
// x^alpha approaches the native range
double phase_eval(const PhaseSpec& phase, double alpha, int order = 0);

// Merge equal bases, drop base-1 terms (constants never change |I|) and
// vanished coefficients; returns the canonical phase and the degeneracy
// K - d. Bases must be 1 or at least 2.
std::pair<PhaseSpec, int> canonicalize(const std::vector<double>& u, const std::vector<double>& x);

// max over i = 1..d of |phi^(i)(alpha)|
double m_function(const PhaseSpec& phase, double alpha, int d);

// Entry (i, j), 1-based, of the inverse of the matrix V with V[i][j] = L_j^i:
// (-1)^(j-1) e_{d-j}(L without L_i) / (L_i prod_{m != i} (L_m - L_i)),
// accumulated in quad precision
double vandermonde_inverse_entry(const std::vector<double>& L, int i, int j);

// N^(-eps) |u_d| x_d^(A+1-d) prod_m (x_{m+1} - x_m) for a canonical phase
// with d >= 2 and bases in [2, N]
double repulsion_lambda(const PhaseSpec& phase, const AlphaInterval& J, double N, double epsilon);

// Zeros of phi^(order) in J, isolated recursively: dividing out the smallest
// exponential leaves a function whose derivative has one term fewer, its
// zeros cut J into monotonic pieces, and each sign change is bisected to
// width 1e-12. A canonical phase with d terms never yields more than d-1.
std::vector<double> zero_locations(const PhaseSpec& phase, int order, const AlphaInterval& J);
int count_zeros(const PhaseSpec& phase, int order, const AlphaInterval& J);

struct IntegralResult {
    std::complex<double> value{0.0, 0.0};
    double err_estimate = 0.0;
    std::uint64_t panels = 0;
};

// I(phi, J) = integral over J of e(phi(alpha)). Panels are split until the
// local phase increment is at most 1/8 of a period and the 15-point vs
// 7-point quadrature discrepancy fits the panel's share of tol. Accepts any
// phase, canonical or not (base-1 constants just rotate the result).
IntegralResult oscillatory_integral(const PhaseSpec& phase, const AlphaInterval& J, double tol,
                                    std::uint64_t panel_budget = 8000000);

// Lambda, the grid minimum of M_d phi, the integral (skipped in favor of the
// trivial bound when the phase oscillates past the panel budget), and the
// observed constants of the repulsion and van der Corput inequalities.
RepulsionReport vdc_check(const PhaseSpec& phase, const AlphaInterval& J, double N, double epsilon,
                          int grid_size, bool with_zero_counts = false,
                          double integral_tol = 1e-9, std::uint64_t panel_budget = 8000000);

// one JSON array entry per report
void write_repulsion_json(const std::vector<RepulsionReport>& reports, std::ostream& out);

// rows (alpha, phi', phi'', phi''', phi'''') over an equispaced grid
void write_phase_curves_csv(const PhaseSpec& phase, const AlphaInterval& J, int samples,
                            std::ostream& out);

}
