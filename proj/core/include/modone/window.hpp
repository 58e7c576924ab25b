#pragma once

#include <vector>

namespace modone {

// ============================================================================
// Test functions f on R^(k-1) for correlation sums. Every kind has compact
// support (the correlation machinery needs each coordinate to see at most one
// integer translate) and an analytically known integral. Box, gaussian and
// bump are products of one-dimensional profiles; the simplex is the indicator
// of the open dilated standard simplex and couples its coordinates through
// the sum constraint.
// ============================================================================

struct Window {
    enum class Kind { Box, Simplex, Gaussian, Bump };

    Kind kind = Kind::Box;
    int dimension = 1;              // k-1

    std::vector<double> lo, hi;     // box: per-coordinate closed interval [lo_i, hi_i]
    double dilation = 1.0;          // simplex: the x in the dilation of the open simplex
    double sigma = 1.0;             // gaussian: width of exp(-y^2 / (2 sigma^2))
    double radius = 1.0;            // gaussian/bump: absolute support cutoff
    int order = 2;                  // bump: exponent p of (1 - (y/r)^2)^p

    static Window box(std::vector<double> lo, std::vector<double> hi);
    static Window box1(double a, double b, int dim = 1);    // same interval every coordinate
    static Window simplex(double x, int dim);
    static Window gaussian(double sigma, double radius, int dim = 1);
    static Window bump(double radius, int order, int dim = 1);

    void validate() const;

    // smallest r with support contained in [-r, r]^dim
    double support_radius() const;

    // per-coordinate support interval, the box each translate must land in
    double coord_lo(int j) const;
    double coord_hi(int j) const;

    // f at a point of R^dim (already scaled by N); boundary hits count for
    // box, gaussian and bump supports, while the simplex is open
    double evaluate(const double* y) const;

    bool is_indicator() const { return kind == Kind::Box || kind == Kind::Simplex; }
};

// exact integral of f over R^dim: box -> product of widths, simplex ->
// x^d / d!, gaussian -> (sigma sqrt(2 pi) erf(R / (sigma sqrt 2)))^d,
// bump -> (r sqrt(pi) Gamma(p+1) / Gamma(p+3/2))^d
double poisson_reference(const Window& w);

// partial sums sum_{1<=k<=M} (-1)^(k+1) x^k / k! of 1 - e^(-x), the
// truncation grid the gap-distribution bounds are compared against
double exp_cdf_partial_sum(int M, double x);

}
