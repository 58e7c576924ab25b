#pragma once

#include "modone/seqgen.hpp"
#include "modone/window.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace modone {

// ============================================================================
// Spatial-side statistics of a point set on the circle: pair and k-level
// correlation sums, gap distributions, simplex-indicator correlations, and
// the alternating-sum sandwich that brackets the gap distribution between
// correlation sums.
//
// The direct algorithms are built so that a brute-force enumeration over all
// tuples reproduces them bit for bit: candidates come from a padded circular
// sweep, every surviving tuple is scored by the shared tuple_contribution
// below, and contributions are added in lexicographic tuple order.
// ============================================================================

struct CorrelationEstimate {
    double value = 0.0;
    int k = 2;
    std::uint64_t N = 0;
    double alpha = 0.0;             // generating exponent; meaningless when external_source
    bool external_source = false;
    Window window;
    enum class Algorithm { DirectWindow, BruteForce, Fourier } algorithm = Algorithm::DirectWindow;
};

struct GapDistribution {
    std::vector<double> xs;         // evaluation grid, echoed from the call
    std::vector<double> g_values;   // empirical CDF of the scaled gaps, in [0, 1]
    std::uint64_t N = 0;            // number of gaps = points - 1
};

// (1 - 1/N)(1 - 2/N)...(1 - (k-1)/N), the count of k-tuples of distinct
// indices divided by N^k
double c_factor(int k, std::uint64_t N);

// Contribution of one ordered tuple of distinct indices: the unique integer
// translate per coordinate that can land in the window's support is applied
// to the consecutive differences, and f is evaluated on the scaled result.
// Both the sweep algorithms and any brute-force enumeration must call this
// with the same index tuple to stay bit-identical.
double tuple_contribution(const std::vector<double>& values, const std::uint32_t* idx, int k,
                          const Window& w);

// (1/N) * number of ordered pairs (m, n), m != n, whose difference falls in
// [a, b]/N modulo 1. Sorts once and sweeps a circular window.
CorrelationEstimate pair_correlation(const PointSet& points, double a, double b, int threads = 1);

// (1/N) sum over ordered k-tuples of distinct indices of the window applied
// to the scaled consecutive-difference vector, one integer translate per
// coordinate. Work is proportional to the number of contributing tuples.
CorrelationEstimate k_level_correlation(const PointSet& points, const Window& w, int k,
                                        int threads = 1);

// Empirical CDF of the scaled nearest-neighbour gaps: the points are sorted,
// the N = size-1 consecutive differences are scaled by N, and g(x) counts
// the fraction <= x. No wrap-around gap is inserted.
GapDistribution gap_distribution(const PointSet& points, std::vector<double> xs);

// the raw (unscaled) consecutive differences of the sorted points, in sweep
// order; length = size - 1
std::vector<double> consecutive_gaps(const PointSet& points);

// Exact count of ordered k-tuples whose consecutive differences, taken one
// way around the circle, are all strictly positive and sum to less than
// x / size. This is the numerator of the simplex-window correlation sum.
std::uint64_t simplex_tuple_count(const PointSet& points, double x, int k);

CorrelationEstimate simplex_correlation(const PointSet& points, double x, int k);

// number of circular nearest-neighbour gaps d with 0 < size * d < x; the
// strict-gap statistic the sandwich bounds bracket exactly
std::uint64_t circular_small_gap_count(const PointSet& points, double x);

// Alternating sums of simplex correlations: lower uses k = 2..2K+1, upper
// k = 2..2K. The integer numerators are exposed so the bracketing of the
// circular strict-gap count can be asserted without rounding.
struct SandwichBounds {
    double lower = 0.0, upper = 0.0;
    long long lower_count = 0, upper_count = 0;     // numerators at scale = point count
    std::uint64_t scale = 0;
};

SandwichBounds gap_sandwich(const PointSet& points, double x, int K);

// CSV writers; floats carry 17 significant digits
void write_gap_csv(const GapDistribution& g, std::ostream& out);
void write_correlation_grid_csv(const std::vector<double>& param, const std::vector<double>& value,
                                const std::vector<double>& reference, std::ostream& out);

}
