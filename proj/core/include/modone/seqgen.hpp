#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace modone {

// ============================================================================
// Generation of the point sets {beta * n^alpha mod 1 : 1 <= n <= N} with
// certified rounding error. Everything downstream (correlations, gaps,
// exponential sums, ensemble experiments) consumes the PointSet produced
// here, so the error bound attached to it is the contract the rest of the
// library leans on.
// ============================================================================

struct SequenceSpec {
    double alpha = 1.0;         // exponent, must be > 0
    double beta = 1.0;          // prefactor, must be != 0
    std::uint64_t N = 1;        // number of points, must be >= 1

    void validate() const;

    // alpha and beta both positive integers: every fractional part is 0
    bool degenerate() const;
};

// How many mantissa bits the evaluation runs at. In auto mode the bit count
// is derived from (alpha, N, target_abs_err) and generation throws if the
// certified error ever exceeds the target. In fixed mode the caller picks the
// bits and takes what they give: the error bound reports honestly, even when
// it degrades to the trivial half-circle bound (which is exactly how the
// precision-necessity experiments produce their double-precision baselines).
struct PrecisionPolicy {
    enum class Mode { Auto, Fixed };

    Mode mode = Mode::Auto;
    unsigned bits = 0;                  // used in Fixed mode, >= 2
    double target_abs_err = 0x1p-40;    // certified accuracy for Auto mode, in (0,1)

    static PrecisionPolicy auto_target(double target);
    static PrecisionPolicy fixed_bits(unsigned bits);

    void validate() const;
    unsigned resolve_bits(double alpha, std::uint64_t N) const;
};

// Working precision that certifies |computed - exact| <= target for every
// beta * n^alpha with n <= N: ceil((alpha+1) * log2 N) covers the magnitude
// of the value plus the derivative amplification of the exponent's own
// rounding, ceil(log2 1/target) covers the requested accuracy, and 32 slack
// bits absorb the constant-factor losses of pow and the final scale.
unsigned required_bits(double alpha, std::uint64_t N, double target_abs_err);

struct FracResult {
    double value;       // beta * n^alpha mod 1, in [0,1)
    double err_bound;   // certified distance on the circle to the exact point
};

FracResult frac_part_one(std::uint64_t n, const SequenceSpec& spec, const PrecisionPolicy& policy);

struct PointSet {
    std::vector<double> values;     // each in [0,1), index i holds n = i+1
    double err_bound = 0.0;         // max certified circle distance, all entries
    bool external = false;          // true when values came from the caller
    SequenceSpec spec;              // meaningful only when !external
    unsigned bits = 0;              // working precision used, 0 for external

    std::uint64_t size() const { return values.size(); }

    // first M values; the error bound is inherited, so a prefix of a
    // generated set is exactly the set a shorter run would have produced
    // only when the precision was provisioned for the full length
    PointSet prefix(std::uint64_t M) const;
};

// Evaluate the whole sequence. Deterministic for fixed inputs, independent of
// the thread count: the work is split into fixed chunks and every entry is
// computed in isolation at the same precision.
PointSet frac_parts(const SequenceSpec& spec, const PrecisionPolicy& policy, int threads = 1);

// Wrap caller-supplied values (measured data, synthetic test input). The
// declared error bound is taken on trust.
PointSet pointset_from_values(std::vector<double> values, double err_bound);

// Binary format: a one-line magic, a one-line header carrying the generating
// parameters as decimal strings, then the values as little-endian IEEE
// doubles. Round-trips exactly.
void save_pointset(const PointSet& ps, const std::string& path);
PointSet load_pointset(const std::string& path);

// Stream the sequence as one decimal value per line at full working
// precision, before the rounding to double, for cross-checks against
// external tools.
void write_frac_parts_text(const SequenceSpec& spec, const PrecisionPolicy& policy, std::ostream& out);

}
