#pragma once

#include "modone/mpreal.hpp"

#include <cmath>
#include <cstdint>

namespace modone {

// ============================================================================
// Shared working-precision kernel for beta * n^alpha.
//
// mpfr_pow is correctly rounded, so with p working bits
//     w = beta * n^alpha * (1 + d1)(1 + d2),   |d_i| <= 2^-p,
// one factor per rounded operation (pow, then the scale by beta when
// beta != 1). Writing E for the binary exponent of w (|w| in [2^(E-1), 2^E)),
// the absolute error is below
//     |w| * 2^(1-p) <= 2^(E+1-p),
// and we report 2^(E+2-p) to keep a full bit of slack. Subtracting floor(w)
// afterwards is exact whenever that bound is below 1, so the same bound
// certifies the fractional part on the circle.
// ============================================================================

// out = beta * n^alpha at the precision out was constructed with
inline void scaled_power(MpReal& out, std::uint64_t n, double alpha, double beta) {
    MpReal base(out.precision()), expo(out.precision());
    base.set_ui(static_cast<unsigned long>(n));
    expo.set_d(alpha);
    out.pow(base, expo);
    if (beta != 1.0) out.mul_d(out, beta);
}

// certified absolute error of a scaled_power result at precision p; saturates
// at infinity when the precision retains no information at all (the caller
// decides whether that is fatal)
inline double scaled_power_err(const MpReal& w) {
    if (w.is_zero()) return 0.0;
    const long e = w.exponent() + 2 - static_cast<long>(w.precision());
    if (e > 1023) return INFINITY;
    return std::ldexp(1.0, static_cast<int>(e < -1074 ? -1074 : e));
}

}
