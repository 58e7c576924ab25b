#pragma once

#include <mpfr.h>

#include <cstdint>
#include <string>
#include <utility>

namespace modone {

// Thin RAII wrapper over one mpfr_t at an explicit working precision.
// Only the handful of operations the sequence kernel needs; every operation
// is correctly rounded by MPFR (error <= 1/2 ulp), which is what the
// certified error bounds in seqgen lean on.
class MpReal {
public:
    explicit MpReal(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
    MpReal(const MpReal&) = delete;
    MpReal& operator=(const MpReal&) = delete;
    MpReal(MpReal&& o) noexcept {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }
    ~MpReal() { mpfr_clear(v_); }

    mpfr_prec_t precision() const { return mpfr_get_prec(v_); }

    void set_ui(unsigned long n) { mpfr_set_ui(v_, n, MPFR_RNDN); }
    void set_d(double x) { mpfr_set_d(v_, x, MPFR_RNDN); }

    // v = b^e, correctly rounded
    void pow(const MpReal& b, const MpReal& e) { mpfr_pow(v_, b.v_, e.v_, MPFR_RNDN); }
    void mul_d(const MpReal& a, double x) { mpfr_mul_d(v_, a.v_, x, MPFR_RNDN); }
    void mul(const MpReal& a, const MpReal& b) { mpfr_mul(v_, a.v_, b.v_, MPFR_RNDN); }
    void sqrt(const MpReal& a) { mpfr_sqrt(v_, a.v_, MPFR_RNDN); }
    void sub(const MpReal& a, const MpReal& b) { mpfr_sub(v_, a.v_, b.v_, MPFR_RNDN); }

    // v = a - floor(a), exact when precision covers the integer part
    void frac_of(const MpReal& a) {
        MpReal fl(mpfr_get_prec(a.v_));
        mpfr_floor(fl.v_, a.v_);
        mpfr_sub(v_, a.v_, fl.v_, MPFR_RNDN);
    }

    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    // exponent E with |v| in [2^(E-1), 2^E); meaningful only for v != 0
    long exponent() const { return static_cast<long>(mpfr_get_exp(v_)); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

    // shortest decimal string that parses back to the same working-precision
    // value; digits = ceil(prec * log10(2)) + 2
    std::string to_decimal() const {
        const long digits = static_cast<long>(mpfr_get_prec(v_) * 0.30103) + 3;
        char* s = nullptr;
        mpfr_asprintf(&s, "%.*Rg", static_cast<int>(digits), v_);
        std::string out(s);
        mpfr_free_str(s);
        return out;
    }

    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }

private:
    mpfr_t v_;
};

}
