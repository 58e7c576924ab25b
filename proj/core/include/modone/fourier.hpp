#pragma once

#include "modone/localstats.hpp"
#include "modone/seqgen.hpp"
#include "modone/window.hpp"

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

namespace modone {

// ============================================================================
// Frequency-side machinery: exponential sums S(n) = sum_x e(n beta x^alpha)
// with certified phase accuracy, the truncated Poisson-summation form of the
// pair correlation, tail bounds from window decay, and the combinatorial
// expansion of higher-order correlation terms into power sums.
//
// Convention throughout: e(z) = exp(2 pi i z) and
// fhat(xi) = integral f(x) e(-xi x) dx, so Poisson summation carries no stray
// 2 pi factors.
// ============================================================================

// A window usable on the frequency side: carries the analytic transform and
// certified decay. Box windows are accepted (symmetric only, since the
// transform must stay real) but flagged: their 1/xi tail defeats truncation
// arguments, so no decay constant is available for them.
struct FourierWindow {
    Window base;

    static FourierWindow from(const Window& w);

    double transform(double xi) const;      // fhat(xi), real and even
    double integral() const;                // fhat(0)
    bool slow_decay() const;                // true for box kind

    // c_s with |fhat(xi)| <= c_s |xi|^(-s). Gaussian: any real s > 1.
    // Bump of order p: integer 1 <= s <= p. Box: unavailable.
    double decay_constant(double s) const;
};

// Frequency index sets of the truncated expansions: the (k-1)-tuples with
// max-norm up to N^(1+eps), and the zero-sum k-tuples with max-norm in
// [1, 2 N^(1+eps)] they map to.
struct FrequencyDomain {
    enum class Kind { NBox, USet };

    int k = 2;
    std::uint64_t N = 1;
    double epsilon = 0.1;
    Kind kind = Kind::NBox;

    void validate() const;
    std::uint64_t cutoff() const;       // floor(N^(1+eps))
    bool contains(const std::vector<long long>& tuple) const;
};

// working precision that certifies phases after multiplication by
// frequencies up to max_abs_freq
unsigned exp_sum_bits(double alpha, std::uint64_t N, double max_abs_freq);

// Holds the working-precision values beta * x^alpha once and evaluates S at
// many frequencies against them. Construction certifies that every phase
// n * beta * x^alpha is accurate to 2^-40 for |n| <= max_abs_freq.
class ExpSumEngine {
public:
    ExpSumEngine(const SequenceSpec& spec, const PrecisionPolicy& policy, double max_abs_freq,
                 int threads = 1);
    ~ExpSumEngine();
    ExpSumEngine(ExpSumEngine&&) noexcept;
    ExpSumEngine& operator=(ExpSumEngine&&) noexcept;

    std::complex<double> sum(double freq) const;            // S(freq)
    std::complex<double> sum(double freq, int threads) const;
    std::uint64_t size() const;                             // N
    double phase_err_bound() const;                         // certified, <= 2^-40
    unsigned bits() const;
    double max_freq() const;                                // certification bound on |freq|

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// S(n) = sum_{x=1}^{N} e(n beta x^alpha); one-shot wrapper around the engine
std::complex<double> exp_sum(double n, const SequenceSpec& spec, const PrecisionPolicy& policy,
                             int threads = 1);

// (1/N^2) sum over |n| <= floor(N^(1+eps)) of fhat(n/N) (|S(n)|^2 - N); the
// frequency-side representation of the pair correlation, accurate to the
// truncation tail
CorrelationEstimate r2_fourier(const FourierWindow& window, const SequenceSpec& spec,
                               double epsilon, const PrecisionPolicy& policy, int threads = 1);

// c_s N^(1 + eps - eps s), the bound on the tail dropped by the truncation
// at N^(1+eps), already normalized by N^2
double truncation_error_bound(const FourierWindow& window, std::uint64_t N, double epsilon,
                              double s);

// decay order that pushes the truncation bound below N^(-t): the smallest
// integer s with 1 + eps - eps s <= -t
double decay_order_for_tail(double epsilon, double t);

// (n_1, n_2 - n_1, ..., n_{k-1} - n_{k-2}, -n_{k-1}): the zero-sum k-tuple a
// frequency tuple acts through; injective, max-norm at most doubled
std::vector<long long> u_of_n(const std::vector<long long>& n);

// sum over ordered k-tuples of distinct indices of e(<Delta(x), n>), k =
// len(n) + 1, expanded over set partitions into products of power sums S at
// the block frequencies; exact for every n, no tuple enumeration involved
std::complex<double> rk_fourier_term(const std::vector<long long>& n, ExpSumEngine& engine);
std::complex<double> rk_fourier_term(const std::vector<long long>& n, const SequenceSpec& spec,
                                     const PrecisionPolicy& policy, int threads = 1);

// rows n, Re S(n), Im S(n), |S(n)|^2 for n = 0..max_n
void write_spectrum_csv(const SequenceSpec& spec, const PrecisionPolicy& policy, long long max_n,
                        std::ostream& out, int threads = 1);

}
