#include "modone/fourier.hpp"

#include "modone/errors.hpp"
#include "modone/mpreal.hpp"
#include "modone/parallel.hpp"
#include "modone/powkernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>

namespace modone {

namespace {

constexpr double kTwoPi = 6.2831853071795864769;
// accuracy every phase n * beta * x^alpha mod 1 must be certified to
constexpr double kPhaseTarget = 0x1p-40;
constexpr std::size_t kChunk = 4096;

// Combine adjacent partials level by level. The tree shape depends only on
// the partial count, so a sum is the same bits no matter which threads
// filled the slots.
template <class T>
T tree_fold(std::vector<T>& partial) {
    if (partial.empty()) return T{};
    std::size_t n = partial.size();
    while (n > 1) {
        std::size_t m = 0;
        for (std::size_t i = 0; i + 1 < n; i += 2) partial[m++] = partial[i] + partial[i + 1];
        if (n % 2) partial[m++] = partial[n - 1];
        n = m;
    }
    return partial[0];
}

double bump_integral(double r, int p) {
    return r * std::sqrt(M_PI) * std::exp(std::lgamma(p + 1.0) - std::lgamma(p + 1.5));
}

}  // namespace

// ---------------------------------------------------------------------------
// FourierWindow
// ---------------------------------------------------------------------------

FourierWindow FourierWindow::from(const Window& w) {
    w.validate();
    if (w.dimension != 1)
        throw std::domain_error("fourier window: only one-dimensional windows carry a scalar transform");
    switch (w.kind) {
    case Window::Kind::Box:
        if (w.lo[0] != -w.hi[0])
            throw std::domain_error("fourier window: box must be symmetric for the transform to be real");
        break;
    case Window::Kind::Gaussian:
        // transform() below is the one of the untruncated gaussian; insist on
        // a cutoff radius large enough that the difference (relative size
        // erfc(radius / (sigma sqrt 2))) sits far below every tolerance in use
        if (w.radius < 6.0 * w.sigma)
            throw std::domain_error("fourier window: gaussian cutoff radius must be at least 6 sigma");
        break;
    case Window::Kind::Bump:
        break;
    case Window::Kind::Simplex:
        throw std::domain_error("fourier window: simplex windows have no one-dimensional transform");
    }
    return FourierWindow{w};
}

double FourierWindow::integral() const {
    switch (base.kind) {
    case Window::Kind::Box:
        return base.hi[0] - base.lo[0];
    case Window::Kind::Gaussian:
        return base.sigma * std::sqrt(kTwoPi);
    case Window::Kind::Bump:
        return bump_integral(base.radius, base.order);
    default:
        throw std::domain_error("fourier window: unsupported kind");
    }
}

double FourierWindow::transform(double xi) const {
    switch (base.kind) {
    case Window::Kind::Box: {
        const double c = base.hi[0];
        if (xi == 0.0) return 2.0 * c;
        return std::sin(kTwoPi * c * xi) / (M_PI * xi);
    }
    case Window::Kind::Gaussian: {
        const double s = base.sigma;
        return s * std::sqrt(kTwoPi) * std::exp(-2.0 * M_PI * M_PI * s * s * xi * xi);
    }
    case Window::Kind::Bump: {
        // (1 - (t/r)^2)^p transforms to 2^(p+1) p! r j_p(z) / z^p with
        // z = 2 pi xi r and j_p the spherical Bessel function
        const int p = base.order;
        const double r = base.radius;
        const double az = std::fabs(kTwoPi * xi * r);
        if (az * az < 2.0 * p + 3.0) {
            // ascending series of j_p(z)/z^p, normalized to the value at 0:
            // fhat = fhat(0) * sum_m (-z^2/2)^m / (m! (2p+3)(2p+5)...(2p+2m+1))
            double term = 1.0, sum = 1.0;
            for (int m = 1; m <= 80; ++m) {
                term *= -0.5 * az * az / (m * (2.0 * p + 2.0 * m + 1.0));
                sum += term;
                if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
            }
            return bump_integral(r, p) * sum;
        }
        double scale = 2.0 * r;
        for (int j = 1; j <= p; ++j) scale *= 2.0 * j / az;
        return scale * std::sph_bessel(static_cast<unsigned>(p), az);
    }
    default:
        throw std::domain_error("fourier window: unsupported kind");
    }
}

bool FourierWindow::slow_decay() const { return base.kind == Window::Kind::Box; }

double FourierWindow::decay_constant(double s) const {
    if (!(s > 1.0) || !std::isfinite(s)) throw std::domain_error("decay order must exceed 1");
    switch (base.kind) {
    case Window::Kind::Box:
        throw std::domain_error("box window: transform decays like 1/xi, no order-s decay constant exists");
    case Window::Kind::Gaussian: {
        // maximize sigma sqrt(2 pi) e^(-2 pi^2 sigma^2 xi^2) xi^s over xi
        const double sg = base.sigma;
        return sg * std::sqrt(kTwoPi) *
               std::exp(0.5 * s * (std::log(s) - std::log(4.0 * M_PI * M_PI * sg * sg) - 1.0));
    }
    case Window::Kind::Bump: {
        // s integrations by parts (boundary terms vanish up to order p) give
        // |fhat(xi)| <= ||f^(s)||_1 / (2 pi xi)^s, and Cauchy-Schwarz on the
        // support turns the L1 norm into sqrt(2r) ||f^(s)||_2
        const int p = base.order;
        if (s != std::floor(s) || s > static_cast<double>(p))
            throw std::domain_error("bump window: decay constants exist for integer orders s <= p only");
        const int si = static_cast<int>(s);
        const double r = base.radius;
        // coefficients of f(t) = sum_j binom(p,j) (-1)^j (t/r)^(2j) over powers of t
        std::vector<double> coef(2 * p + 1, 0.0);
        double binom = 1.0;
        for (int j = 0; j <= p; ++j) {
            coef[2 * j] = (j % 2 == 0 ? binom : -binom) / std::pow(r, 2.0 * j);
            binom *= static_cast<double>(p - j) / (j + 1.0);
        }
        // differentiate s times
        for (int d = 0; d < si; ++d) {
            for (int m = 1; m <= 2 * p; ++m) coef[m - 1] = coef[m] * m;
            coef[2 * p] = 0.0;
        }
        // integrate the square over [-r, r]: odd total powers drop out
        double l2sq = 0.0;
        for (int m = 0; m <= 2 * p; ++m) {
            if (coef[m] == 0.0) continue;
            for (int mm = 0; mm <= 2 * p; ++mm) {
                if (coef[mm] == 0.0 || (m + mm) % 2 != 0) continue;
                l2sq += coef[m] * coef[mm] * 2.0 * std::pow(r, m + mm + 1.0) / (m + mm + 1.0);
            }
        }
        return std::sqrt(2.0 * r * l2sq) * std::pow(kTwoPi, -s);
    }
    default:
        throw std::domain_error("fourier window: unsupported kind");
    }
}

// ---------------------------------------------------------------------------
// FrequencyDomain
// ---------------------------------------------------------------------------

void FrequencyDomain::validate() const {
    if (k < 2 || k > 8) throw std::domain_error("frequency domain: k must be in [2, 8]");
    if (N < 1) throw std::domain_error("frequency domain: N must be positive");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw std::domain_error("frequency domain: epsilon must be positive and finite");
}

std::uint64_t FrequencyDomain::cutoff() const {
    validate();
    const double c = std::floor(std::pow(static_cast<double>(N), 1.0 + epsilon));
    if (!(c < 9e18)) throw std::domain_error("frequency domain: cutoff overflows");
    return static_cast<std::uint64_t>(c);
}

bool FrequencyDomain::contains(const std::vector<long long>& tuple) const {
    validate();
    const double bound = std::pow(static_cast<double>(N), 1.0 + epsilon);
    long long maxabs = 0;
    long long sum = 0;
    for (long long v : tuple) {
        maxabs = std::max(maxabs, std::llabs(v));
        sum += v;
    }
    if (kind == Kind::NBox)
        return tuple.size() == static_cast<std::size_t>(k - 1) &&
               static_cast<double>(maxabs) <= bound;
    return tuple.size() == static_cast<std::size_t>(k) && sum == 0 && maxabs >= 1 &&
           static_cast<double>(maxabs) <= 2.0 * bound;
}

// ---------------------------------------------------------------------------
// Exponential sums
// ---------------------------------------------------------------------------

unsigned exp_sum_bits(double alpha, std::uint64_t N, double max_abs_freq) {
    const double f = std::max(1.0, std::fabs(max_abs_freq));
    const unsigned freq_bits = static_cast<unsigned>(std::ceil(std::log2(f + 1.0)));
    return required_bits(alpha, N, kPhaseTarget) + freq_bits + 8;
}

struct ExpSumEngine::Impl {
    std::vector<MpReal> table;      // beta * x^alpha at working precision, x = 1..N
    SequenceSpec spec;
    unsigned bits = 0;
    double max_freq = 0.0;
    double err = 0.0;               // certified phase error bound at max_freq
    int threads = 1;

    std::complex<double> sum(double freq, int nthreads) const {
        const ChunkGrid grid{spec.N, kChunk};
        std::vector<std::complex<double>> partial(grid.count());
        run_chunks(grid, nthreads, [&](std::size_t c) {
            MpReal t(bits), f(bits);
            double re = 0.0, im = 0.0;
            for (std::size_t i = grid.begin(c); i < grid.end(c); ++i) {
                t.mul_d(table[i], freq);
                f.frac_of(t);
                double theta = f.to_double();
                if (theta >= 1.0) theta = 0.0;
                re += std::cos(kTwoPi * theta);
                im += std::sin(kTwoPi * theta);
            }
            partial[c] = {re, im};
        });
        return tree_fold(partial);
    }
};

ExpSumEngine::ExpSumEngine(const SequenceSpec& spec, const PrecisionPolicy& policy,
                           double max_abs_freq, int threads)
    : impl_(new Impl) {
    spec.validate();
    policy.validate();
    if (!(max_abs_freq >= 0.0) || !std::isfinite(max_abs_freq))
        throw std::domain_error("max frequency must be finite and non-negative");
    impl_->spec = spec;
    impl_->max_freq = max_abs_freq;
    impl_->threads = std::max(1, threads);
    if (policy.mode == PrecisionPolicy::Mode::Fixed) {
        impl_->bits = policy.bits;
    } else {
        // provision the frequency multiplication up front: the phase target
        // must still hold after scaling by frequencies up to max_abs_freq
        const double target = std::min(policy.target_abs_err, kPhaseTarget);
        const double f = std::max(1.0, max_abs_freq);
        impl_->bits = required_bits(spec.alpha, spec.N, target) +
                      static_cast<unsigned>(std::ceil(std::log2(f + 1.0))) + 8;
    }

    impl_->table.reserve(spec.N);
    for (std::uint64_t i = 0; i < spec.N; ++i) impl_->table.emplace_back(impl_->bits);
    const ChunkGrid grid{spec.N, kChunk};
    std::vector<double> chunk_werr(grid.count(), 0.0);
    std::vector<long> chunk_exp(grid.count(), -1000000L);
    run_chunks(grid, impl_->threads, [&](std::size_t c) {
        double werr = 0.0;
        long wexp = -1000000L;
        for (std::size_t i = grid.begin(c); i < grid.end(c); ++i) {
            MpReal& w = impl_->table[i];
            scaled_power(w, i + 1, spec.alpha, spec.beta);
            werr = std::max(werr, scaled_power_err(w));
            if (!w.is_zero()) wexp = std::max(wexp, w.exponent());
        }
        chunk_werr[c] = werr;
        chunk_exp[c] = wexp;
    });
    double werr_max = 0.0;
    long wexp_max = -1000000L;
    for (std::size_t c = 0; c < grid.count(); ++c) {
        werr_max = std::max(werr_max, chunk_werr[c]);
        wexp_max = std::max(wexp_max, chunk_exp[c]);
    }

    // phase error after t = freq * w: propagated table error, the rounding of
    // the multiply (one ulp at the largest product exponent), the exact
    // fractional-part subtraction, and the final rounding to double
    double err = 0x1p-54;
    if (max_abs_freq > 0.0 && wexp_max > -1000000L) {
        const long texp = wexp_max + std::ilogb(std::max(1.0, max_abs_freq)) + 2;
        const long e = texp - static_cast<long>(impl_->bits);
        err += max_abs_freq * werr_max + (e > 1023 ? INFINITY : std::ldexp(1.0, static_cast<int>(std::max(e, -1074L))));
    }
    impl_->err = err;
    if (!(err <= kPhaseTarget)) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "phase error bound %.3g at %u bits exceeds the 2^-40 target (alpha=%.17g, N=%llu)",
                      err, impl_->bits, spec.alpha,
                      static_cast<unsigned long long>(spec.N));
        throw PrecisionError(msg);
    }
}

ExpSumEngine::~ExpSumEngine() = default;
ExpSumEngine::ExpSumEngine(ExpSumEngine&&) noexcept = default;
ExpSumEngine& ExpSumEngine::operator=(ExpSumEngine&&) noexcept = default;

std::complex<double> ExpSumEngine::sum(double freq) const {
    return sum(freq, impl_->threads);
}

std::complex<double> ExpSumEngine::sum(double freq, int threads) const {
    if (!(std::fabs(freq) <= impl_->max_freq))
        throw PrecisionError("frequency exceeds the bound the phase table was certified for");
    return impl_->sum(freq, threads);
}

std::uint64_t ExpSumEngine::size() const { return impl_->spec.N; }
double ExpSumEngine::phase_err_bound() const { return impl_->err; }
unsigned ExpSumEngine::bits() const { return impl_->bits; }
double ExpSumEngine::max_freq() const { return impl_->max_freq; }

std::complex<double> exp_sum(double n, const SequenceSpec& spec, const PrecisionPolicy& policy,
                             int threads) {
    ExpSumEngine engine(spec, policy, std::fabs(n), threads);
    return engine.sum(n);
}

// ---------------------------------------------------------------------------
// Truncated pair-correlation expansion
// ---------------------------------------------------------------------------

CorrelationEstimate r2_fourier(const FourierWindow& window, const SequenceSpec& spec,
                               double epsilon, const PrecisionPolicy& policy, int threads) {
    spec.validate();
    const FrequencyDomain dom{2, spec.N, epsilon, FrequencyDomain::Kind::NBox};
    const std::uint64_t cutoff = dom.cutoff();
    const double Nd = static_cast<double>(spec.N);

    ExpSumEngine engine(spec, policy, static_cast<double>(cutoff), threads);

    // S(-n) is the conjugate of S(n), so negative frequencies fold into a
    // factor 2; n runs ascending in fixed chunks, each sum() itself
    // deterministic, partials combined in chunk order
    const ChunkGrid grid{cutoff + 1, 64};
    std::vector<double> partial(grid.count(), 0.0);
    run_chunks(grid, std::max(1, threads), [&](std::size_t c) {
        double acc = 0.0;
        for (std::size_t n = grid.begin(c); n < grid.end(c); ++n) {
            const std::complex<double> s = engine.sum(static_cast<double>(n), 1);
            const double weight = (n == 0) ? 1.0 : 2.0;
            acc += weight * window.transform(static_cast<double>(n) / Nd) * (std::norm(s) - Nd);
        }
        partial[c] = acc;
    });
    const double total = tree_fold(partial);

    CorrelationEstimate est;
    est.value = total / (Nd * Nd);
    est.k = 2;
    est.N = spec.N;
    est.alpha = spec.alpha;
    est.external_source = false;
    est.window = window.base;
    est.algorithm = CorrelationEstimate::Algorithm::Fourier;
    return est;
}

double truncation_error_bound(const FourierWindow& window, std::uint64_t N, double epsilon,
                              double s) {
    if (N < 2) throw std::domain_error("truncation bound needs N >= 2");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw std::domain_error("epsilon must be positive and finite");
    const double cs = window.decay_constant(s);
    return cs * std::exp((1.0 + epsilon - epsilon * s) * std::log(static_cast<double>(N)));
}

double decay_order_for_tail(double epsilon, double t) {
    if (!(epsilon > 0.0) || !(t > 0.0)) throw std::domain_error("epsilon and t must be positive");
    return std::ceil((1.0 + epsilon + t) / epsilon);
}

// ---------------------------------------------------------------------------
// Higher-order terms
// ---------------------------------------------------------------------------

std::vector<long long> u_of_n(const std::vector<long long>& n) {
    std::vector<long long> u(n.size() + 1);
    long long prev = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        u[i] = n[i] - prev;
        prev = n[i];
    }
    u[n.size()] = -prev;
    return u;
}

std::complex<double> rk_fourier_term(const std::vector<long long>& n, ExpSumEngine& engine) {
    if (n.empty()) throw std::domain_error("frequency tuple must be non-empty");
    if (std::all_of(n.begin(), n.end(), [](long long v) { return v == 0; }))
        throw std::domain_error("zero frequency tuple rejected");
    const int k = static_cast<int>(n.size()) + 1;
    if (k > 8) throw std::domain_error("tuple order limited to k <= 8");

    const std::vector<long long> u = u_of_n(n);
    double freq_need = 0.0;
    for (long long v : u) freq_need += static_cast<double>(std::llabs(v));
    if (freq_need > engine.max_freq())
        throw PrecisionError("phase table not provisioned for the block frequencies of this tuple");

    // Sum over ordered tuples of distinct indices, expanded over set
    // partitions of the k slots:
    //   sum_{x distinct} prod_i e(u_i theta_{x_i})
    //     = sum_{partitions P} prod_{B in P} (-1)^(|B|-1) (|B|-1)! S(sum_{i in B} u_i)
    // Every block collapses to a power sum at its block frequency, so the
    // expansion is exact for all n; no tuple enumeration is ever needed.
    std::map<long long, std::complex<double>> cache;
    auto S = [&](long long f) {
        auto it = cache.find(f);
        if (it == cache.end()) it = cache.emplace(f, engine.sum(static_cast<double>(f))).first;
        return it->second;
    };
    double factorial[8] = {1, 1, 2, 6, 24, 120, 720, 5040};

    std::complex<double> total{0.0, 0.0};
    std::vector<long long> block_sum;
    std::vector<int> block_size;
    std::function<void(int)> place = [&](int i) {
        if (i == k) {
            std::complex<double> term{1.0, 0.0};
            for (std::size_t b = 0; b < block_sum.size(); ++b) {
                const int sz = block_size[b];
                const double w = (sz % 2 == 0 ? -1.0 : 1.0) * factorial[sz - 1];
                term *= w * S(block_sum[b]);
            }
            total += term;
            return;
        }
        for (std::size_t b = 0; b < block_sum.size(); ++b) {
            block_sum[b] += u[i];
            ++block_size[b];
            place(i + 1);
            --block_size[b];
            block_sum[b] -= u[i];
        }
        block_sum.push_back(u[i]);
        block_size.push_back(1);
        place(i + 1);
        block_sum.pop_back();
        block_size.pop_back();
    };
    place(0);
    return total;
}

std::complex<double> rk_fourier_term(const std::vector<long long>& n, const SequenceSpec& spec,
                                     const PrecisionPolicy& policy, int threads) {
    if (n.empty()) throw std::domain_error("frequency tuple must be non-empty");
    const std::vector<long long> u = u_of_n(n);
    double freq_need = 1.0;
    for (long long v : u) freq_need += static_cast<double>(std::llabs(v));
    ExpSumEngine engine(spec, policy, freq_need, threads);
    return rk_fourier_term(n, engine);
}

void write_spectrum_csv(const SequenceSpec& spec, const PrecisionPolicy& policy, long long max_n,
                        std::ostream& out, int threads) {
    if (max_n < 0) throw std::domain_error("spectrum range must be non-negative");
    ExpSumEngine engine(spec, policy, static_cast<double>(max_n), threads);
    char buf[128];
    out << "n,re_s,im_s,abs2_s\n";
    for (long long n = 0; n <= max_n; ++n) {
        const std::complex<double> s = engine.sum(static_cast<double>(n));
        std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n", n, s.real(), s.imag(),
                      std::norm(s));
        out << buf;
    }
}

}
