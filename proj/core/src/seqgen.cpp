#include "modone/seqgen.hpp"

#include "modone/errors.hpp"
#include "modone/parallel.hpp"
#include "modone/powkernel.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace modone {

static_assert(std::endian::native == std::endian::little,
              "PointSet files store little-endian doubles; add byte swapping before porting");

void SequenceSpec::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::domain_error("SequenceSpec: alpha must be a finite positive real");
    if (beta == 0.0 || !std::isfinite(beta)) throw std::domain_error("SequenceSpec: beta must be a finite nonzero real");
    if (N < 1) throw std::domain_error("SequenceSpec: N must be >= 1");
}

bool SequenceSpec::degenerate() const {
    return alpha > 0.0 && beta > 0.0 &&
           alpha == std::floor(alpha) && beta == std::floor(beta);
}

PrecisionPolicy PrecisionPolicy::auto_target(double target) {
    PrecisionPolicy p;
    p.mode = Mode::Auto;
    p.target_abs_err = target;
    p.validate();
    return p;
}

PrecisionPolicy PrecisionPolicy::fixed_bits(unsigned bits) {
    PrecisionPolicy p;
    p.mode = Mode::Fixed;
    p.bits = bits;
    p.validate();
    return p;
}

void PrecisionPolicy::validate() const {
    if (mode == Mode::Auto) {
        if (!(target_abs_err > 0.0) || !(target_abs_err < 1.0))
            throw std::domain_error("PrecisionPolicy: target_abs_err must lie in (0, 1)");
    } else {
        if (bits < 2) throw std::domain_error("PrecisionPolicy: fixed mode needs at least 2 bits");
    }
}

unsigned required_bits(double alpha, std::uint64_t N, double target_abs_err) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::domain_error("required_bits: alpha must be positive");
    if (N < 1) throw std::domain_error("required_bits: N must be >= 1");
    if (!(target_abs_err > 0.0) || !(target_abs_err < 1.0))
        throw std::domain_error("required_bits: target_abs_err must lie in (0, 1)");
    const double magnitude = std::ceil((alpha + 1.0) * std::log2(static_cast<double>(N)));
    const double accuracy = std::ceil(-std::log2(target_abs_err));
    const double total = magnitude + accuracy + 32.0;
    if (!(total < 1e9)) throw std::domain_error("required_bits: requested precision is absurdly large");
    return static_cast<unsigned>(total);
}

unsigned PrecisionPolicy::resolve_bits(double alpha, std::uint64_t N) const {
    validate();
    return mode == Mode::Auto ? required_bits(alpha, N, target_abs_err) : bits;
}

namespace {

// rounding the working-precision fraction to double costs at most half an ulp
// of a value below 1
constexpr double kDoubleRound = 0x1p-54;

struct FracKernel {
    MpReal w, frac;
    double alpha, beta;
    bool enforce_target;
    double target;

    FracKernel(unsigned bits, const SequenceSpec& spec, const PrecisionPolicy& policy)
        : w(static_cast<mpfr_prec_t>(bits)),
          frac(static_cast<mpfr_prec_t>(bits)),
          alpha(spec.alpha),
          beta(spec.beta),
          enforce_target(policy.mode == PrecisionPolicy::Mode::Auto),
          target(policy.target_abs_err) {}

    FracResult eval(std::uint64_t n) {
        scaled_power(w, n, alpha, beta);
        const double comp_err = scaled_power_err(w);
        if (enforce_target && !(comp_err <= target))
            throw PrecisionError("frac_part: certified error exceeds the policy target at n=" + std::to_string(n));
        frac.frac_of(w);
        double value = frac.to_double();
        if (value == 1.0) value = 0.0;      // round-up across the wrap stays on the circle
        double err = comp_err + kDoubleRound;
        if (!(err < 0.5)) err = 0.5;        // circle distance never exceeds a half
        return {value, err};
    }
};

}

FracResult frac_part_one(std::uint64_t n, const SequenceSpec& spec, const PrecisionPolicy& policy) {
    spec.validate();
    if (n < 1 || n > spec.N) throw std::domain_error("frac_part_one: n must lie in [1, N]");
    const unsigned bits = policy.resolve_bits(spec.alpha, spec.N);
    FracKernel kernel(bits, spec, policy);
    return kernel.eval(n);
}

PointSet frac_parts(const SequenceSpec& spec, const PrecisionPolicy& policy, int threads) {
    spec.validate();
    const unsigned bits = policy.resolve_bits(spec.alpha, spec.N);

    PointSet ps;
    ps.values.resize(spec.N);
    ps.external = false;
    ps.spec = spec;
    ps.bits = bits;

    ChunkGrid grid{spec.N, 4096};
    std::vector<double> chunk_err(grid.count(), 0.0);
    run_chunks(grid, threads, [&](std::size_t c) {
        FracKernel kernel(bits, spec, policy);
        double worst = 0.0;
        for (std::size_t i = grid.begin(c); i < grid.end(c); ++i) {
            const FracResult r = kernel.eval(i + 1);
            ps.values[i] = r.value;
            if (r.err_bound > worst) worst = r.err_bound;
        }
        chunk_err[c] = worst;
    });

    double worst = 0.0;
    for (double e : chunk_err)
        if (e > worst) worst = e;
    ps.err_bound = worst;
    return ps;
}

PointSet PointSet::prefix(std::uint64_t M) const {
    if (M > values.size()) throw std::domain_error("PointSet::prefix: longer than the set");
    PointSet out;
    out.values.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(M));
    out.err_bound = err_bound;
    out.external = external;
    out.spec = spec;
    out.spec.N = M;
    out.bits = bits;
    return out;
}

PointSet pointset_from_values(std::vector<double> values, double err_bound) {
    if (!(err_bound >= 0.0)) throw std::domain_error("pointset_from_values: err_bound must be >= 0");
    for (double v : values)
        if (!(v >= 0.0 && v < 1.0)) throw std::domain_error("pointset_from_values: values must lie in [0, 1)");
    PointSet ps;
    ps.values = std::move(values);
    ps.err_bound = err_bound;
    ps.external = true;
    ps.bits = 0;
    return ps;
}

// ---------------------------------------------------------------------------
// serialization

static std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void save_pointset(const PointSet& ps, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_pointset: cannot open " + path);
    out << "MODONE1\n";
    if (ps.external) {
        out << "source=external N=" << ps.values.size()
            << " err=" << format_double(ps.err_bound) << "\n";
    } else {
        out << "source=sequence alpha=" << format_double(ps.spec.alpha)
            << " beta=" << format_double(ps.spec.beta)
            << " N=" << ps.values.size()
            << " err=" << format_double(ps.err_bound)
            << " bits=" << ps.bits << "\n";
    }
    out.write(reinterpret_cast<const char*>(ps.values.data()),
              static_cast<std::streamsize>(ps.values.size() * sizeof(double)));
    if (!out) throw IoError("save_pointset: write failed for " + path);
}

PointSet load_pointset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_pointset: cannot open " + path);
    std::string magic, header;
    if (!std::getline(in, magic) || magic != "MODONE1")
        throw IoError("load_pointset: bad magic in " + path);
    if (!std::getline(in, header)) throw IoError("load_pointset: missing header in " + path);

    PointSet ps;
    std::uint64_t n = 0;
    char errbuf[40] = {0};
    if (header.rfind("source=external", 0) == 0) {
        if (std::sscanf(header.c_str(), "source=external N=%llu err=%39s",
                        reinterpret_cast<unsigned long long*>(&n), errbuf) != 2)
            throw IoError("load_pointset: malformed external header in " + path);
        ps.external = true;
        ps.err_bound = std::strtod(errbuf, nullptr);
    } else if (header.rfind("source=sequence", 0) == 0) {
        char abuf[40] = {0}, bbuf[40] = {0};
        unsigned bits = 0;
        if (std::sscanf(header.c_str(), "source=sequence alpha=%39s beta=%39s N=%llu err=%39s bits=%u",
                        abuf, bbuf, reinterpret_cast<unsigned long long*>(&n), errbuf, &bits) != 5)
            throw IoError("load_pointset: malformed sequence header in " + path);
        ps.external = false;
        ps.spec.alpha = std::strtod(abuf, nullptr);
        ps.spec.beta = std::strtod(bbuf, nullptr);
        ps.spec.N = n;
        ps.err_bound = std::strtod(errbuf, nullptr);
        ps.bits = bits;
    } else {
        throw IoError("load_pointset: unknown source kind in " + path);
    }

    ps.values.resize(n);
    in.read(reinterpret_cast<char*>(ps.values.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(n * sizeof(double)))
        throw IoError("load_pointset: truncated value block in " + path);
    return ps;
}

void write_frac_parts_text(const SequenceSpec& spec, const PrecisionPolicy& policy, std::ostream& out) {
    spec.validate();
    const unsigned bits = policy.resolve_bits(spec.alpha, spec.N);
    FracKernel kernel(bits, spec, policy);
    for (std::uint64_t n = 1; n <= spec.N; ++n) {
        scaled_power(kernel.w, n, spec.alpha, spec.beta);
        const double comp_err = scaled_power_err(kernel.w);
        if (kernel.enforce_target && !(comp_err <= kernel.target))
            throw PrecisionError("write_frac_parts_text: certified error exceeds the policy target at n=" + std::to_string(n));
        kernel.frac.frac_of(kernel.w);
        out << kernel.frac.to_decimal() << "\n";
    }
    if (!out) throw IoError("write_frac_parts_text: stream write failed");
}

}
