#include "modone/localstats.hpp"

#include "modone/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace modone {

namespace {

constexpr int kMaxK = 8;

// padding for the candidate sweeps: any tuple the exact predicate accepts
// sits at circular distance <= support/N, and the sweep arithmetic cannot be
// off by anything near 1e-12, so padded candidates form a strict superset
constexpr double kSweepPad = 1e-12;

struct SortedCircle {
    std::vector<double> val;            // ascending
    std::vector<std::uint32_t> idx;     // original index per slot; ties keep index order

    static SortedCircle build(const std::vector<double>& v) {
        std::vector<std::pair<double, std::uint32_t>> tmp(v.size());
        for (std::uint32_t i = 0; i < v.size(); ++i) tmp[i] = {v[i], i};
        std::sort(tmp.begin(), tmp.end());
        SortedCircle sc;
        sc.val.resize(v.size());
        sc.idx.resize(v.size());
        for (std::size_t s = 0; s < tmp.size(); ++s) {
            sc.val[s] = tmp[s].first;
            sc.idx[s] = tmp[s].second;
        }
        return sc;
    }
};

// visit every slot whose value lies in [center+off_lo, center+off_hi] mod 1
template <class Fn>
void for_circular_range(const std::vector<double>& val, double center, double off_lo,
                        double off_hi, Fn&& fn) {
    const std::size_t M = val.size();
    if (M == 0) return;
    const double len = off_hi - off_lo;
    double a = center + off_lo;
    a -= std::floor(a);
    const double b = a + len;
    if (len >= 1.0 || (b > 1.0 && b - 1.0 >= a)) {
        for (std::size_t s = 0; s < M; ++s) fn(s);
        return;
    }
    const auto lo_it = std::lower_bound(val.begin(), val.end(), a);
    if (b <= 1.0) {
        const auto hi_it = std::upper_bound(lo_it, val.end(), b);
        for (auto it = lo_it; it != hi_it; ++it) fn(static_cast<std::size_t>(it - val.begin()));
    } else {
        for (auto it = lo_it; it != val.end(); ++it) fn(static_cast<std::size_t>(it - val.begin()));
        const auto hi_it = std::upper_bound(val.begin(), val.end(), b - 1.0);
        for (auto it = val.begin(); it != hi_it; ++it) fn(static_cast<std::size_t>(it - val.begin()));
    }
}

struct Record {
    std::array<std::uint32_t, kMaxK> tuple;
    double value;
};

// collect, order by tuple, and reduce: together with the shared per-tuple
// scoring this makes the sweep reproduce a lexicographic brute-force
// enumeration bit for bit
double reduce_records(std::vector<Record>& recs, int k, std::uint64_t M) {
    std::sort(recs.begin(), recs.end(), [k](const Record& x, const Record& y) {
        for (int j = 0; j < k; ++j) {
            if (x.tuple[j] != y.tuple[j]) return x.tuple[j] < y.tuple[j];
        }
        return false;
    });
    double sum = 0.0;
    for (const Record& r : recs) sum += r.value;
    return sum / static_cast<double>(M);
}

CorrelationEstimate make_estimate(const PointSet& points, const Window& w, int k, double value) {
    CorrelationEstimate est;
    est.value = value;
    est.k = k;
    est.N = points.size();
    est.external_source = points.external;
    est.alpha = points.external ? 0.0 : points.spec.alpha;
    est.window = w;
    est.algorithm = CorrelationEstimate::Algorithm::DirectWindow;
    return est;
}

// one-sided circular difference from base to other, as the code everywhere
// in this file computes it; 0 means coincident
double onesided_diff(double from, double to) {
    double d = to - from;
    if (d < 0.0) d += 1.0;
    return d;
}

}

double c_factor(int k, std::uint64_t N) {
    if (k < 2) throw std::domain_error("c_factor: k must be >= 2");
    if (static_cast<std::uint64_t>(k) > N) throw std::domain_error("c_factor: k must not exceed N");
    double v = 1.0;
    for (int i = 1; i < k; ++i) v *= 1.0 - static_cast<double>(i) / static_cast<double>(N);
    return v;
}

double tuple_contribution(const std::vector<double>& values, const std::uint32_t* idx, int k,
                          const Window& w) {
    const double N = static_cast<double>(values.size());
    double y[kMaxK - 1];
    for (int j = 0; j + 1 < k; ++j) {
        const double delta = values[idx[j]] - values[idx[j + 1]];
        const double mlo = std::ceil(delta - w.coord_hi(j) / N);
        const double mhi = std::floor(delta - w.coord_lo(j) / N);
        if (mlo > mhi) return 0.0;      // no integer translate reaches the support
        y[j] = N * (delta - mhi);
    }
    return w.evaluate(y);
}

CorrelationEstimate pair_correlation(const PointSet& points, double a, double b, int threads) {
    const auto& v = points.values;
    const std::uint64_t M = v.size();
    if (M == 0) throw std::domain_error("pair_correlation: empty point set");
    if (!(a <= b)) throw std::domain_error("pair_correlation: interval needs a <= b");
    if (M == 1) return make_estimate(points, Window::box1(a, b, 1), 2, 0.0);   // no pairs
    if (!(b - a < static_cast<double>(M)))
        throw std::domain_error("pair_correlation: interval width must be below N");

    const Window w = Window::box1(a, b, 1);
    const SortedCircle sc = SortedCircle::build(v);
    const double scale = static_cast<double>(M);

    ChunkGrid grid{M, 1024};
    std::vector<std::vector<Record>> parts(grid.count());
    run_chunks(grid, threads, [&](std::size_t c) {
        auto& recs = parts[c];
        std::uint32_t pair_idx[2];
        for (std::size_t s = grid.begin(c); s < grid.end(c); ++s) {
            pair_idx[1] = sc.idx[s];        // base is the subtracted index
            for_circular_range(sc.val, sc.val[s], a / scale - kSweepPad, b / scale + kSweepPad,
                               [&](std::size_t q) {
                                   if (sc.idx[q] == pair_idx[1]) return;
                                   pair_idx[0] = sc.idx[q];
                                   const double c0 = tuple_contribution(v, pair_idx, 2, w);
                                   if (c0 != 0.0) recs.push_back({{pair_idx[0], pair_idx[1]}, c0});
                               });
        }
    });

    std::vector<Record> recs;
    for (auto& p : parts) recs.insert(recs.end(), p.begin(), p.end());
    return make_estimate(points, w, 2, reduce_records(recs, 2, M));
}

CorrelationEstimate k_level_correlation(const PointSet& points, const Window& w, int k,
                                        int threads) {
    w.validate();
    const auto& v = points.values;
    const std::uint64_t M = v.size();
    if (k < 2 || static_cast<std::uint64_t>(k) > M)
        throw std::domain_error("k_level_correlation: need 2 <= k <= N");
    if (k > kMaxK) throw std::domain_error("k_level_correlation: k larger than supported");
    if (w.dimension != k - 1)
        throw std::domain_error("k_level_correlation: window dimension must equal k-1");
    const double r = w.support_radius();
    if (!(2.0 * r < static_cast<double>(M)))
        throw std::domain_error("k_level_correlation: scaled support wraps; need 2*radius < N");

    const SortedCircle sc = SortedCircle::build(v);
    const double rp = r / static_cast<double>(M) + kSweepPad;

    ChunkGrid grid{M, 1024};
    std::vector<std::vector<Record>> parts(grid.count());
    run_chunks(grid, threads, [&](std::size_t c) {
        auto& recs = parts[c];
        std::uint32_t chain[kMaxK];
        auto extend = [&](auto&& self, int depth, double at) -> void {
            if (depth == k) {
                const double c0 = tuple_contribution(v, chain, k, w);
                if (c0 != 0.0) {
                    Record rec{};
                    std::copy(chain, chain + k, rec.tuple.begin());
                    rec.value = c0;
                    recs.push_back(rec);
                }
                return;
            }
            for_circular_range(sc.val, at, -rp, rp, [&](std::size_t q) {
                const std::uint32_t oi = sc.idx[q];
                for (int t = 0; t < depth; ++t)
                    if (chain[t] == oi) return;
                chain[depth] = oi;
                self(self, depth + 1, sc.val[q]);
            });
        };
        for (std::size_t s = grid.begin(c); s < grid.end(c); ++s) {
            chain[0] = sc.idx[s];
            extend(extend, 1, sc.val[s]);
        }
    });

    std::vector<Record> recs;
    for (auto& p : parts) recs.insert(recs.end(), p.begin(), p.end());
    return make_estimate(points, w, k, reduce_records(recs, k, M));
}

std::vector<double> consecutive_gaps(const PointSet& points) {
    if (points.size() < 2) throw std::domain_error("consecutive_gaps: need at least 2 points");
    std::vector<double> s = points.values;
    std::sort(s.begin(), s.end());
    std::vector<double> gaps(s.size() - 1);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) gaps[i] = s[i + 1] - s[i];
    return gaps;
}

GapDistribution gap_distribution(const PointSet& points, std::vector<double> xs) {
    const std::vector<double> gaps = consecutive_gaps(points);
    const std::uint64_t N = gaps.size();

    std::vector<double> scaled(gaps.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) scaled[i] = static_cast<double>(N) * gaps[i];
    std::sort(scaled.begin(), scaled.end());

    GapDistribution g;
    g.N = N;
    g.xs = std::move(xs);
    g.g_values.resize(g.xs.size());
    for (std::size_t i = 0; i < g.xs.size(); ++i) {
        const auto it = std::upper_bound(scaled.begin(), scaled.end(), g.xs[i]);
        g.g_values[i] = static_cast<double>(it - scaled.begin()) / static_cast<double>(N);
    }
    return g;
}

std::uint64_t simplex_tuple_count(const PointSet& points, double x, int k) {
    const std::uint64_t M = points.size();
    if (M == 0) throw std::domain_error("simplex_tuple_count: empty point set");
    if (k < 2 || k > kMaxK) throw std::domain_error("simplex_tuple_count: need 2 <= k <= 8");
    if (!(x > 0.0) || !(x < static_cast<double>(M)))
        throw std::domain_error("simplex_tuple_count: need 0 < x < N");
    const int j = k - 1;

    std::vector<double> s = points.values;
    std::sort(s.begin(), s.end());
    const double scale = static_cast<double>(M);

    // A valid tuple is a base point plus j more points at strictly increasing
    // one-sided distances below x/N; ties in position multiply choices but
    // cannot sit at the same chain slot, so each arc contributes the degree-j
    // elementary symmetric polynomial of its position multiplicities.
    unsigned __int128 total = 0;
    std::vector<unsigned __int128> e(static_cast<std::size_t>(j) + 1);
    for (std::size_t i = 0; i < M; ++i) {
        std::fill(e.begin(), e.end(), 0);
        e[0] = 1;
        double group_val = -1.0;
        std::uint64_t group_mult = 0;
        auto flush = [&] {
            if (group_mult == 0) return;
            for (int t = j; t >= 1; --t) e[t] += group_mult * e[t - 1];
            group_mult = 0;
        };
        for (std::size_t step = 1; step < M; ++step) {
            const std::size_t q = (i + step) % M;
            const double d = onesided_diff(s[i], s[q]);
            if (d == 0.0) continue;                     // coincident with the base
            if (!(scale * d < x)) break;                // distances only grow along the walk
            if (s[q] != group_val) {
                flush();
                group_val = s[q];
            }
            ++group_mult;
        }
        flush();
        total += e[j];
    }
    if (total > static_cast<unsigned __int128>(UINT64_MAX))
        throw std::overflow_error("simplex_tuple_count: count exceeds 64 bits");
    return static_cast<std::uint64_t>(total);
}

CorrelationEstimate simplex_correlation(const PointSet& points, double x, int k) {
    const std::uint64_t n = simplex_tuple_count(points, x, k);
    const double value = static_cast<double>(n) / static_cast<double>(points.size());
    return make_estimate(points, Window::simplex(x, k - 1), k, value);
}

std::uint64_t circular_small_gap_count(const PointSet& points, double x) {
    const std::uint64_t M = points.size();
    if (M < 2) throw std::domain_error("circular_small_gap_count: need at least 2 points");
    std::vector<double> s = points.values;
    std::sort(s.begin(), s.end());
    const double scale = static_cast<double>(M);
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < M; ++i) {
        const std::size_t q = (i + 1) % M;
        const double d = onesided_diff(s[i], s[q]);
        if (d > 0.0 && scale * d < x) ++count;
    }
    return count;
}

SandwichBounds gap_sandwich(const PointSet& points, double x, int K) {
    if (K < 1 || K > 3) throw std::domain_error("gap_sandwich: K must lie in [1, 3]");
    const std::uint64_t M = points.size();
    if (x == 0.0) {             // empty simplex at every order; bracket (0, 0)
        SandwichBounds zero;
        zero.scale = M;
        return zero;
    }

    __int128 lower = 0, upper = 0;
    for (int k = 2; k <= 2 * K + 1; ++k) {
        const std::uint64_t c = simplex_tuple_count(points, x, k);
        const __int128 signed_c = (k % 2 == 0) ? static_cast<__int128>(c)
                                               : -static_cast<__int128>(c);
        lower += signed_c;
        if (k <= 2 * K) upper += signed_c;
    }

    SandwichBounds b;
    b.scale = M;
    b.lower_count = static_cast<long long>(lower);
    b.upper_count = static_cast<long long>(upper);
    b.lower = static_cast<double>(b.lower_count) / static_cast<double>(M);
    b.upper = static_cast<double>(b.upper_count) / static_cast<double>(M);
    return b;
}

void write_gap_csv(const GapDistribution& g, std::ostream& out) {
    char buf[64];
    out << "x,g\n";
    for (std::size_t i = 0; i < g.xs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", g.xs[i], g.g_values[i]);
        out << buf;
    }
}

void write_correlation_grid_csv(const std::vector<double>& param, const std::vector<double>& value,
                                const std::vector<double>& reference, std::ostream& out) {
    if (param.size() != value.size() || param.size() != reference.size())
        throw std::domain_error("write_correlation_grid_csv: column lengths differ");
    char buf[96];
    out << "param,value,reference\n";
    for (std::size_t i = 0; i < param.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", param[i], value[i], reference[i]);
        out << buf;
    }
}

}
