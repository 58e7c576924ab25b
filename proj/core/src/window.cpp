#include "modone/window.hpp"

#include <cmath>
#include <stdexcept>

namespace modone {

Window Window::box(std::vector<double> lo, std::vector<double> hi) {
    Window w;
    w.kind = Kind::Box;
    w.dimension = static_cast<int>(lo.size());
    w.lo = std::move(lo);
    w.hi = std::move(hi);
    w.validate();
    return w;
}

Window Window::box1(double a, double b, int dim) {
    return box(std::vector<double>(dim, a), std::vector<double>(dim, b));
}

Window Window::simplex(double x, int dim) {
    Window w;
    w.kind = Kind::Simplex;
    w.dimension = dim;
    w.dilation = x;
    w.validate();
    return w;
}

Window Window::gaussian(double sigma, double radius, int dim) {
    Window w;
    w.kind = Kind::Gaussian;
    w.dimension = dim;
    w.sigma = sigma;
    w.radius = radius;
    w.validate();
    return w;
}

Window Window::bump(double radius, int order, int dim) {
    Window w;
    w.kind = Kind::Bump;
    w.dimension = dim;
    w.radius = radius;
    w.order = order;
    w.validate();
    return w;
}

void Window::validate() const {
    if (dimension < 1) throw std::domain_error("Window: dimension must be >= 1");
    switch (kind) {
    case Kind::Box:
        if (lo.size() != static_cast<std::size_t>(dimension) || hi.size() != lo.size())
            throw std::domain_error("Window: box needs one [lo, hi] pair per coordinate");
        for (int j = 0; j < dimension; ++j) {
            if (!(lo[j] <= hi[j]) || !std::isfinite(lo[j]) || !std::isfinite(hi[j]))
                throw std::domain_error("Window: box intervals must be finite with lo <= hi");
        }
        break;
    case Kind::Simplex:
        if (!(dilation > 0.0) || !std::isfinite(dilation))
            throw std::domain_error("Window: simplex dilation must be positive");
        break;
    case Kind::Gaussian:
        if (!(sigma > 0.0) || !(radius > 0.0))
            throw std::domain_error("Window: gaussian needs positive sigma and radius");
        break;
    case Kind::Bump:
        if (!(radius > 0.0)) throw std::domain_error("Window: bump needs a positive radius");
        if (order < 1 || order > 60) throw std::domain_error("Window: bump order must lie in [1, 60]");
        break;
    }
}

double Window::support_radius() const {
    switch (kind) {
    case Kind::Box: {
        double r = 0.0;
        for (int j = 0; j < dimension; ++j)
            r = std::max(r, std::max(std::fabs(lo[j]), std::fabs(hi[j])));
        return r;
    }
    case Kind::Simplex: return dilation;
    case Kind::Gaussian:
    case Kind::Bump: return radius;
    }
    return 0.0;
}

double Window::coord_lo(int j) const {
    switch (kind) {
    case Kind::Box: return lo[j];
    case Kind::Simplex: return 0.0;
    case Kind::Gaussian:
    case Kind::Bump: return -radius;
    }
    return 0.0;
}

double Window::coord_hi(int j) const {
    switch (kind) {
    case Kind::Box: return hi[j];
    case Kind::Simplex: return dilation;
    case Kind::Gaussian:
    case Kind::Bump: return radius;
    }
    return 0.0;
}

double Window::evaluate(const double* y) const {
    switch (kind) {
    case Kind::Box:
        for (int j = 0; j < dimension; ++j)
            if (y[j] < lo[j] || y[j] > hi[j]) return 0.0;
        return 1.0;
    case Kind::Simplex: {
        double s = 0.0;
        for (int j = 0; j < dimension; ++j) {
            if (!(y[j] > 0.0)) return 0.0;
            s += y[j];
        }
        return s < dilation ? 1.0 : 0.0;
    }
    case Kind::Gaussian: {
        double v = 1.0;
        for (int j = 0; j < dimension; ++j) {
            if (std::fabs(y[j]) > radius) return 0.0;
            v *= std::exp(-y[j] * y[j] / (2.0 * sigma * sigma));
        }
        return v;
    }
    case Kind::Bump: {
        double v = 1.0;
        for (int j = 0; j < dimension; ++j) {
            if (std::fabs(y[j]) > radius) return 0.0;
            const double t = y[j] / radius;
            v *= std::pow(1.0 - t * t, order);
        }
        return v;
    }
    }
    return 0.0;
}

double poisson_reference(const Window& w) {
    w.validate();
    switch (w.kind) {
    case Window::Kind::Box: {
        double v = 1.0;
        for (int j = 0; j < w.dimension; ++j) v *= w.hi[j] - w.lo[j];
        return v;
    }
    case Window::Kind::Simplex: {
        double v = 1.0;
        for (int j = 1; j <= w.dimension; ++j) v *= w.dilation / j;
        return v;
    }
    case Window::Kind::Gaussian: {
        const double one_dim = w.sigma * std::sqrt(2.0 * M_PI) *
                               std::erf(w.radius / (w.sigma * std::sqrt(2.0)));
        return std::pow(one_dim, w.dimension);
    }
    case Window::Kind::Bump: {
        const double p = w.order;
        const double one_dim = w.radius * std::sqrt(M_PI) *
                               std::tgamma(p + 1.0) / std::tgamma(p + 1.5);
        return std::pow(one_dim, w.dimension);
    }
    }
    return 0.0;
}

double exp_cdf_partial_sum(int M, double x) {
    if (M < 1) throw std::domain_error("exp_cdf_partial_sum: M must be >= 1");
    double term = 1.0, sum = 0.0;
    for (int k = 1; k <= M; ++k) {
        term *= x / k;                          // x^k / k!
        sum += (k % 2 == 1) ? term : -term;
    }
    return sum;
}

}
