#include "aggrolab/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <stdexcept>

namespace aggrolab::quad {

void Sum::add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

namespace {

// Non-const: the two-argument overload is not const-qualified in Boost 1.74.
boost::math::quadrature::tanh_sinh<double>& ts() {
    thread_local boost::math::quadrature::tanh_sinh<double> integrator(15);
    return integrator;
}

}  // namespace

double finite(const Fn& f, double a, double b, double rel_tol) {
    if (!(b > a)) return 0.0;
    // Evaluate through the distance to the nearer endpoint so that points
    // crowding an endpoint keep full relative precision.
    const double mid = 0.5 * (a + b);
    auto g = [&](double x, double xc) {
        if (x < mid) return f(xc < 0 ? a - xc : x);
        return f(xc > 0 ? b - xc : x);
    };
    double err = 0.0;
    const double v = ts().integrate(g, a, b, rel_tol, &err);
    if (!std::isfinite(v)) throw std::runtime_error("quadrature produced a non-finite value");
    return v;
}

double panels(const Fn& f, std::span<const double> p, double rel_tol) {
    Sum s;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) s.add(finite(f, p[i], p[i + 1], rel_tol));
    return s.value();
}

std::vector<double> geometric_breakpoints(double scale, double upper, double factor) {
    std::vector<double> p{0.0};
    if (scale > 0.0) {
        for (double x = scale; x < upper; x *= factor) p.push_back(x);
    }
    p.push_back(upper);
    return p;
}

double half_line(const Fn& f, double a, double rel_tol) {
    boost::math::quadrature::exp_sinh<double> integrator;
    const double v = integrator.integrate([&](double t) { return f(a + t); }, rel_tol);
    if (!std::isfinite(v)) throw std::runtime_error("quadrature produced a non-finite value");
    return v;
}

double positive_axis(const Fn& f, double lo, double hi, double rel_tol) {
    Sum s;
    s.add(finite(f, 0.0, lo, rel_tol));
    double x = lo;
    while (x < hi) {
        const double next = std::min(hi, x * 8.0);
        s.add(finite(f, x, next, rel_tol));
        x = next;
    }
    s.add(half_line(f, hi, rel_tol));
    return s.value();
}

}  // namespace aggrolab::quad
