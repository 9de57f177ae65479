#pragma once

#include <functional>
#include <span>
#include <vector>

namespace aggrolab::quad {

using Fn = std::function<double(double)>;

// Compensated (Neumaier) accumulator. Summation order is fixed by the caller.
class Sum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Tanh-sinh on [a, b]; tolerates integrable endpoint singularities.
double finite(const Fn& f, double a, double b, double rel_tol = 1e-13);

// Sum of tanh-sinh integrals over consecutive panels [p[i], p[i+1]].
double panels(const Fn& f, std::span<const double> breakpoints, double rel_tol = 1e-13);

// Breakpoints 0, s, 4s, 16s, ... clipped at `upper`; used when the integrand
// concentrates near 0 on scale s.
std::vector<double> geometric_breakpoints(double scale, double upper, double factor = 4.0);

// Integral over [a, inf) with exp-sinh.
double half_line(const Fn& f, double a, double rel_tol = 1e-12);

// Integral over (0, inf): geometric panels between lo and hi, exp-sinh above hi.
double positive_axis(const Fn& f, double lo, double hi, double rel_tol = 1e-12);

}  // namespace aggrolab::quad
