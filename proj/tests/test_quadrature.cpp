#include "aggrolab/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace aggrolab;

TEST(Sum, CompensatesCancellation) {
    quad::Sum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i) s.add(1.0);
    s.add(-1e16);
    EXPECT_DOUBLE_EQ(s.value(), 1000.0);
}

TEST(Finite, PolynomialAndEndpointSingularities) {
    EXPECT_NEAR(quad::finite([](double x) { return x * x; }, 0.0, 1.0), 1.0 / 3.0, 1e-15);
    // int_0^1 x^(-1/2) = 2 and int_0^1 x^(-0.9) = 10
    EXPECT_NEAR(quad::finite([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0), 2.0, 1e-12);
    EXPECT_NEAR(quad::finite([](double x) { return std::pow(x, -0.9); }, 0.0, 1.0), 10.0, 1e-9);
    EXPECT_EQ(quad::finite([](double) { return 1.0; }, 1.0, 1.0), 0.0);
}

TEST(Finite, NonFiniteResultThrows) {
    EXPECT_THROW(quad::finite([](double) { return std::nan(""); }, 0.0, 1.0), std::runtime_error);
}

TEST(Panels, GeometricBreakpointsResolveNarrowPeak) {
    const double eps = 1e-6;
    auto f = [&](double x) { return eps / (x * x + eps * eps); };
    const auto bp = quad::geometric_breakpoints(eps, 1.0);
    EXPECT_EQ(bp.front(), 0.0);
    EXPECT_EQ(bp.back(), 1.0);
    EXPECT_NEAR(quad::panels(f, bp), std::atan(1.0 / eps), 1e-10);
}

TEST(HalfLine, ExponentialAndRational) {
    EXPECT_NEAR(quad::half_line([](double x) { return std::exp(-x); }, 0.0), 1.0, 1e-12);
    EXPECT_NEAR(quad::positive_axis([](double w) { return 1.0 / (w * w + 1.0); }, 1e-3, 1e3), std::numbers::pi / 2,
                1e-11);
    // int_0^inf w^0.5/(w^2+1) = (pi/2)/cos(pi/4)
    EXPECT_NEAR(quad::positive_axis([](double w) { return std::sqrt(w) / (w * w + 1.0); }, 1e-3, 1e3),
                2.2214414690791831, 1e-10);
}
