#pragma once

#include "aggrolab/ar1sim.hpp"
#include "aggrolab/mixing.hpp"

#include <json.hpp>

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace aggrolab {

// Covariance of the aggregated process, sigma2 * int x^t phi(x) / (1 - x^2) dx.
double theoretical_cov(const MixingSpec& mixing, double sigma2, int t);
double theoretical_cov_quadrature(const MixingSpec& mixing, double sigma2, int t);
double beta_type_cov_closed_form(double p, double q, double sigma2, int t);

double spectral_density(const MixingSpec& mixing, double sigma2, double y);

struct AsymptoticConstants {
    double c;    // gamma(t) ~ c t^-beta
    double c_f;  // f(y) ~ c_f |y|^(beta-1)
};
AsymptoticConstants asymptotic_constants(const MixingSpec& mixing, double sigma2);
// int_0^inf w^beta / (w^2 + 1) dw for beta in [0, 1).
double spectral_tail_integral(double beta);

// Mean-removed series estimator with divisor n.
double sample_cov(std::span<const double> series, int k);
// Pooled panel estimator with divisor (n-k+1)N over t = 1..n-k.
double panel_cov(const RowMatrix& values, int k);
double panel_cov(const Panel& panel, int k);

struct RegimeReport {
    std::string memory = "n/a";  // long, short, degenerate, boundary
    std::string region = "n/a";  // i, ii, iii, iv, n/a
    std::string growth = "n/a";  // j, jj, jjj, n/a
    std::optional<double> H;
    std::vector<double> exponents;
    std::string limit;
    bool boundary = false;
    std::string note;

    nlohmann::json to_json() const;
};

RegimeReport classify_memory(double alpha, double beta);
RegimeReport classify_region(double beta, double sigma, double alpha0);
RegimeReport classify_growth(double N, double n, double beta);

// Least-squares slope of log Var against log n.
double partial_sum_slope(std::span<const std::pair<double, double>> points);
// Var(sum_{t=1}^n X(t)) through the kernel V_n(x) = sum_{|t|<n} (n-|t|) x^|t|.
double theoretical_partial_sum_variance(const MixingSpec& mixing, double sigma2, std::size_t n);
// The same quantity as sum_{|t|<n} (n-|t|) gamma(t).
double partial_sum_variance_direct(const MixingSpec& mixing, double sigma2, std::size_t n);
double theoretical_partial_sum_slope(const MixingSpec& mixing, double sigma2, std::span<const std::size_t> ns);

// Covariance of the Gaussian limit process in the long-memory regime,
// int int (f(x,t1-s)-f(x,-s))(f(x,t2-s)-f(x,-s)) c_phi x^beta ds dx.
double limit_process_cov(double beta, double tau1, double tau2, double c_phi = 1.0);
// Inner s-integral of the kernel product at a fixed x.
double limit_kernel(double x, double tau1, double tau2);

std::complex<double> intermediate_cf(double beta, double sigma2, std::span<const double> thetas,
                                     std::span<const double> taus, double c_phi = 1.0);

struct TailIndex {
    double alpha;
    double lo;
    double hi;
    std::size_t k;
};
TailIndex tail_index(std::span<const double> series);

// 2 int_0^pi f(y) cos(k y) dy for k = 0..k_max, trapezoid on 2^log2_grid
// points after the substitution y = pi s^p.
std::vector<double> fourier_inversion_cov(const MixingSpec& mixing, double sigma2, int k_max, int log2_grid = 16);

}  // namespace aggrolab
