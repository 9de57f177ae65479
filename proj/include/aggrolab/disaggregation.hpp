#pragma once

#include "aggrolab/ar1sim.hpp"
#include "aggrolab/mixing.hpp"
#include "aggrolab/rng.hpp"

#include <Eigen/Cholesky>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aggrolab {

// mu_k = (gamma(k) - gamma(k+2)) / (gamma(0) - gamma(2)) for k = 0..k_max.
std::vector<double> robinson_moments_from_cov(std::span<const double> gamma, int k_max);
std::vector<double> robinson_moments(const RowMatrix& values, int k_max);
std::vector<double> robinson_moments(const Panel& panel, int k_max);

struct BeranResult {
    double p;
    double q;
    double se_p;
    double se_q;
    double loglik;
    std::size_t clamped;
    double clamp_rate;
    int iterations;
};

double beta_type_loglik(std::span<const double> a, double p, double q);
// Per-path lag-one autocorrelation sum X(t)X(t-1) / sum X(t)^2.
std::vector<double> lag_one_coefficients(const RowMatrix& values);
// MLE of (p, q) for the Beta-type family from pseudo-observations in (0,1).
BeranResult beran_mle_from_observations(std::span<const double> a);
BeranResult beran_mle(const RowMatrix& values, double h);
BeranResult beran_mle(const Panel& panel, double h);

inline constexpr int kGegenbauerMaxK = 30;

// Orthonormal polynomials under (1-x^2)^alpha on (-1,1); G_k(x) = sum_j g[k][j] x^j.
struct GegenbauerBasis {
    double alpha;
    int K;
    std::vector<double> b;  // orthonormal recurrence coefficients b_1..b_{K+1}
    double h0;              // integral of the weight
    std::vector<std::vector<double>> g;

    double eval(int k, double x) const;
    std::vector<double> eval_all(double x) const;
};

GegenbauerBasis build_gegenbauer_basis(double alpha, int K);

// Gauss rule for the weight (1-x^2)^alpha with `size` nodes.
struct GaussGrid {
    std::vector<double> x;
    std::vector<double> w;
};
GaussGrid gauss_gegenbauer_grid(double alpha, int size);

struct DensityEstimate {
    std::vector<double> grid;
    std::vector<double> values;
    // Quadrature weights for integrals of F(x) (1-x^2)^-alpha over (-1,1).
    std::vector<double> l2_weights;
    double alpha_weight = 0.0;
    int K = 0;
    double sigma2_used = 0.0;
    std::string method = "gegenbauer";
    std::vector<double> coefficients;
};

struct GegenbauerOptions {
    std::optional<double> gamma_rate;
    std::optional<int> K;
    std::optional<double> sigma2;
    int grid_size = 200;
};

double gegenbauer_gamma_bound();
int gegenbauer_order(std::size_t n, double gamma_rate);

// gamma_hat must hold lags 0..K+2.
DensityEstimate gegenbauer_estimate_from_cov(std::span<const double> gamma_hat, double alpha_weight, int K,
                                             std::optional<double> sigma2 = std::nullopt, int grid_size = 200);
// Uses the zero-mean sample covariance (1/n) sum X(t) X(t+j).
DensityEstimate gegenbauer_estimate(std::span<const double> series, double alpha_weight,
                                    const GegenbauerOptions& opts);

std::vector<double> zero_mean_sample_cov(std::span<const double> series, int k_max);

std::vector<double> on_grid(const DensityEstimate& est, const std::function<double(double)>& f);
// Mixing density on (-1,1), zero on (-1,0).
std::vector<double> mixing_on_grid(const DensityEstimate& est, const MixingSpec& mixing);

double weighted_l2_error(const DensityEstimate& est, std::span<const double> reference, double alpha_weight);

// Exact Gaussian sampler for the limit aggregated process: Cholesky factor of
// the Toeplitz covariance built from theoretical_cov.
class GaussianAggregateSampler {
public:
    static constexpr std::size_t kMaxLength = 4096;
    GaussianAggregateSampler(const MixingSpec& mixing, double sigma2, std::size_t n);
    std::vector<double> sample(Stream& stream) const;
    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    Eigen::MatrixXd lower_;
};

}  // namespace aggrolab
