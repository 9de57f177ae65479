#include "aggrolab/disaggregation.hpp"

#include "aggrolab/analytics.hpp"
#include "aggrolab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace aggrolab {

std::vector<double> robinson_moments_from_cov(std::span<const double> gamma, int k_max) {
    if (k_max < 0 || gamma.size() < static_cast<std::size_t>(k_max) + 3)
        throw std::invalid_argument("need covariances up to lag k_max + 2");
    const double denom = gamma[0] - gamma[2];
    if (!(denom > 0.0)) throw NumericalError("gamma(0) - gamma(2) is not positive");
    std::vector<double> mu(static_cast<std::size_t>(k_max) + 1);
    mu[0] = 1.0;
    for (int k = 1; k <= k_max; ++k) mu[k] = (gamma[k] - gamma[k + 2]) / denom;
    return mu;
}

std::vector<double> robinson_moments(const RowMatrix& values, int k_max) {
    if (k_max < 0 || values.cols() < k_max + 3) throw std::invalid_argument("path length must be at least k_max + 3");
    std::vector<double> g(static_cast<std::size_t>(k_max) + 3);
    for (int k = 0; k < k_max + 3; ++k) g[k] = panel_cov(values, k);
    return robinson_moments_from_cov(g, k_max);
}

std::vector<double> robinson_moments(const Panel& panel, int k_max) { return robinson_moments(panel.values, k_max); }

double beta_type_loglik(std::span<const double> a, double p, double q) {
    const double lb = std::log(boost::math::beta(p, q));
    double s = 0.0;
    for (double x : a) s += std::log(2.0) - lb + (2.0 * p - 1.0) * std::log(x) + (q - 1.0) * std::log1p(-x * x);
    return s;
}

std::vector<double> lag_one_coefficients(const RowMatrix& values) {
    std::vector<double> a(static_cast<std::size_t>(values.rows()));
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        const auto row = values.row(i);
        double num = 0.0, den = 0.0;
        for (Eigen::Index t = 0; t < values.cols(); ++t) {
            den += row(t) * row(t);
            if (t > 0) num += row(t) * row(t - 1);
        }
        if (!(den > 0.0)) throw NumericalError("path with zero energy: lag-one ratio undefined");
        a[static_cast<std::size_t>(i)] = num / den;
    }
    return a;
}

namespace {

struct LikData {
    double n;
    double sum_log_a;    // sum of log a
    double sum_log_1ma;  // sum of log(1 - a^2)
};

// Negative mean log-likelihood in (u, v) with p = 1 + e^u, q = 1 + e^v.
double neg_f(const gsl_vector* z, void* params) {
    const auto* d = static_cast<const LikData*>(params);
    const double p = 1.0 + std::exp(gsl_vector_get(z, 0));
    const double q = 1.0 + std::exp(gsl_vector_get(z, 1));
    if (!std::isfinite(p) || !std::isfinite(q)) return std::numeric_limits<double>::infinity();
    return -(std::log(2.0) - std::log(boost::math::beta(p, q)) + ((2.0 * p - 1.0) * d->sum_log_a + (q - 1.0) * d->sum_log_1ma) / d->n);
}

void neg_df(const gsl_vector* z, void* params, gsl_vector* g) {
    const auto* d = static_cast<const LikData*>(params);
    const double eu = std::exp(gsl_vector_get(z, 0)), ev = std::exp(gsl_vector_get(z, 1));
    const double p = 1.0 + eu, q = 1.0 + ev;
    const double dpq = boost::math::digamma(p + q);
    const double dp = -(boost::math::digamma(p) - dpq) + 2.0 * d->sum_log_a / d->n;
    const double dq = -(boost::math::digamma(q) - dpq) + d->sum_log_1ma / d->n;
    gsl_vector_set(g, 0, -dp * eu);
    gsl_vector_set(g, 1, -dq * ev);
}

void neg_fdf(const gsl_vector* z, void* params, double* f, gsl_vector* g) {
    *f = neg_f(z, params);
    neg_df(z, params, g);
}

struct Optimum {
    double u, v, value;
    int iterations;
    bool converged;
};

Optimum bfgs(LikData& data, double u0, double v0) {
    constexpr int kMaxIter = 200;
    gsl_multimin_function_fdf fn{&neg_f, &neg_df, &neg_fdf, 2, &data};
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(2), gsl_vector_free);
    gsl_vector_set(x.get(), 0, u0);
    gsl_vector_set(x.get(), 1, v0);
    std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> s(
        gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, 2), gsl_multimin_fdfminimizer_free);
    gsl_multimin_fdfminimizer_set(s.get(), &fn, x.get(), 0.1, 0.1);
    int iter = 0;
    bool converged = false;
    while (iter < kMaxIter) {
        ++iter;
        if (gsl_multimin_fdfminimizer_iterate(s.get()) != GSL_SUCCESS) {
            converged = gsl_multimin_test_gradient(s->gradient, 1e-6) == GSL_SUCCESS;
            break;
        }
        if (gsl_multimin_test_gradient(s->gradient, 1e-9) == GSL_SUCCESS) {
            converged = true;
            break;
        }
    }
    return {gsl_vector_get(s->x, 0), gsl_vector_get(s->x, 1), s->f, iter, converged};
}

}  // namespace

BeranResult beran_mle_from_observations(std::span<const double> a) {
    if (a.empty()) throw std::invalid_argument("no pseudo-observations");
    LikData data{static_cast<double>(a.size()), 0.0, 0.0};
    for (double x : a) {
        if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("pseudo-observations must lie in (0,1)");
        data.sum_log_a += std::log(x);
        data.sum_log_1ma += std::log1p(-x * x);
    }
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    constexpr double starts[3][2] = {{0.0, 0.0}, {1.0, 1.0}, {-1.0, 2.0}};
    std::optional<Optimum> best;
    int total_iter = 0;
    for (const auto& st : starts) {
        const Optimum o = bfgs(data, st[0], st[1]);
        total_iter += o.iterations;
        if (o.converged && std::isfinite(o.value) && (!best || o.value < best->value)) best = o;
    }
    gsl_set_error_handler(old);
    if (!best) throw NumericalError("likelihood optimizer did not converge within the iteration cap");
    const double p = 1.0 + std::exp(best->u), q = 1.0 + std::exp(best->v);
    const double tpq = boost::math::trigamma(p + q);
    Eigen::Matrix2d info;
    info << boost::math::trigamma(p) - tpq, -tpq, -tpq, boost::math::trigamma(q) - tpq;
    info *= data.n;
    const Eigen::Matrix2d cov = info.inverse();
    return {p, q, std::sqrt(cov(0, 0)), std::sqrt(cov(1, 1)), -best->value * data.n, 0, 0.0, total_iter};
}

BeranResult beran_mle(const RowMatrix& values, double h) {
    if (!(h > 0.0 && h < 0.5)) throw std::invalid_argument("truncation h must lie in (0, 1/2)");
    std::vector<double> a = lag_one_coefficients(values);
    std::size_t clamped = 0;
    for (auto& x : a) {
        if (x < h || x > 1.0 - h) {
            x = std::clamp(x, h, 1.0 - h);
            ++clamped;
        }
    }
    if (clamped == a.size()) throw NumericalError("all pseudo-observations sit at a clamp boundary");
    BeranResult r = beran_mle_from_observations(a);
    r.clamped = clamped;
    r.clamp_rate = static_cast<double>(clamped) / static_cast<double>(a.size());
    return r;
}

BeranResult beran_mle(const Panel& panel, double h) { return beran_mle(panel.values, h); }

double GegenbauerBasis::eval(int k, double x) const {
    double prev = 0.0, cur = 1.0 / std::sqrt(h0);
    for (int j = 0; j < k; ++j) {
        const double next = (x * cur - (j > 0 ? b[j - 1] : 0.0) * prev) / b[j];
        prev = cur;
        cur = next;
    }
    return cur;
}

std::vector<double> GegenbauerBasis::eval_all(double x) const {
    std::vector<double> v(static_cast<std::size_t>(K) + 1);
    v[0] = 1.0 / std::sqrt(h0);
    for (int j = 0; j < K; ++j) v[j + 1] = (x * v[j] - (j > 0 ? b[j - 1] * v[j - 1] : 0.0)) / b[j];
    return v;
}

namespace {

// Monic recurrence coefficient beta_k of the Gegenbauer family, k >= 1.
double monic_beta(double alpha, int k) {
    if (k == 1) return 1.0 / (2.0 * alpha + 3.0);
    const double kk = k;
    return kk * (kk + 2.0 * alpha) / (4.0 * (kk + alpha + 0.5) * (kk + alpha - 0.5));
}

double weight_integral(double alpha) {
    return std::sqrt(std::numbers::pi) * std::exp(std::lgamma(alpha + 1.0) - std::lgamma(alpha + 1.5));
}

}  // namespace

GegenbauerBasis build_gegenbauer_basis(double alpha, int K) {
    if (!(alpha > -1.0)) throw std::invalid_argument("Gegenbauer weight exponent must exceed -1");
    if (K < 0 || K > kGegenbauerMaxK) throw std::invalid_argument("Gegenbauer order must lie in [0, 30]");
    GegenbauerBasis B{alpha, K, {}, weight_integral(alpha), {}};
    for (int k = 1; k <= K + 1; ++k) B.b.push_back(std::sqrt(monic_beta(alpha, k)));
    B.g.assign(static_cast<std::size_t>(K) + 1, {});
    B.g[0] = {1.0 / std::sqrt(B.h0)};
    for (int k = 0; k < K; ++k) {
        std::vector<double> next(static_cast<std::size_t>(k) + 2, 0.0);
        for (std::size_t j = 0; j < B.g[k].size(); ++j) next[j + 1] += B.g[k][j];
        if (k > 0)
            for (std::size_t j = 0; j < B.g[k - 1].size(); ++j) next[j] -= B.b[k - 1] * B.g[k - 1][j];
        for (auto& c : next) c /= B.b[k];
        B.g[k + 1] = std::move(next);
    }
    return B;
}

GaussGrid gauss_gegenbauer_grid(double alpha, int size) {
    if (size < 1) throw std::invalid_argument("grid size must be positive");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(size, size);
    for (int k = 1; k < size; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(monic_beta(alpha, k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double h0 = weight_integral(alpha);
    GaussGrid g;
    for (int i = 0; i < size; ++i) {
        g.x.push_back(es.eigenvalues()(i));
        const double v = es.eigenvectors()(0, i);
        g.w.push_back(h0 * v * v);
    }
    return g;
}

double gegenbauer_gamma_bound() { return 1.0 / (2.0 * std::log(1.0 + std::sqrt(2.0))); }

int gegenbauer_order(std::size_t n, double gamma_rate) {
    if (!(gamma_rate > 0.0 && gamma_rate < gegenbauer_gamma_bound()))
        throw std::invalid_argument("gamma rate must lie in (0, (2 log(1+sqrt 2))^-1)");
    return static_cast<int>(std::floor(gamma_rate * std::log(static_cast<double>(n))));
}

DensityEstimate gegenbauer_estimate_from_cov(std::span<const double> gamma_hat, double alpha_weight, int K,
                                             std::optional<double> sigma2, int grid_size) {
    const GegenbauerBasis B = build_gegenbauer_basis(alpha_weight, K);
    if (gamma_hat.size() < static_cast<std::size_t>(K) + 3) throw std::invalid_argument("need covariances up to lag K + 2");
    const double s2 = sigma2 ? *sigma2 : gamma_hat[0] - gamma_hat[2];
    if (!(s2 > 0.0)) throw NumericalError("variance plug-in is not positive");
    DensityEstimate est;
    est.alpha_weight = alpha_weight;
    est.K = K;
    est.sigma2_used = s2;
    for (int k = 0; k <= K; ++k) {
        double z = 0.0;
        for (int j = 0; j <= k; ++j) z += B.g[k][j] * (gamma_hat[j] - gamma_hat[j + 2]);
        est.coefficients.push_back(z);
    }
    const GaussGrid grid = gauss_gegenbauer_grid(alpha_weight, grid_size);
    for (std::size_t i = 0; i < grid.x.size(); ++i) {
        const double x = grid.x[i];
        const double w = std::pow(1.0 - x * x, alpha_weight);
        const auto G = B.eval_all(x);
        double s = 0.0;
        for (int k = 0; k <= K; ++k) s += est.coefficients[k] * G[k];
        est.grid.push_back(x);
        est.values.push_back(w * s / s2);
        est.l2_weights.push_back(grid.w[i] / (w * w));
    }
    return est;
}

std::vector<double> zero_mean_sample_cov(std::span<const double> x, int k_max) {
    const std::size_t n = x.size();
    if (k_max < 0 || static_cast<std::size_t>(k_max) >= n) throw std::invalid_argument("lag out of range");
    std::vector<double> g(static_cast<std::size_t>(k_max) + 1);
    for (int k = 0; k <= k_max; ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) s += x[t] * x[t + k];
        g[k] = s / static_cast<double>(n);
    }
    return g;
}

DensityEstimate gegenbauer_estimate(std::span<const double> series, double alpha_weight, const GegenbauerOptions& opts) {
    if (series.size() < 32) throw std::invalid_argument("series must have at least 32 observations");
    int K;
    if (opts.K) K = *opts.K;
    else if (opts.gamma_rate) K = gegenbauer_order(series.size(), *opts.gamma_rate);
    else throw std::invalid_argument("either K or gamma_rate is required");
    const auto g = zero_mean_sample_cov(series, K + 2);
    return gegenbauer_estimate_from_cov(g, alpha_weight, K, opts.sigma2, opts.grid_size);
}

std::vector<double> on_grid(const DensityEstimate& est, const std::function<double(double)>& f) {
    std::vector<double> v;
    for (double x : est.grid) v.push_back(f(x));
    return v;
}

std::vector<double> mixing_on_grid(const DensityEstimate& est, const MixingSpec& mixing) {
    return on_grid(est, [&](double x) { return x >= 0.0 ? density(mixing, x) : 0.0; });
}

double weighted_l2_error(const DensityEstimate& est, std::span<const double> reference, double alpha_weight) {
    if (reference.size() != est.values.size()) throw std::invalid_argument("estimate and reference grids differ");
    if (alpha_weight != est.alpha_weight) throw std::invalid_argument("weight exponent differs from the estimate's");
    double s = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = est.values[i] - reference[i];
        s += est.l2_weights[i] * d * d;
    }
    return s;
}

GaussianAggregateSampler::GaussianAggregateSampler(const MixingSpec& mixing, double sigma2, std::size_t n) : n_(n) {
    if (n == 0 || n > kMaxLength) throw ResourceLimitError("Gaussian aggregate sampler supports 1 <= n <= 4096");
    std::vector<double> g(n);
    for (std::size_t t = 0; t < n; ++t) g[t] = theoretical_cov(mixing, sigma2, static_cast<int>(t));
    Eigen::MatrixXd C(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) C(i, j) = g[i > j ? i - j : j - i];
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() != Eigen::Success) throw NumericalError("covariance matrix is not positive definite");
    lower_ = llt.matrixL();
}

std::vector<double> GaussianAggregateSampler::sample(Stream& stream) const {
    Eigen::VectorXd z(static_cast<Eigen::Index>(n_));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = stream.normal();
    const Eigen::VectorXd x = lower_.triangularView<Eigen::Lower>() * z;
    return {x.data(), x.data() + x.size()};
}

}  // namespace aggrolab
