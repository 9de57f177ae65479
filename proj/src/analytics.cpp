#include "aggrolab/analytics.hpp"

#include "aggrolab/errors.hpp"
#include "aggrolab/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace aggrolab {

namespace {

constexpr double kPi = std::numbers::pi;

double require_positive_beta(const MixingSpec& mixing) {
    const auto beta = tail_exponent(mixing);
    if (!beta) throw std::invalid_argument("mixing density needs a declared tail exponent");
    if (!(*beta > 0.0)) throw std::invalid_argument("aggregate variance is infinite for beta <= 0");
    return *beta;
}

// x^t with x = 1-u, accurate for small u.
double pow_near_one(double x, double u, double t) {
    if (t == 0.0) return 1.0;
    return x < 0.5 ? std::pow(x, t) : std::exp(t * std::log1p(-u));
}

}  // namespace

double beta_type_cov_closed_form(double p, double q, double sigma2, int t) {
    if (t < 0) throw std::invalid_argument("lag must be nonnegative");
    if (!(p > 0.0 && q > 1.0)) throw std::invalid_argument("BetaType needs p > 0 and q > 1");
    return sigma2 * boost::math::tgamma(q - 1.0) / boost::math::beta(p, q) *
           boost::math::tgamma_delta_ratio(p + 0.5 * t, q - 1.0);
}

double theoretical_cov_quadrature(const MixingSpec& mixing, double sigma2, int t) {
    if (t < 0) throw std::invalid_argument("lag must be nonnegative");
    require_positive_beta(mixing);
    const double tt = t;
    return sigma2 * integrate_mixing(
                        mixing, [tt](double x, double u) { return pow_near_one(x, u, tt) / (u * (1.0 + x)); },
                        t > 0 ? 1.0 / tt : 0.0);
}

double theoretical_cov(const MixingSpec& mixing, double sigma2, int t) {
    if (const auto* b = std::get_if<BetaType>(&mixing.variant())) return beta_type_cov_closed_form(b->p, b->q, sigma2, t);
    return theoretical_cov_quadrature(mixing, sigma2, t);
}

double spectral_density(const MixingSpec& mixing, double sigma2, double y) {
    if (!(std::abs(y) <= kPi)) throw std::invalid_argument("frequency must lie in [-pi, pi]");
    const auto beta = tail_exponent(mixing);
    if (y == 0.0 && (!beta || *beta <= 1.0))
        throw std::invalid_argument("spectral density is unbounded at frequency 0 for beta <= 1");
    const double s = std::sin(0.5 * y);
    const double s2 = 4.0 * s * s;
    const double v = integrate_mixing(
        mixing,
        [s2](double x, double u) {
            const double d = u * u + x * s2;
            return d > 0.0 ? 1.0 / d : 0.0;
        },
        std::abs(2.0 * s), 1e-12);
    return sigma2 / (2.0 * kPi) * v;
}

double spectral_tail_integral(double beta) {
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("tail integral needs beta in [0,1)");
    // Fold (1, inf) onto (0, 1) with w -> 1/w.
    return quad::finite(
        [beta](double w) { return w == 0.0 ? (beta == 0.0 ? 2.0 : 0.0) : (std::pow(w, beta) + std::pow(w, -beta)) / (1.0 + w * w); },
        0.0, 1.0, 1e-14);
}

AsymptoticConstants asymptotic_constants(const MixingSpec& mixing, double sigma2) {
    const TailParams tp = tail_params(mixing);
    if (!(tp.beta > 0.0 && tp.beta < 1.0)) throw std::invalid_argument("asymptotic constants need beta in (0,1)");
    return {sigma2 * 0.5 * tp.c_phi * std::tgamma(tp.beta), sigma2 * tp.c_phi / (2.0 * kPi) * spectral_tail_integral(tp.beta)};
}

double sample_cov(std::span<const double> x, int k) {
    const std::size_t n = x.size();
    if (k < 0 || static_cast<std::size_t>(k) >= n) throw std::invalid_argument("lag out of range");
    quad::Sum m;
    for (double v : x) m.add(v);
    const double mean = m.value() / static_cast<double>(n);
    quad::Sum s;
    for (std::size_t t = 0; t + k < n; ++t) s.add((x[t] - mean) * (x[t + k] - mean));
    return s.value() / static_cast<double>(n);
}

double panel_cov(const RowMatrix& values, int k) {
    const auto N = static_cast<std::size_t>(values.rows());
    const auto n = static_cast<std::size_t>(values.cols());
    if (k < 0 || static_cast<std::size_t>(k) >= n) throw std::invalid_argument("lag out of range");
    quad::Sum s;
    for (std::size_t j = 0; j < N; ++j) {
        const double* row = values.row(j).data();
        double acc = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) acc += row[t] * row[t + k];
        s.add(acc);
    }
    return s.value() / (static_cast<double>(n - k + 1) * static_cast<double>(N));
}

double panel_cov(const Panel& panel, int k) { return panel_cov(panel.values, k); }

nlohmann::json RegimeReport::to_json() const {
    nlohmann::json j{{"memory", memory}, {"region", region}, {"growth_case", growth}, {"limit", limit},
                     {"boundary", boundary}, {"normalization_exponents", exponents}};
    j["H"] = H ? nlohmann::json(*H) : nlohmann::json(nullptr);
    if (!note.empty()) j["note"] = note;
    return j;
}

RegimeReport classify_memory(double alpha, double beta) {
    if (!(alpha > 1.0 && alpha <= 2.0)) throw std::invalid_argument("classify_memory needs alpha in (1,2]");
    if (!(beta > -1.0 && std::isfinite(beta))) throw std::invalid_argument("classify_memory needs beta > -1");
    RegimeReport r;
    if (beta == 0.0 || beta == alpha - 1.0) {
        r.memory = "boundary";
        r.boundary = true;
        r.note = beta == 0.0 ? "beta = 0 separates degenerate and nondegenerate aggregation"
                             : "beta = alpha - 1 separates long and short memory";
        return r;
    }
    if (beta < 0.0) {
        r.memory = "degenerate";
        r.exponents = {1.0 / (alpha * (1.0 + beta))};
        r.limit = "random constant";
        return r;
    }
    r.exponents = {1.0 / alpha};
    if (beta < alpha - 1.0) {
        r.memory = "long";
        r.H = 1.0 - beta / alpha;
        r.limit = alpha == 2.0 ? "fBm" : "Lambda_{alpha,beta}";
    } else {
        r.memory = "short";
        r.H = 1.0 / alpha;
        r.limit = alpha == 2.0 ? "Brownian motion" : "stable Levy";
    }
    return r;
}

RegimeReport classify_region(double beta, double sigma, double alpha0) {
    if (!(beta > 0.0 && std::isfinite(beta))) throw std::invalid_argument("classify_region needs beta > 0");
    if (!(sigma >= 0.0)) throw std::invalid_argument("classify_region needs sigma >= 0");
    if (!(alpha0 > 0.0 && alpha0 < 2.0)) throw std::invalid_argument("classify_region needs alpha0 in (0,2)");
    RegimeReport r;
    if (beta == 1.0 || (beta < 1.0 && sigma == 0.0 && alpha0 == 1.0 + beta)) {
        r.memory = "boundary";
        r.boundary = true;
        r.note = beta == 1.0 ? "beta = 1 separates regions (i)-(iii) from (iv)" : "alpha0 = 1 + beta separates (ii) and (iii)";
        return r;
    }
    if (beta > 1.0) {
        r.memory = "short";
        r.region = "iv";
        r.H = 0.5;
        r.exponents = {-0.5};
        r.limit = "Brownian motion";
    } else if (sigma > 0.0) {
        r.memory = "long";
        r.region = "i";
        r.H = 1.0 - beta / 2.0;
        r.exponents = {beta / 2.0 - 1.0};
        r.limit = "fBm";
    } else if (alpha0 > 1.0 + beta) {
        r.memory = "long";
        r.region = "ii";
        r.H = 1.0 - beta / alpha0;
        r.exponents = {beta / alpha0 - 1.0};
        r.limit = "Lambda_{alpha0,beta}";
    } else {
        r.memory = "short";
        r.region = "iii";
        r.H = 1.0 / (1.0 + beta);
        r.exponents = {-1.0 / (1.0 + beta)};
        r.limit = "(1+beta)-stable Levy";
    }
    return r;
}

RegimeReport classify_growth(double N, double n, double beta) {
    const GrowthReport g = growth_case(N, n, beta);
    RegimeReport r;
    r.growth = to_string(g.growth);
    r.exponents = {-g.N_exponent, -g.n_exponent};
    switch (g.growth) {
        case GrowthCase::Fast:
            r.limit = "fBm";
            if (beta > 0.0) r.H = 1.0 - beta / 2.0;
            else r.note = "the fast-growth limit is stated for 0 < beta < 1";
            break;
        case GrowthCase::Slow: r.limit = "sub-Gaussian W_beta"; break;
        case GrowthCase::Intermediate: r.limit = "intermediate Z_beta"; break;
    }
    return r;
}

double partial_sum_slope(std::span<const std::pair<double, double>> pts) {
    if (pts.size() < 4) throw std::invalid_argument("slope fit needs at least 4 points");
    const double ratio = pts[1].first / pts[0].first;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!(pts[i].second > 0.0)) throw std::invalid_argument("variance estimates must be positive");
        if (i > 0 && std::abs(pts[i].first / pts[i - 1].first - ratio) > 1e-9 * ratio)
            throw std::invalid_argument("n values must be geometrically spaced");
    }
    double mx = 0, my = 0;
    for (const auto& [n, v] : pts) {
        mx += std::log(n);
        my += std::log(v);
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxy = 0, sxx = 0;
    for (const auto& [n, v] : pts) {
        sxy += (std::log(n) - mx) * (std::log(v) - my);
        sxx += (std::log(n) - mx) * (std::log(n) - mx);
    }
    return sxy / sxx;
}

double theoretical_partial_sum_variance(const MixingSpec& mixing, double sigma2, std::size_t n) {
    if (n == 0) throw std::invalid_argument("n must be positive");
    require_positive_beta(mixing);
    const double nn = static_cast<double>(n);
    // Power sums M_k = sum_{|t|<n} (n-|t|) |t|^k for the small-u expansion.
    constexpr int kTerms = 12;
    std::array<long double, kTerms> M{};
    for (std::size_t t = 0; t < n; ++t) {
        const long double w = (t == 0 ? 1.0L : 2.0L) * static_cast<long double>(n - t);
        long double p = 1.0L;
        for (int k = 0; k < kTerms; ++k) {
            M[k] += w * p;
            p *= static_cast<long double>(t);
        }
    }
    auto kernel = [&](double x, double u) {
        const double L = x < 0.5 ? std::log(x) : std::log1p(-u);
        if (nn * std::abs(L) < 0.1) {
            long double s = 0.0L, term = 1.0L;
            for (int k = 0; k < kTerms; ++k) {
                s += M[k] * term;
                term *= static_cast<long double>(L) / (k + 1);
            }
            return static_cast<double>(s);
        }
        const double one_minus_xn = -std::expm1(nn * L);
        return (nn * (1.0 + x) * u - 2.0 * x * one_minus_xn) / (u * u);
    };
    return sigma2 * integrate_mixing(
                        mixing, [&](double x, double u) { return kernel(x, u) / (u * (1.0 + x)); }, 1.0 / nn);
}

double partial_sum_variance_direct(const MixingSpec& mixing, double sigma2, std::size_t n) {
    quad::Sum s;
    s.add(static_cast<double>(n) * theoretical_cov(mixing, sigma2, 0));
    for (std::size_t t = 1; t < n; ++t)
        s.add(2.0 * static_cast<double>(n - t) * theoretical_cov(mixing, sigma2, static_cast<int>(t)));
    return s.value();
}

double theoretical_partial_sum_slope(const MixingSpec& mixing, double sigma2, std::span<const std::size_t> ns) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t n : ns) pts.emplace_back(static_cast<double>(n), theoretical_partial_sum_variance(mixing, sigma2, n));
    return partial_sum_slope(pts);
}

double limit_kernel(double x, double tau1, double tau2) {
    if (!(x > 0.0) || tau1 <= 0.0 || tau2 <= 0.0) return 0.0;
    auto f = [x](double t) { return t > 0.0 ? -std::expm1(-x * t) / x : 0.0; };
    // s < 0 contributes (1-e^{-x t1})(1-e^{-x t2}) / (2 x^3).
    const double a1 = f(tau1) * f(tau2) / (2.0 * x);
    const double lo = std::min(tau1, tau2), hi = std::max(tau1, tau2);
    if (x * hi < 0.1) {
        const double a2 = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double s) { return f(tau1 - s) * f(tau2 - s); }, 0.0, lo, 15, 1e-14);
        return a1 + a2;
    }
    // Closed form of int_0^lo (1 - e^{-x(hi-s)})(1 - e^{-x(lo-s)}) ds / x^2.
    const double A = std::exp(-x * hi), B = std::exp(-x * lo), D = std::exp(-x * (hi - lo));
    const double a2 = (lo - (D + 1.0 - A - B) / x + (D - A * B) / (2.0 * x)) / (x * x);
    return a1 + a2;
}

double limit_process_cov(double beta, double tau1, double tau2, double c_phi) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("limit_process_cov needs beta in (0,1)");
    if (!(tau1 >= 0.0 && tau2 >= 0.0)) throw std::invalid_argument("times must be nonnegative");
    if (tau1 == 0.0 || tau2 == 0.0) return 0.0;
    const double tmax = std::max(tau1, tau2), tmin = std::min(tau1, tau2);
    return c_phi * quad::positive_axis(
                       [&](double x) { return x == 0.0 ? 0.0 : std::pow(x, beta) * limit_kernel(x, tau1, tau2); },
                       1e-3 / tmax, 1e3 / tmin, 1e-12);
}

std::complex<double> intermediate_cf(double beta, double sigma2, std::span<const double> thetas,
                                     std::span<const double> taus, double c_phi) {
    if (!(beta > -1.0 && beta < 1.0)) throw std::invalid_argument("outer integral diverges unless beta lies in (-1,1)");
    if (thetas.size() != taus.size() || thetas.empty()) throw std::invalid_argument("theta and tau lists must match");
    double scale = 0.0, tmax = 0.0, tmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < taus.size(); ++j) {
        if (!(taus[j] >= 0.0)) throw std::invalid_argument("times must be nonnegative");
        if (taus[j] > 0.0 && thetas[j] != 0.0) {
            scale += std::abs(thetas[j]) * taus[j];
            tmax = std::max(tmax, taus[j]);
            tmin = std::min(tmin, taus[j]);
        }
    }
    if (scale == 0.0) return {1.0, 0.0};
    const std::size_t m = taus.size();
    auto q = [&](double x) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (thetas[j] == 0.0) continue;
            for (std::size_t k = j; k < m; ++k) {
                if (thetas[k] == 0.0) continue;
                const double w = (j == k ? 1.0 : 2.0) * thetas[j] * thetas[k];
                s += w * limit_kernel(x, taus[j], taus[k]);
            }
        }
        return s;
    };
    // Q(x) ~ (sum theta tau)^2 / (2x) near 0; the integrand turns over where sigma2 Q / 2 ~ 1.
    const double turn = sigma2 * scale * scale / 4.0;
    const double lo = std::min(turn, 1e-3 / tmax) * 1e-2;
    const double logcf = c_phi * quad::positive_axis(
                                     [&](double x) {
                                         if (x == 0.0) return beta < 0.0 ? 0.0 : -std::pow(0.0, beta);
                                         return std::expm1(-0.5 * sigma2 * q(x)) * std::pow(x, beta);
                                     },
                                     lo, 1e3 / tmin, 1e-12);
    return {std::exp(logcf), 0.0};
}

TailIndex tail_index(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 1000) throw std::invalid_argument("tail index needs at least 1000 observations");
    const auto k = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 0.6)));
    std::vector<double> a(n);
    std::transform(series.begin(), series.end(), a.begin(), [](double v) { return std::abs(v); });
    std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k), a.end(), std::greater<>());
    const double threshold = a[k];
    if (!(threshold > 0.0)) throw NumericalError("degenerate series: tail threshold is zero");
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += std::log(a[i] / threshold);
    if (!(s > 0.0)) throw NumericalError("degenerate series: no spread above the tail threshold");
    const double alpha = static_cast<double>(k) / s;
    const double half = 1.96 * alpha / std::sqrt(static_cast<double>(k));
    return {alpha, alpha - half, alpha + half, k};
}

std::vector<double> fourier_inversion_cov(const MixingSpec& mixing, double sigma2, int k_max, int log2_grid) {
    const double beta = require_positive_beta(mixing);
    const double p = std::max(2.0, std::ceil(2.0 / std::min(beta, 1.0)));
    const std::size_t M = std::size_t{1} << log2_grid;
    const double h = 1.0 / static_cast<double>(M);
    std::vector<quad::Sum> acc(static_cast<std::size_t>(k_max) + 1);
    for (std::size_t i = 1; i <= M; ++i) {
        const double s = static_cast<double>(i) * h;
        const double y = kPi * std::pow(s, p);
        const double w = (i == M ? 0.5 : 1.0) * h * kPi * p * std::pow(s, p - 1.0);
        const double fy = spectral_density(mixing, sigma2, y) * w;
        for (int k = 0; k <= k_max; ++k) acc[static_cast<std::size_t>(k)].add(2.0 * fy * std::cos(k * y));
    }
    std::vector<double> out;
    for (const auto& a : acc) out.push_back(a.value());
    return out;
}

}  // namespace aggrolab
