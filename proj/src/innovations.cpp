#include "aggrolab/innovations.hpp"

#include "aggrolab/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace aggrolab {

namespace {

constexpr double kPi = std::numbers::pi;

void check_stable(double alpha, double skew, double scale) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("stable alpha must lie in (0,2]");
    if (!(std::abs(skew) <= 1.0)) throw std::invalid_argument("stable skew must lie in [-1,1]");
    if (!(scale > 0.0)) throw std::invalid_argument("stable scale must be positive");
}

void check_small_jumps(const LevySmallJumpSpec& s) {
    if (!(s.alpha0 > 0.0 && s.alpha0 < 2.0)) throw std::invalid_argument("alpha0 must lie in (0,2)");
    if (!(s.c_plus >= 0.0 && s.c_minus >= 0.0 && s.c_plus + s.c_minus > 0.0))
        throw std::invalid_argument("c_plus, c_minus must be nonnegative with positive sum");
    if (!(s.cutoff > 0.0 && s.cutoff <= 1.0)) throw std::invalid_argument("cutoff must lie in (0,1]");
}

// Integral of x * alpha0 * x^(-alpha0-1) over [lo, hi].
double first_moment_density(double alpha0, double lo, double hi) {
    if (hi <= lo) return 0.0;
    if (std::abs(alpha0 - 1.0) < 1e-12) return std::log(hi / lo);
    return alpha0 / (1.0 - alpha0) * (std::pow(hi, 1.0 - alpha0) - std::pow(lo, 1.0 - alpha0));
}

struct RootPlan {
    double drift = 0.0;
    double gauss_sd = 0.0;
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    double tail_lo = 0.0;  // eps^-alpha0
    double tail_hi = 0.0;  // cutoff^-alpha0
    double alpha0 = 1.0;
    bool has_small = false;
    std::vector<JumpAtom> atoms;  // rates already divided by N
};

RootPlan make_plan(const IdTriplet& spec, std::size_t N) {
    const double n = static_cast<double>(N);
    RootPlan p;
    p.drift = spec.mu / n;
    double gvar = spec.sigma * spec.sigma;
    if (spec.small_jumps) {
        const auto& s = *spec.small_jumps;
        const double eps = std::min(spec.epsilon, s.cutoff);
        gvar += small_jump_variance(s, eps);
        p.has_small = eps < s.cutoff;
        p.alpha0 = s.alpha0;
        p.tail_lo = std::pow(eps, -s.alpha0);
        p.tail_hi = std::pow(s.cutoff, -s.alpha0);
        p.lambda_plus = s.c_plus * (p.tail_lo - p.tail_hi) / n;
        p.lambda_minus = s.c_minus * (p.tail_lo - p.tail_hi) / n;
        // Jumps in [eps, cutoff] all fall inside the truncation window |x| <= 1.
        const double m1 = first_moment_density(s.alpha0, eps, s.cutoff);
        p.drift -= (s.c_plus - s.c_minus) * m1 / n;
    }
    p.gauss_sd = std::sqrt(gvar / n);
    for (const auto& a : spec.big_jumps) {
        p.atoms.push_back({a.x, a.rate / n});
        if (std::abs(a.x) <= 1.0) p.drift -= a.rate * a.x / n;
    }
    return p;
}

struct RootSampler {
    RootPlan plan;
    std::poisson_distribution<long> pois_plus;
    std::poisson_distribution<long> pois_minus;
    std::vector<std::poisson_distribution<long>> pois_atoms;

    explicit RootSampler(RootPlan p)
        : plan(std::move(p)),
          pois_plus(plan.lambda_plus > 0 ? plan.lambda_plus : 1.0),
          pois_minus(plan.lambda_minus > 0 ? plan.lambda_minus : 1.0) {
        for (const auto& a : plan.atoms) pois_atoms.emplace_back(a.rate > 0 ? a.rate : 1.0);
    }

    double jump_size(Stream& s) const {
        return std::pow(plan.tail_hi + s.uniform() * (plan.tail_lo - plan.tail_hi), -1.0 / plan.alpha0);
    }

    double draw(Stream& s) {
        double x = plan.drift;
        if (plan.gauss_sd > 0.0) x += plan.gauss_sd * s.normal();
        if (plan.has_small) {
            if (plan.lambda_plus > 0.0) {
                const long k = pois_plus(s);
                for (long j = 0; j < k; ++j) x += jump_size(s);
            }
            if (plan.lambda_minus > 0.0) {
                const long k = pois_minus(s);
                for (long j = 0; j < k; ++j) x -= jump_size(s);
            }
        }
        for (std::size_t i = 0; i < plan.atoms.size(); ++i) {
            if (plan.atoms[i].rate <= 0.0) continue;
            x += static_cast<double>(pois_atoms[i](s)) * plan.atoms[i].x;
        }
        return x;
    }
};

}  // namespace

void validate(const InnovationSpec& spec) {
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                if (!(v.sigma > 0.0)) throw std::invalid_argument("Gaussian sigma must be positive");
            } else if constexpr (std::is_same_v<T, Stable>) {
                check_stable(v.alpha, v.skew, v.scale);
            } else if constexpr (std::is_same_v<T, DomainAttraction>) {
                if (!(v.alpha > 0.0 && v.alpha < 2.0)) throw std::invalid_argument("tail index must lie in (0,2)");
                if (!(v.tail_const > 0.0)) throw std::invalid_argument("tail constant must be positive");
            } else {
                if (!(v.sigma >= 0.0)) throw std::invalid_argument("ID Gaussian part must be nonnegative");
                if (!(v.epsilon > 0.0)) throw std::invalid_argument("small-jump threshold must be positive");
                if (v.small_jumps) check_small_jumps(*v.small_jumps);
                for (const auto& a : v.big_jumps) {
                    if (!(a.rate >= 0.0) || !std::isfinite(a.x) || a.x == 0.0)
                        throw std::invalid_argument("jump atoms need a nonzero location and nonnegative rate");
                    if (v.small_jumps && std::abs(a.x) < v.small_jumps->cutoff)
                        throw std::invalid_argument("jump atoms must lie beyond the small-jump cutoff");
                }
                if (!std::isfinite(levy_second_moment(v)))
                    throw std::invalid_argument("Levy measure has infinite second moment");
            }
        },
        spec);
}

std::string name(const InnovationSpec& spec) {
    constexpr const char* names[] = {"gaussian", "stable", "domain_attraction", "id_triplet"};
    return names[spec.index()];
}

double innovation_alpha(const InnovationSpec& spec) {
    if (const auto* s = std::get_if<Stable>(&spec)) return s->alpha;
    if (const auto* d = std::get_if<DomainAttraction>(&spec)) return d->alpha;
    return 2.0;
}

bool has_finite_variance(const InnovationSpec& spec) {
    if (const auto* s = std::get_if<Stable>(&spec)) return s->alpha == 2.0;
    return !std::holds_alternative<DomainAttraction>(spec);
}

double variance(const InnovationSpec& spec) {
    if (!has_finite_variance(spec)) throw std::invalid_argument("innovation law has infinite variance");
    if (const auto* g = std::get_if<Gaussian>(&spec)) return g->sigma * g->sigma;
    if (const auto* s = std::get_if<Stable>(&spec)) return 2.0 * s->scale * s->scale;
    const auto& id = std::get<IdTriplet>(spec);
    return id.sigma * id.sigma + levy_second_moment(id);
}

std::vector<double> sample_gaussian(double sigma, std::size_t n, Stream& stream) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (n == 0) throw std::invalid_argument("n must be positive");
    std::vector<double> out(n);
    for (auto& x : out) x = sigma * stream.normal();
    return out;
}

double draw_stable(double alpha, double skew, double scale, Stream& stream) {
    const double v = kPi * (stream.uniform() - 0.5);
    const double w = stream.exponential();
    if (alpha == 1.0) {
        const double h = 0.5 * kPi + skew * v;
        const double x = (2.0 / kPi) * (h * std::tan(v) - skew * std::log(0.5 * kPi * w * std::cos(v) / h));
        return scale * x + (2.0 / kPi) * skew * scale * std::log(scale);
    }
    const double t = skew * std::tan(0.5 * kPi * alpha);
    const double b = std::atan(t) / alpha;
    const double s = std::pow(1.0 + t * t, 1.0 / (2.0 * alpha));
    const double x = s * std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1.0 / alpha) *
                     std::pow(std::cos(v - alpha * (v + b)) / w, (1.0 - alpha) / alpha);
    return scale * x;
}

std::vector<double> sample_stable(double alpha, double skew, double scale, std::size_t n,
                                  Stream& stream) {
    check_stable(alpha, skew, scale);
    std::vector<double> out(n);
    for (auto& x : out) x = draw_stable(alpha, skew, scale, stream);
    return out;
}

std::complex<double> stable_cf(double theta, double alpha, double skew, double scale) {
    check_stable(alpha, skew, scale);
    if (theta == 0.0) return {1.0, 0.0};
    const double at = std::abs(theta);
    const double sg = theta > 0 ? 1.0 : -1.0;
    std::complex<double> logcf;
    if (alpha == 1.0) {
        logcf = {-scale * at, -scale * at * skew * (2.0 / kPi) * sg * std::log(at)};
    } else {
        const double m = std::pow(scale * at, alpha);
        logcf = {-m, m * skew * sg * std::tan(0.5 * kPi * alpha)};
    }
    return std::exp(logcf);
}

std::vector<double> sample_domain_attraction(double alpha, std::size_t n, Stream& stream,
                                             double tail_const) {
    validate(DomainAttraction{alpha, tail_const});
    const double x0 = std::pow(tail_const, 1.0 / alpha);
    std::vector<double> out(n);
    for (auto& x : out) {
        const double sign = stream.uniform() < 0.5 ? -1.0 : 1.0;
        x = sign * x0 * std::pow(stream.uniform(), -1.0 / alpha);
    }
    return out;
}

double domain_attraction_scale(double alpha, double tail_const) {
    validate(DomainAttraction{alpha, tail_const});
    double c_alpha;
    if (alpha == 1.0)
        c_alpha = 2.0 / kPi;
    else
        c_alpha = (1.0 - alpha) / (std::tgamma(2.0 - alpha) * std::cos(0.5 * kPi * alpha));
    return std::pow(tail_const / c_alpha, 1.0 / alpha);
}

double small_jump_variance(const LevySmallJumpSpec& s, double eps) {
    const double e = std::min(eps, s.cutoff);
    return (s.c_plus + s.c_minus) * s.alpha0 * std::pow(e, 2.0 - s.alpha0) / (2.0 - s.alpha0);
}

double levy_second_moment(const IdTriplet& spec) {
    double m = 0.0;
    if (spec.small_jumps) m += small_jump_variance(*spec.small_jumps, spec.small_jumps->cutoff);
    for (const auto& a : spec.big_jumps) m += a.rate * a.x * a.x;
    return m;
}

std::complex<double> id_cf(double theta, const IdTriplet& spec) {
    std::complex<double> e{-0.5 * spec.sigma * spec.sigma * theta * theta, spec.mu * theta};
    if (spec.small_jumps) {
        const auto& s = *spec.small_jumps;
        // e^{i th x} - 1 - i th x for x > 0 and for x < 0 weighted by the density.
        auto re = [&](double x) { return (std::cos(theta * x) - 1.0) * s.alpha0 * std::pow(x, -s.alpha0 - 1.0); };
        auto im = [&](double x) {
            return (std::sin(theta * x) - theta * x) * s.alpha0 * std::pow(x, -s.alpha0 - 1.0);
        };
        const double r = quad::finite(re, 0.0, s.cutoff, 1e-12);
        const double i = quad::finite(im, 0.0, s.cutoff, 1e-12);
        e += std::complex<double>{(s.c_plus + s.c_minus) * r, (s.c_plus - s.c_minus) * i};
    }
    for (const auto& a : spec.big_jumps) {
        const double comp = std::abs(a.x) <= 1.0 ? theta * a.x : 0.0;
        e += a.rate * std::complex<double>{std::cos(theta * a.x) - 1.0, std::sin(theta * a.x) - comp};
    }
    return std::exp(e);
}

RowMatrix sample_id_array(const IdTriplet& spec, std::size_t N, std::size_t n, Stream& stream) {
    if (N == 0 || n == 0) throw std::invalid_argument("array dimensions must be positive");
    validate(spec);
    RootSampler sampler(make_plan(spec, N));
    RowMatrix out(n, N);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t i = 0; i < N; ++i) out(t, i) = sampler.draw(stream);
    return out;
}

std::vector<double> sample_innovations(const InnovationSpec& spec, std::size_t n, Stream& stream,
                                       std::size_t root) {
    std::vector<double> out(n);
    if (const auto* id = std::get_if<IdTriplet>(&spec)) {
        RootSampler sampler(make_plan(*id, root));
        for (auto& x : out) x = sampler.draw(stream);
        return out;
    }
    for (auto& x : out) x = draw_innovation(spec, stream, root);
    return out;
}

double draw_innovation(const InnovationSpec& spec, Stream& stream, std::size_t root) {
    return std::visit(
        [&](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return v.sigma * stream.normal();
            } else if constexpr (std::is_same_v<T, Stable>) {
                return draw_stable(v.alpha, v.skew, v.scale, stream);
            } else if constexpr (std::is_same_v<T, DomainAttraction>) {
                const double sign = stream.uniform() < 0.5 ? -1.0 : 1.0;
                return sign * std::pow(v.tail_const / stream.uniform(), 1.0 / v.alpha);
            } else {
                RootSampler sampler(make_plan(v, root));
                return sampler.draw(stream);
            }
        },
        spec);
}

}  // namespace aggrolab
