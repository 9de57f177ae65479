#include "aggrolab/mixing.hpp"

#include "aggrolab/quadrature.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace aggrolab {

namespace {

// Log-log interpolation table for a tail mass G(s) = integral of the density
// over [0, s] (s is the distance to a singular endpoint).
struct TailTable {
    std::vector<double> log_s;
    std::vector<double> log_g;

    double inverse(double g) const {
        const double lg = std::log(g);
        if (lg <= log_g.front()) {
            const double slope = (log_g[1] - log_g[0]) / (log_s[1] - log_s[0]);
            return std::exp(log_s.front() + (lg - log_g.front()) / slope);
        }
        if (lg >= log_g.back()) return std::exp(log_s.back());
        const auto it = std::upper_bound(log_g.begin(), log_g.end(), lg);
        const std::size_t i = static_cast<std::size_t>(it - log_g.begin()) - 1;
        const double w = (lg - log_g[i]) / (log_g[i + 1] - log_g[i]);
        return std::exp(log_s[i] + w * (log_s[i + 1] - log_s[i]));
    }
};

constexpr double kTableMin = 1e-12;
constexpr double kTableRatio = 0.97;

TailTable build_tail_table(const std::function<double(double)>& dens_of_s) {
    std::vector<double> nodes;
    for (double s = 0.5; s > kTableMin; s *= kTableRatio) nodes.push_back(s);
    std::reverse(nodes.begin(), nodes.end());
    TailTable t;
    quad::Sum acc;
    acc.add(quad::finite(dens_of_s, 0.0, nodes.front(), 1e-12));
    t.log_s.push_back(std::log(nodes.front()));
    t.log_g.push_back(std::log(acc.value()));
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        acc.add(quad::finite(dens_of_s, nodes[i - 1], nodes[i], 1e-12));
        t.log_s.push_back(std::log(nodes[i]));
        t.log_g.push_back(std::log(acc.value()));
    }
    return t;
}

double farima_density_unnormalized(double d, double x) {
    return std::pow(x, d - 1.0) * std::pow(1.0 - x, 1.0 - 2.0 * d) * (1.0 + x);
}

double farima_near_one_unnormalized(double d, double u) {
    return std::pow(1.0 - u, d - 1.0) * std::pow(u, 1.0 - 2.0 * d) * (2.0 - u);
}

}  // namespace

struct MixingSpec::Cache {
    double farima_c = 0.0;
    TailTable low;   // mass near x = 0 (Farima)
    TailTable high;  // mass near x = 1 (Farima)
    double mass_below_half = 0.0;
    // Tabulated: normalized node values and cumulative mass at the nodes.
    std::vector<double> tx, tf, tcum;
    double tab_scale = 1.0;
};

const MixingSpec::Cache& cache_of(const MixingSpec& s) { return *s.cache_; }

namespace {

double tab_density(const MixingSpec::Cache& c, double x) {
    const auto& xs = c.tx;
    if (x <= xs.front()) return c.tf.front();
    if (x >= xs.back()) return c.tf.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return c.tf[i] + w * (c.tf[i + 1] - c.tf[i]);
}

// Mass of [0, x] for the tabulated density.
double tab_cdf(const MixingSpec::Cache& c, double x) {
    const auto& xs = c.tx;
    if (x <= xs.front()) return c.tf.front() * x;
    if (x >= xs.back()) return c.tcum.back() + c.tf.back() * (x - xs.back());
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double h = x - xs[i];
    const double slope = (c.tf[i + 1] - c.tf[i]) / (xs[i + 1] - xs[i]);
    return c.tcum[i] + c.tf[i] * h + 0.5 * slope * h * h;
}

double tab_inverse(const MixingSpec::Cache& c, double u) {
    const auto& xs = c.tx;
    const double m0 = c.tf.front() * xs.front();
    if (u <= m0) return c.tf.front() > 0 ? u / c.tf.front() : xs.front();
    if (u >= c.tcum.back()) {
        const double x = xs.back() + (u - c.tcum.back()) / c.tf.back();
        return std::min(x, std::nextafter(1.0, 0.0));
    }
    const auto it = std::upper_bound(c.tcum.begin(), c.tcum.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - c.tcum.begin()) - 1;
    const double r = u - c.tcum[i];
    const double f0 = c.tf[i];
    const double slope = (c.tf[i + 1] - f0) / (xs[i + 1] - xs[i]);
    double h;
    if (std::abs(slope) < 1e-300) {
        h = r / f0;
    } else {
        // Solve 0.5*slope*h^2 + f0*h - r = 0 in a cancellation-free form.
        const double disc = std::sqrt(std::max(0.0, f0 * f0 + 2.0 * slope * r));
        h = 2.0 * r / (f0 + disc);
    }
    return std::clamp(xs[i] + h, xs[i], xs[i + 1]);
}

void validate_variant(const MixingVariant& v) {
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BetaType>) {
                if (!(m.p > 0.0 && m.q > 1.0)) throw std::invalid_argument("BetaType needs p > 0 and q > 1");
            } else if constexpr (std::is_same_v<T, CanonicalRegVar>) {
                if (!(m.beta > -1.0 && std::isfinite(m.beta)))
                    throw std::invalid_argument("CanonicalRegVar needs beta > -1");
            } else if constexpr (std::is_same_v<T, Farima>) {
                if (!(m.d > 0.0 && m.d < 0.5)) throw std::invalid_argument("Farima needs d in (0, 1/2)");
            } else {
                if (m.x.size() < 2 || m.x.size() != m.f.size())
                    throw std::invalid_argument("Tabulated needs at least two (x, f) pairs");
                for (std::size_t i = 0; i < m.x.size(); ++i) {
                    if (!(m.x[i] >= 0.0 && m.x[i] < 1.0)) throw std::invalid_argument("Tabulated x must lie in [0,1)");
                    if (i > 0 && !(m.x[i] > m.x[i - 1])) throw std::invalid_argument("Tabulated x must increase strictly");
                    if (!(m.f[i] >= 0.0 && std::isfinite(m.f[i]))) throw std::invalid_argument("Tabulated density must be nonnegative");
                }
                if (m.beta && !(*m.beta > -1.0)) throw std::invalid_argument("declared tail exponent must exceed -1");
            }
        },
        v);
}

}  // namespace

MixingSpec::MixingSpec(MixingVariant v) : v_(std::move(v)) {
    validate_variant(v_);
    auto c = std::make_shared<Cache>();
    if (const auto* f = std::get_if<Farima>(&v_)) {
        const double d = f->d;
        const double lo = quad::finite([d](double x) { return farima_density_unnormalized(d, x); }, 0.0, 0.5, 1e-14);
        const double hi = quad::finite([d](double u) { return farima_near_one_unnormalized(d, u); }, 0.0, 0.5, 1e-14);
        c->farima_c = 1.0 / (lo + hi);
        c->mass_below_half = lo * c->farima_c;
        const double cc = c->farima_c;
        c->low = build_tail_table([d, cc](double x) { return cc * farima_density_unnormalized(d, x); });
        c->high = build_tail_table([d, cc](double u) { return cc * farima_near_one_unnormalized(d, u); });
    } else if (const auto* t = std::get_if<Tabulated>(&v_)) {
        c->tx = t->x;
        c->tf = t->f;
        c->tcum.assign(t->x.size(), 0.0);
        for (std::size_t i = 1; i < t->x.size(); ++i)
            c->tcum[i] = c->tcum[i - 1] + 0.5 * (t->f[i] + t->f[i - 1]) * (t->x[i] - t->x[i - 1]);
        const double total = t->f.front() * t->x.front() + c->tcum.back() + t->f.back() * (1.0 - t->x.back());
        if (!(total > 0.0)) throw std::invalid_argument("Tabulated density has zero mass");
        for (auto& y : c->tf) y /= total;
        for (auto& y : c->tcum) y = y / total + c->tf.front() * t->x.front();
        c->tab_scale = 1.0 / total;
    }
    cache_ = std::move(c);
}

std::string MixingSpec::name() const {
    constexpr const char* names[] = {"beta_type", "canonical_regvar", "farima", "tabulated"};
    return names[v_.index()];
}

Tabulated load_tabulated_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open tabulated density file: " + path);
    Tabulated t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x, f;
        if (!(ss >> x >> f)) {
            if (t.x.empty()) continue;  // header row
            throw std::invalid_argument("malformed row in tabulated density file: " + line);
        }
        t.x.push_back(x);
        t.f.push_back(f);
    }
    return t;
}

double farima_constant(double d) { return cache_of(MixingSpec(Farima{d})).farima_c; }

double farima_innovation_variance(double d) {
    return std::sin(std::numbers::pi * d) / (std::numbers::pi * farima_constant(d));
}

double density(const MixingSpec& spec, double x) {
    if (!(x >= 0.0 && x < 1.0)) throw std::invalid_argument("density argument must lie in [0,1)");
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BetaType>) {
                return 2.0 / boost::math::beta(m.p, m.q) * std::pow(x, 2.0 * m.p - 1.0) *
                       std::pow(1.0 - x * x, m.q - 1.0);
            } else if constexpr (std::is_same_v<T, CanonicalRegVar>) {
                return (1.0 + m.beta) * std::pow(1.0 - x, m.beta);
            } else if constexpr (std::is_same_v<T, Farima>) {
                if (x == 0.0) return std::numeric_limits<double>::infinity();
                return cache_of(spec).farima_c * farima_density_unnormalized(m.d, x);
            } else {
                return tab_density(cache_of(spec), x);
            }
        },
        spec.variant());
}

double density_near_one(const MixingSpec& spec, double u) {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BetaType>) {
                return 2.0 / boost::math::beta(m.p, m.q) * std::pow(1.0 - u, 2.0 * m.p - 1.0) *
                       std::pow(u * (2.0 - u), m.q - 1.0);
            } else if constexpr (std::is_same_v<T, CanonicalRegVar>) {
                return (1.0 + m.beta) * std::pow(u, m.beta);
            } else if constexpr (std::is_same_v<T, Farima>) {
                return cache_of(spec).farima_c * farima_near_one_unnormalized(m.d, u);
            } else {
                return tab_density(cache_of(spec), 1.0 - u);
            }
        },
        spec.variant());
}

std::optional<double> tail_exponent(const MixingSpec& spec) {
    return std::visit(
        [](const auto& m) -> std::optional<double> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BetaType>) return m.q - 1.0;
            else if constexpr (std::is_same_v<T, CanonicalRegVar>) return m.beta;
            else if constexpr (std::is_same_v<T, Farima>) return 1.0 - 2.0 * m.d;
            else return m.beta;
        },
        spec.variant());
}

TailParams tail_params(const MixingSpec& spec) {
    return std::visit(
        [&](const auto& m) -> TailParams {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BetaType>) {
                return {2.0 / boost::math::beta(m.p, m.q) * std::pow(2.0, m.q - 1.0), m.q - 1.0};
            } else if constexpr (std::is_same_v<T, CanonicalRegVar>) {
                return {1.0 + m.beta, m.beta};
            } else if constexpr (std::is_same_v<T, Farima>) {
                return {2.0 * cache_of(spec).farima_c, 1.0 - 2.0 * m.d};
            } else {
                if (!m.beta) throw std::invalid_argument("tabulated mixing density needs a declared tail exponent");
                if (m.c_phi) return {*m.c_phi, *m.beta};
                const auto& c = cache_of(spec);
                return {c.tf.back() / std::pow(1.0 - c.tx.back(), *m.beta), *m.beta};
            }
        },
        spec.variant());
}

double draw_coeff(const MixingSpec& spec, Stream& stream) {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BetaType>) {
                std::gamma_distribution<double> gp(m.p, 1.0), gq(m.q, 1.0);
                const double x = gp(stream);
                const double y = gq(stream);
                return std::sqrt(x / (x + y));
            } else if constexpr (std::is_same_v<T, CanonicalRegVar>) {
                return 1.0 - std::pow(stream.uniform(), 1.0 / (1.0 + m.beta));
            } else if constexpr (std::is_same_v<T, Farima>) {
                const auto& c = cache_of(spec);
                const double w = stream.uniform();
                if (w < c.mass_below_half) return c.low.inverse(w);
                return 1.0 - c.high.inverse(1.0 - w);
            } else {
                return tab_inverse(cache_of(spec), stream.uniform());
            }
        },
        spec.variant());
}

std::vector<double> sample_coeff(const MixingSpec& spec, std::size_t N, Stream& stream) {
    if (N == 0) throw std::invalid_argument("N must be positive");
    std::vector<double> a(N);
    for (auto& x : a) x = draw_coeff(spec, stream);
    return a;
}

double integrate_mixing(const MixingSpec& spec, const std::function<double(double, double)>& g,
                        double scale, double rel_tol) {
    std::vector<double> xb{0.0, 0.5};
    std::vector<double> ub = quad::geometric_breakpoints(scale, 0.5);
    if (const auto* t = std::get_if<Tabulated>(&spec.variant())) {
        for (double x : t->x) {
            if (x > 0.0 && x < 0.5) xb.push_back(x);
            if (x > 0.5) ub.push_back(1.0 - x);
        }
    }
    std::sort(xb.begin(), xb.end());
    std::sort(ub.begin(), ub.end());
    ub.erase(std::unique(ub.begin(), ub.end()), ub.end());
    quad::Sum s;
    s.add(quad::panels([&](double x) { return x == 0.0 ? 0.0 : density(spec, x) * g(x, 1.0 - x); }, xb, rel_tol));
    s.add(quad::panels([&](double u) { return u == 0.0 ? 0.0 : density_near_one(spec, u) * g(1.0 - u, u); }, ub,
                       rel_tol));
    return s.value();
}

double moment(const MixingSpec& spec, int k) {
    if (k < 0) throw std::invalid_argument("moment order must be nonnegative");
    if (k == 0) return 1.0;
    const double kk = k;
    return integrate_mixing(
        spec, [kk](double x, double u) { return x < 0.5 ? std::pow(x, kk) : std::exp(kk * std::log1p(-u)); },
        1.0 / kk);
}

double cdf(const MixingSpec& spec, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    if (std::holds_alternative<Tabulated>(spec.variant())) return tab_cdf(cache_of(spec), x);
    if (const auto* c = std::get_if<CanonicalRegVar>(&spec.variant())) return 1.0 - std::pow(1.0 - x, 1.0 + c->beta);
    if (const auto* b = std::get_if<BetaType>(&spec.variant())) return boost::math::ibeta(b->p, b->q, x * x);
    if (x <= 0.5) return quad::finite([&](double t) { return t == 0.0 ? 0.0 : density(spec, t); }, 0.0, x, 1e-12);
    return 1.0 - quad::finite([&](double u) { return u == 0.0 ? 0.0 : density_near_one(spec, u); }, 0.0, 1.0 - x,
                              1e-12);
}

}  // namespace aggrolab
