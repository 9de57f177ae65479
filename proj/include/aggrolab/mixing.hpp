#pragma once

#include "aggrolab/rng.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace aggrolab {

// phi(x) = (2/B(p,q)) x^(2p-1) (1-x^2)^(q-1): a^2 ~ Beta(p,q).
struct BetaType {
    double p = 1.0;
    double q = 1.5;
};

// phi(x) = (1+beta)(1-x)^beta.
struct CanonicalRegVar {
    double beta = 0.5;
};

// phi(x) = C(d) x^(d-1) (1-x)^(1-2d) (1+x) with C(d) normalizing on [0,1).
struct Farima {
    double d = 0.25;
};

// Piecewise-linear density through (x, f) nodes, constant beyond the end
// nodes, renormalized to unit mass. The tail exponent must be declared.
struct Tabulated {
    std::vector<double> x;
    std::vector<double> f;
    std::optional<double> beta;
    std::optional<double> c_phi;
};

using MixingVariant = std::variant<BetaType, CanonicalRegVar, Farima, Tabulated>;

struct TailParams {
    double c_phi;
    double beta;
};

class MixingSpec {
public:
    MixingSpec(MixingVariant v);  // NOLINT: implicit by design
    template <class T>
        requires std::is_constructible_v<MixingVariant, T> && (!std::is_same_v<std::decay_t<T>, MixingVariant>)
    MixingSpec(T v) : MixingSpec(MixingVariant(std::move(v))) {}  // NOLINT
    const MixingVariant& variant() const { return v_; }
    std::string name() const;

    struct Cache;

private:
    MixingVariant v_;
    std::shared_ptr<const Cache> cache_;
    friend const Cache& cache_of(const MixingSpec&);
};

Tabulated load_tabulated_csv(const std::string& path);

double density(const MixingSpec& spec, double x);
// phi(1-u), evaluated without forming 1-u where a closed form exists.
double density_near_one(const MixingSpec& spec, double u);
TailParams tail_params(const MixingSpec& spec);
// Tail exponent; for Tabulated without a declared exponent returns nullopt.
std::optional<double> tail_exponent(const MixingSpec& spec);

// Normalizing constant C(d) of the Farima mixing density.
double farima_constant(double d);
// Innovation variance that turns the normalized Farima mixture into the
// FARIMA(0,d,0) spectral density (2 pi)^-1 |2 sin(y/2)|^-2d.
double farima_innovation_variance(double d);

std::vector<double> sample_coeff(const MixingSpec& spec, std::size_t N, Stream& stream);
double draw_coeff(const MixingSpec& spec, Stream& stream);

double moment(const MixingSpec& spec, int k);
double cdf(const MixingSpec& spec, double x);

// Integral over [0,1) of phi(x) g(x, 1-x). The second argument carries the
// distance to the unit root at full precision. `scale` places geometric panel
// breakpoints near the unit root where g varies on that scale.
double integrate_mixing(const MixingSpec& spec, const std::function<double(double, double)>& g,
                        double scale = 0.0, double rel_tol = 1e-13);

}  // namespace aggrolab
