#pragma once

#include "aggrolab/rng.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace aggrolab {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Gaussian {
    double sigma = 1.0;
};

// Samorodnitsky-Taqqu parameterization S_alpha(scale, skew, 0).
struct Stable {
    double alpha = 2.0;
    double skew = 0.0;
    double scale = 1.0;
};

// Symmetrized Pareto with P(|x| > t) = tail_const * t^-alpha for t >= tail_const^(1/alpha).
struct DomainAttraction {
    double alpha = 1.5;
    double tail_const = 1.0;
};

// Jump density c_plus*alpha0*x^(-alpha0-1) on (0, cutoff) and the mirrored
// c_minus part on (-cutoff, 0).
struct LevySmallJumpSpec {
    double alpha0 = 1.5;
    double c_plus = 1.0;
    double c_minus = 1.0;
    double cutoff = 1.0;
};

// Point mass of the Levy measure at `x` with intensity `rate`.
struct JumpAtom {
    double x = 1.0;
    double rate = 1.0;
};

// Levy triplet (mu, sigma, pi) with pi = small-jump density + finitely many atoms.
// The characteristic exponent uses the truncation function 1{|x| <= 1}.
struct IdTriplet {
    double mu = 0.0;
    double sigma = 0.0;
    std::optional<LevySmallJumpSpec> small_jumps;
    std::vector<JumpAtom> big_jumps;
    double epsilon = 1e-3;
};

using InnovationSpec = std::variant<Gaussian, Stable, DomainAttraction, IdTriplet>;

void validate(const InnovationSpec& spec);
std::string name(const InnovationSpec& spec);

// Tail index alpha; 2 for Gaussian and for finite-variance ID laws.
double innovation_alpha(const InnovationSpec& spec);
bool has_finite_variance(const InnovationSpec& spec);
// Variance of one innovation (throws when infinite).
double variance(const InnovationSpec& spec);

std::vector<double> sample_gaussian(double sigma, std::size_t n, Stream& stream);
std::vector<double> sample_stable(double alpha, double skew, double scale, std::size_t n,
                                  Stream& stream);
double draw_stable(double alpha, double skew, double scale, Stream& stream);
std::complex<double> stable_cf(double theta, double alpha, double skew, double scale);

std::vector<double> sample_domain_attraction(double alpha, std::size_t n, Stream& stream,
                                             double tail_const = 1.0);
// SaS scale matched to the symmetric Pareto tail P(|x| > t) ~ tail_const t^-alpha,
// so that N^(-1/alpha) times a sum of N draws tends to S_alpha(scale, 0, 0).
double domain_attraction_scale(double alpha, double tail_const = 1.0);

// Integral of x^2 over the small-jump density restricted to |x| < eps.
double small_jump_variance(const LevySmallJumpSpec& s, double eps);
// Integral of x^2 over the whole Levy measure.
double levy_second_moment(const IdTriplet& spec);
std::complex<double> id_cf(double theta, const IdTriplet& spec);

// n x N matrix whose entries are i.i.d. N-th convolution roots of the ID law.
RowMatrix sample_id_array(const IdTriplet& spec, std::size_t N, std::size_t n, Stream& stream);

// One draw from the innovation law (for IdTriplet, the N-th convolution root).
double draw_innovation(const InnovationSpec& spec, Stream& stream, std::size_t root = 1);
std::vector<double> sample_innovations(const InnovationSpec& spec, std::size_t n, Stream& stream,
                                       std::size_t root = 1);

}  // namespace aggrolab
