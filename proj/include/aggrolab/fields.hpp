#pragma once

#include "aggrolab/innovations.hpp"
#include "aggrolab/mixing.hpp"
#include "aggrolab/rng.hpp"

#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

namespace aggrolab {

enum class FieldVariant { TwoN, ThreeN, FourN };
std::string to_string(FieldVariant v);
FieldVariant field_variant_from_string(const std::string& s);

// A walk step (u, v) taken with probability p. The Green function at offset
// (t, s) collects walks from the origin that end at (t, s).
struct Step {
    int u;
    int v;
    double p;
};
std::vector<Step> step_probs(FieldVariant v);

// Square array indexed by (t, s) with |t|, |s| <= R.
class LatticeArray {
public:
    explicit LatticeArray(int R = 0) : R_(R), data_(static_cast<std::size_t>(2 * R + 1) * (2 * R + 1), 0.0) {}
    int radius() const { return R_; }
    double& operator()(int t, int s) { return data_[index(t, s)]; }
    double operator()(int t, int s) const { return data_[index(t, s)]; }
    bool contains(int t, int s) const { return std::abs(t) <= R_ && std::abs(s) <= R_; }
    double at_or_zero(int t, int s) const { return contains(t, s) ? (*this)(t, s) : 0.0; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }
    double sum() const;

private:
    std::size_t index(int t, int s) const {
        return static_cast<std::size_t>(t + R_) * static_cast<std::size_t>(2 * R_ + 1) + static_cast<std::size_t>(s + R_);
    }
    int R_;
    std::vector<double> data_;
};

// p_k(t, s) for k = 0..k_max on the window |t| + |s| <= R.
std::vector<LatticeArray> walk_probs(FieldVariant v, int k_max, int R);

struct GreenTable {
    FieldVariant variant;
    double a;
    int R;
    int K;
    double tol;
    double truncation_bound;  // a^(K+1)/(1-a) plus mass that left the window
    LatticeArray g;
};

inline constexpr int kGreenMaxTerms = 200000;

GreenTable green(FieldVariant v, double a, int R, double tol, int k_cap = kGreenMaxTerms);
// Max of |g - a sum p g(. - step) - delta| over sites whose neighbours lie in the window.
double green_identity_residual(const GreenTable& table);
double green_closed_form_2n(int t, int s, double a);

// Smallest box half-width R with Green mass outside the box at most
// tol/(1-a), from a Hoeffding bound on the walk position.
int green_window(FieldVariant v, double a, double tol);
// Green function on the box of half-width R from the transfer function
// 1/(1 - a sum p e^{-i w.step}) on an FFT torus.
LatticeArray green_kernel(FieldVariant v, double a, int R);

struct FieldModel {
    FieldVariant variant = FieldVariant::FourN;
    std::optional<MixingSpec> mixing;  // radial law of A
    std::optional<double> fixed_a;     // point mass instead of a mixing law
    InnovationSpec innovation = Gaussian{1.0};
};

struct FieldOptions {
    unsigned workers = 1;
    double clip = 1e-3;    // coefficients are clipped to [0, 1 - clip]
    double tol = 1e-8;     // relative Green mass allowed outside the window
    std::size_t max_cells = std::size_t{1} << 27;
    bool keep_fields = false;
};

struct FieldPanel {
    std::vector<RowMatrix> fields;  // empty unless keep_fields
    std::vector<double> coeffs;
    std::vector<int> windows;
    std::size_t clip_count = 0;
    RowMatrix aggregate;  // N^(-1/alpha) sum of the fields
    double exponent = 0.5;
};

// L x L fields; path i uses stream.for_path(i) with its coefficient from
// substream 0 and its innovation field from substream 1.
FieldPanel simulate_field_panel(const FieldModel& model, int L, std::size_t N, const Stream& stream,
                                const FieldOptions& opts = {});

double field_spectral_density(FieldVariant v, const MixingSpec& mixing, double sigma2, double x, double y);
double field_spectral_density_fixed(FieldVariant v, double a, double sigma2, double x, double y);

struct ScalingExponents {
    double H1;
    double H2;
    bool isotropic;
};
ScalingExponents scaling_exponents(FieldVariant v, double alpha, double beta);

// Sum over t0 <= t < t1, s0 <= s < s1.
double rectangle_sum(const RowMatrix& field, int t0, int s0, int t1, int s1);
// Double difference of the partial-sum field between corners (x1, y1) and (x2, y2).
double rectangle_increment(const RowMatrix& field, int x1, int y1, int x2, int y2);
// Sum over the index set [0, n x) x [0, n^(H1/H2) y).
double scaled_rectangle_sum(const RowMatrix& field, double n, double x, double y, double H1, double H2);

}  // namespace aggrolab
