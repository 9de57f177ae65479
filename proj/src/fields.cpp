#include "aggrolab/fields.hpp"

#include "aggrolab/errors.hpp"
#include "aggrolab/parallel.hpp"
#include "aggrolab/quadrature.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace aggrolab {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (!p) throw ResourceLimitError("FFT buffer allocation failed");
    return FftwBuffer<T>(p);
}

class Plan {
public:
    explicit Plan(fftw_plan p) : p_(p) {
        if (!p_) throw NumericalError("FFTW planning failed");
    }
    ~Plan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(p_);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    void execute() const { fftw_execute(p_); }

private:
    fftw_plan p_;
};

// Smallest n' >= n whose prime factors are 2, 3, 5, 7.
int fft_size(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int r = m;
        for (int f : {2, 3, 5, 7})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

// Transfer function 1/(1 - a sum p e^{-i w.step}) on the M x (M/2+1) half grid.
void fill_transfer(FieldVariant v, double a, int M, fftw_complex* out) {
    const auto steps = step_probs(v);
    const int H = M / 2 + 1;
    for (int j1 = 0; j1 < M; ++j1) {
        const double w1 = 2.0 * kPi * j1 / M;
        for (int j2 = 0; j2 < H; ++j2) {
            const double w2 = 2.0 * kPi * j2 / M;
            std::complex<double> z = 0.0;
            for (const auto& s : steps) z += s.p * std::polar(1.0, -(w1 * s.u + w2 * s.v));
            const std::complex<double> gh = 1.0 / (1.0 - a * z);
            out[static_cast<std::size_t>(j1) * H + j2][0] = gh.real();
            out[static_cast<std::size_t>(j1) * H + j2][1] = gh.imag();
        }
    }
}

std::pair<double, double> step_drift(FieldVariant v) {
    double mt = 0.0, ms = 0.0;
    for (const auto& s : step_probs(v)) {
        mt += s.p * s.u;
        ms += s.p * s.v;
    }
    return {mt, ms};
}

}  // namespace

std::string to_string(FieldVariant v) {
    switch (v) {
        case FieldVariant::TwoN: return "2N";
        case FieldVariant::ThreeN: return "3N";
        case FieldVariant::FourN: return "4N";
    }
    return "?";
}

FieldVariant field_variant_from_string(const std::string& s) {
    if (s == "2N") return FieldVariant::TwoN;
    if (s == "3N") return FieldVariant::ThreeN;
    if (s == "4N") return FieldVariant::FourN;
    throw std::invalid_argument("unknown field variant: " + s);
}

std::vector<Step> step_probs(FieldVariant v) {
    switch (v) {
        case FieldVariant::TwoN: return {{1, 0, 0.5}, {0, 1, 0.5}};
        case FieldVariant::ThreeN: return {{1, 0, 1.0 / 3.0}, {0, 1, 1.0 / 3.0}, {0, -1, 1.0 / 3.0}};
        case FieldVariant::FourN: return {{1, 0, 0.25}, {-1, 0, 0.25}, {0, 1, 0.25}, {0, -1, 0.25}};
    }
    throw std::invalid_argument("unknown field variant");
}

double LatticeArray::sum() const {
    quad::Sum s;
    for (double x : data_) s.add(x);
    return s.value();
}

namespace {

// One step of the walk killed outside the diamond |t| + |s| <= R.
LatticeArray walk_step(const LatticeArray& p, const std::vector<Step>& steps, int R) {
    LatticeArray next(R);
    for (int t = -R; t <= R; ++t) {
        const int sr = R - std::abs(t);
        for (int s = -sr; s <= sr; ++s) {
            double acc = 0.0;
            for (const auto& st : steps) acc += st.p * p.at_or_zero(t - st.u, s - st.v);
            next(t, s) = acc;
        }
    }
    return next;
}

}  // namespace

std::vector<LatticeArray> walk_probs(FieldVariant v, int k_max, int R) {
    if (k_max < 0) throw std::invalid_argument("k_max must be nonnegative");
    if (R < k_max) throw std::invalid_argument("window radius must be at least k_max or mass leaks");
    const auto steps = step_probs(v);
    std::vector<LatticeArray> out;
    out.reserve(static_cast<std::size_t>(k_max) + 1);
    LatticeArray p(R);
    p(0, 0) = 1.0;
    out.push_back(p);
    for (int k = 1; k <= k_max; ++k) {
        p = walk_step(p, steps, R);
        out.push_back(p);
    }
    return out;
}

GreenTable green(FieldVariant v, double a, int R, double tol, int k_cap) {
    if (!(a >= 0.0 && a < 1.0)) throw std::invalid_argument("coefficient must lie in [0,1)");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (R < 0) throw std::invalid_argument("window radius must be nonnegative");
    int K = 0;
    if (a > 0.0) {
        // Smallest K with a^(K+1)/(1-a) <= tol.
        const double k = std::ceil(std::log(tol * (1.0 - a)) / std::log(a)) - 1.0;
        if (k > k_cap) throw ResourceLimitError("coefficient too close to 1: series length exceeds the cap");
        K = std::max(0, static_cast<int>(k));
    }
    const auto steps = step_probs(v);
    GreenTable g{v, a, R, K, tol, 0.0, LatticeArray(R)};
    LatticeArray p(R);
    p(0, 0) = 1.0;
    double ak = 1.0;
    quad::Sum leak;
    for (int k = 0; k <= K; ++k) {
        if (k > 0) {
            p = walk_step(p, steps, R);
            ak *= a;
        }
        const auto& src = p.data();
        auto& dst = g.g.data();
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] += ak * src[i];
        leak.add(ak * (1.0 - p.sum()));
    }
    g.truncation_bound = (a > 0.0 ? std::pow(a, K + 1) / (1.0 - a) : 0.0) + std::max(0.0, leak.value());
    return g;
}

double green_identity_residual(const GreenTable& table) {
    const auto steps = step_probs(table.variant);
    const int R = table.R;
    double worst = 0.0;
    for (int t = -R; t <= R; ++t) {
        const int sr = R - 1 - std::abs(t);
        for (int s = -sr; s <= sr; ++s) {
            double acc = table.g(t, s);
            for (const auto& st : steps) acc -= table.a * st.p * table.g(t - st.u, s - st.v);
            if (t == 0 && s == 0) acc -= 1.0;
            worst = std::max(worst, std::abs(acc));
        }
    }
    return worst;
}

double green_closed_form_2n(int t, int s, double a) {
    if (t < 0 || s < 0) return 0.0;
    const int k = t + s;
    const double logc = std::lgamma(k + 1.0) - std::lgamma(t + 1.0) - std::lgamma(s + 1.0);
    if (a == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(k * std::log(a) + logc - k * std::log(2.0));
}

int green_window(FieldVariant v, double a, double tol) {
    if (!(a >= 0.0 && a < 1.0)) throw std::invalid_argument("coefficient must lie in [0,1)");
    if (a == 0.0) return 0;
    const auto [mt, ms] = step_drift(v);
    const double mu = std::max(std::abs(mt), std::abs(ms));
    const double target = tol / (1.0 - a);
    const int kmax = static_cast<int>(std::ceil(std::log(1e-3 * tol) / std::log(a)));
    auto outside = [&](int R) {
        double b = std::pow(a, kmax + 1) / (1.0 - a);
        double ak = 1.0;
        for (int k = 1; k <= kmax; ++k) {
            ak *= a;
            const double r = R - k * mu;
            const double pk = r > 0.0 ? std::min(1.0, 4.0 * std::exp(-r * r / (2.0 * k))) : 1.0;
            b += ak * pk;
            if (k > R && pk == 1.0 && ak < 1e-3 * target) break;
        }
        return b;
    };
    int hi = 1;
    while (outside(hi) > target) {
        hi *= 2;
        if (hi > (1 << 22)) throw ResourceLimitError("Green window exceeds the supported size");
    }
    int lo = hi / 2;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (outside(mid) > target ? lo : hi) = mid;
    }
    return hi;
}

LatticeArray green_kernel(FieldVariant v, double a, int R) {
    const int M = fft_size(2 * R + 1);
    const int H = M / 2 + 1;
    auto spec = fftw_buffer<fftw_complex>(static_cast<std::size_t>(M) * H);
    auto real = fftw_buffer<double>(static_cast<std::size_t>(M) * M);
    std::unique_ptr<Plan> plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = std::make_unique<Plan>(fftw_plan_dft_c2r_2d(M, M, spec.get(), real.get(), FFTW_ESTIMATE));
    }
    fill_transfer(v, a, M, spec.get());
    plan->execute();
    LatticeArray g(R);
    const double norm = 1.0 / (static_cast<double>(M) * M);
    for (int t = -R; t <= R; ++t)
        for (int s = -R; s <= R; ++s)
            g(t, s) = real[static_cast<std::size_t>((t + M) % M) * M + static_cast<std::size_t>((s + M) % M)] * norm;
    return g;
}

namespace {

// One L x L field: innovations on a P x P torus convolved with the Green
// function through its transfer function.
void simulate_one_field(FieldVariant v, double a, const InnovationSpec& innovation, int L, int R, Stream& stream,
                        RowMatrix& out, std::size_t max_cells) {
    out.resize(L, L);
    if (a == 0.0) {
        const auto e = sample_innovations(innovation, static_cast<std::size_t>(L) * L, stream);
        for (int t = 0; t < L; ++t)
            for (int s = 0; s < L; ++s) out(t, s) = e[static_cast<std::size_t>(t) * L + s];
        return;
    }
    const int P = fft_size(L + 2 * R);
    if (static_cast<std::size_t>(P) * P > max_cells) throw ResourceLimitError("field torus exceeds the memory cap");
    const int H = P / 2 + 1;
    auto real = fftw_buffer<double>(static_cast<std::size_t>(P) * P);
    auto spec = fftw_buffer<fftw_complex>(static_cast<std::size_t>(P) * H);
    auto transfer = fftw_buffer<fftw_complex>(static_cast<std::size_t>(P) * H);
    std::unique_ptr<Plan> fwd, bwd;
    {
        std::lock_guard lock(planner_mutex());
        fwd = std::make_unique<Plan>(fftw_plan_dft_r2c_2d(P, P, real.get(), spec.get(), FFTW_ESTIMATE));
        bwd = std::make_unique<Plan>(fftw_plan_dft_c2r_2d(P, P, spec.get(), real.get(), FFTW_ESTIMATE));
    }
    const auto e = sample_innovations(innovation, static_cast<std::size_t>(P) * P, stream);
    std::copy(e.begin(), e.end(), real.get());
    fwd->execute();
    fill_transfer(v, a, P, transfer.get());
    for (std::size_t i = 0; i < static_cast<std::size_t>(P) * H; ++i) {
        const std::complex<double> x(spec[i][0], spec[i][1]), g(transfer[i][0], transfer[i][1]);
        const auto y = x * g;
        spec[i][0] = y.real();
        spec[i][1] = y.imag();
    }
    bwd->execute();
    const double norm = 1.0 / (static_cast<double>(P) * P);
    for (int t = 0; t < L; ++t)
        for (int s = 0; s < L; ++s) out(t, s) = real[static_cast<std::size_t>(t) * P + s] * norm;
}

}  // namespace

FieldPanel simulate_field_panel(const FieldModel& model, int L, std::size_t N, const Stream& stream,
                                const FieldOptions& opts) {
    if (L < 1 || N == 0) throw std::invalid_argument("lattice size and N must be positive");
    if (model.mixing.has_value() == model.fixed_a.has_value())
        throw std::invalid_argument("field model needs exactly one of a mixing law or a fixed coefficient");
    if (std::holds_alternative<IdTriplet>(model.innovation))
        throw std::invalid_argument("field models take Gaussian, stable or domain-of-attraction innovations");
    validate(model.innovation);
    const double alpha = innovation_alpha(model.innovation);
    if (!(alpha > 1.0 && alpha <= 2.0)) throw std::invalid_argument("field innovations need alpha in (1,2]");
    if (model.fixed_a && !(*model.fixed_a >= 0.0 && *model.fixed_a < 1.0))
        throw std::invalid_argument("fixed coefficient must lie in [0,1)");
    const std::size_t cells = static_cast<std::size_t>(L) * L;
    if (opts.keep_fields && N > opts.max_cells / cells) throw ResourceLimitError("field panel exceeds the memory cap");

    FieldPanel fp;
    fp.exponent = 1.0 / alpha;
    fp.coeffs.assign(N, 0.0);
    fp.windows.assign(N, 0);
    if (opts.keep_fields) fp.fields.assign(N, RowMatrix());
    const double cap = 1.0 - opts.clip;
    std::vector<char> clipped(N, 0);
    constexpr std::size_t kBlock = 16;
    const std::size_t nblocks = (N + kBlock - 1) / kBlock;
    std::vector<RowMatrix> partial(nblocks);
    parallel_for(nblocks, opts.workers, [&](std::size_t b) {
        RowMatrix acc = RowMatrix::Zero(L, L);
        RowMatrix f;
        for (std::size_t i = b * kBlock; i < std::min(N, (b + 1) * kBlock); ++i) {
            const Stream ps = stream.for_path(i);
            double a;
            if (model.fixed_a) {
                a = *model.fixed_a;
            } else {
                Stream cs = ps.substream(0);
                a = draw_coeff(*model.mixing, cs);
            }
            if (a > cap) {
                a = cap;
                clipped[i] = 1;
            }
            fp.coeffs[i] = a;
            fp.windows[i] = green_window(model.variant, a, opts.tol);
            Stream es = ps.substream(1);
            simulate_one_field(model.variant, a, model.innovation, L, fp.windows[i], es, f, opts.max_cells);
            acc += f;
            if (opts.keep_fields) fp.fields[i] = f;
        }
        partial[b] = std::move(acc);
    });
    fp.aggregate = RowMatrix::Zero(L, L);
    for (const auto& p : partial) fp.aggregate += p;
    fp.aggregate *= std::pow(static_cast<double>(N), -fp.exponent);
    for (char c : clipped) fp.clip_count += c;
    return fp;
}

namespace {

// |1 - A z|^2 with A = 1 - u, z = sum p e^{i(x u + y v)}, written through
// c = 1 - Re z and s = Im z to avoid cancellation near the origin.
struct Symbol {
    double c;
    double s;
};

Symbol symbol(FieldVariant v, double x, double y) {
    Symbol r{0.0, 0.0};
    for (const auto& st : step_probs(v)) {
        const double th = x * st.u + y * st.v;
        const double h = std::sin(0.5 * th);
        r.c += st.p * 2.0 * h * h;
        r.s += st.p * std::sin(th);
    }
    return r;
}

double inv_modulus(const Symbol& z, double A, double u) {
    const double re = u * (1.0 - z.c) + z.c;  // 1 - A Re z
    const double im = A * z.s;
    return 1.0 / (re * re + im * im);
}

}  // namespace

double field_spectral_density(FieldVariant v, const MixingSpec& mixing, double sigma2, double x, double y) {
    if (!(std::abs(x) <= kPi && std::abs(y) <= kPi)) throw std::invalid_argument("frequencies must lie in [-pi, pi]");
    if (x == 0.0 && y == 0.0) {
        const auto beta = tail_exponent(mixing);
        if (!beta || *beta <= 1.0) throw std::invalid_argument("field spectral density is unbounded at the origin");
    }
    const Symbol z = symbol(v, x, y);
    const double scale = std::max(z.c, std::abs(z.s));
    const double e = integrate_mixing(
        mixing, [&](double A, double u) { return inv_modulus(z, A, u); }, scale, 1e-12);
    return sigma2 / (4.0 * kPi * kPi) * e;
}

double field_spectral_density_fixed(FieldVariant v, double a, double sigma2, double x, double y) {
    const Symbol z = symbol(v, x, y);
    return sigma2 / (4.0 * kPi * kPi) * inv_modulus(z, a, 1.0 - a);
}

ScalingExponents scaling_exponents(FieldVariant v, double alpha, double beta) {
    if (!(alpha > 1.0 && alpha <= 2.0)) throw std::invalid_argument("scaling exponents need alpha in (1,2]");
    if (!(beta > 0.0 && beta < alpha - 1.0)) throw std::invalid_argument("scaling exponents need 0 < beta < alpha - 1");
    if (v == FieldVariant::FourN) {
        const double h = 2.0 * (alpha - beta) / alpha;
        return {h, h, true};
    }
    const double h1 = (0.5 + alpha - beta) / alpha;
    return {h1, 2.0 * h1, false};
}

double rectangle_sum(const RowMatrix& field, int t0, int s0, int t1, int s1) {
    if (t0 < 0 || s0 < 0 || t1 > field.rows() || s1 > field.cols() || t1 < t0 || s1 < s0)
        throw std::out_of_range("rectangle outside the sampled lattice");
    quad::Sum s;
    for (int t = t0; t < t1; ++t)
        for (int u = s0; u < s1; ++u) s.add(field(t, u));
    return s.value();
}

double rectangle_increment(const RowMatrix& field, int x1, int y1, int x2, int y2) {
    auto S = [&](int x, int y) { return rectangle_sum(field, 0, 0, x, y); };
    return S(x2, y2) - S(x1, y2) - S(x2, y1) + S(x1, y1);
}

double scaled_rectangle_sum(const RowMatrix& field, double n, double x, double y, double H1, double H2) {
    const int t1 = static_cast<int>(std::floor(n * x));
    const int s1 = static_cast<int>(std::floor(std::pow(n, H1 / H2) * y));
    return rectangle_sum(field, 0, 0, t1, s1);
}

}  // namespace aggrolab
