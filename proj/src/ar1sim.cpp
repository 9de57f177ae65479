#include "aggrolab/ar1sim.hpp"

#include "aggrolab/errors.hpp"
#include "aggrolab/io.hpp"
#include "aggrolab/parallel.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace aggrolab {

namespace {

constexpr std::size_t kMaxBurnIn = 1'000'000;
constexpr std::size_t kBlock = 64;

// Stationary X(0) drawn exactly, or nullopt when only burn-in is available.
std::optional<double> exact_start(double a, const InnovationSpec& innovation, Stream& stream) {
    if (const auto* g = std::get_if<Gaussian>(&innovation)) {
        return g->sigma * stream.normal() / std::sqrt((1.0 - a) * (1.0 + a));
    }
    if (const auto* s = std::get_if<Stable>(&innovation)) {
        if (s->alpha == 1.0 && s->skew != 0.0) return std::nullopt;
        if (a == 0.0) return draw_stable(s->alpha, s->skew, s->scale, stream);
        const double scale = s->scale * std::pow(-std::expm1(s->alpha * std::log(a)), -1.0 / s->alpha);
        return draw_stable(s->alpha, s->skew, scale, stream);
    }
    return std::nullopt;
}

void fill_path(double a, const InnovationSpec& innovation, std::span<double> out, Stream& stream,
               std::size_t root) {
    const std::size_t n = out.size();
    const std::vector<double> z = sample_innovations(innovation, n, stream, root);
    double x;
    if (auto x0 = exact_start(a, innovation, stream)) {
        x = *x0;
    } else {
        const std::size_t burn = burn_in_length(a);
        const std::vector<double> w = sample_innovations(innovation, burn, stream, root);
        x = 0.0;
        for (double v : w) x = a * x + v;
    }
    for (std::size_t t = 0; t < n; ++t) {
        x = a * x + z[t];
        out[t] = x;
    }
}

void check_cells(std::size_t N, std::size_t n, const SimulationOptions& opts) {
    if (N == 0 || n == 0) throw std::invalid_argument("N and n must be positive");
    if (N > opts.max_cells / n) throw ResourceLimitError("panel size N*n exceeds the configured cap");
}

double path_coeff(const MixingSpec& mixing, const Stream& ps, double cap, bool& clipped) {
    Stream cs = ps.substream(0);
    double a = draw_coeff(mixing, cs);
    clipped = a > cap;
    return clipped ? cap : a;
}

}  // namespace

std::string to_string(AggregationScheme s) {
    switch (s) {
        case AggregationScheme::FiniteVariance: return "finite-variance";
        case AggregationScheme::Stable: return "stable";
        case AggregationScheme::DegenerateCheck: return "degenerate-check";
        case AggregationScheme::TriangularArray: return "triangular-array";
    }
    return "?";
}

AggregationScheme scheme_from_string(const std::string& s) {
    if (s == "finite-variance") return AggregationScheme::FiniteVariance;
    if (s == "stable") return AggregationScheme::Stable;
    if (s == "degenerate-check") return AggregationScheme::DegenerateCheck;
    if (s == "triangular-array") return AggregationScheme::TriangularArray;
    throw std::invalid_argument("unknown aggregation scheme: " + s);
}

std::size_t burn_in_length(double a) {
    if (a <= 0.0) return 0;
    const double b = std::ceil(std::log(1e-12) / std::log(a));
    return b >= static_cast<double>(kMaxBurnIn) ? kMaxBurnIn : static_cast<std::size_t>(b);
}

std::vector<double> simulate_ar1(double a, const InnovationSpec& innovation, std::size_t n, Stream& stream,
                                 std::size_t root) {
    if (!(a >= 0.0 && a < 1.0)) throw std::invalid_argument("AR coefficient must lie in [0,1)");
    if (n == 0) throw std::invalid_argument("path length must be positive");
    validate(innovation);
    std::vector<double> out(n);
    fill_path(a, innovation, out, stream, root);
    return out;
}

Panel simulate_panel(const MixingSpec& mixing, const InnovationSpec& innovation, std::size_t N, std::size_t n,
                     const Stream& stream, const SimulationOptions& opts) {
    check_cells(N, n, opts);
    validate(innovation);
    Panel p{RowMatrix(N, n), std::vector<double>(N), innovation, mixing, {stream.master_seed(), stream.replicate()}, 0};
    std::vector<char> clipped(N, 0);
    parallel_for(N, opts.workers, [&](std::size_t i) {
        const Stream ps = stream.for_path(i);
        bool c = false;
        p.coeffs[i] = path_coeff(mixing, ps, opts.coeff_cap, c);
        clipped[i] = c;
        Stream is = ps.substream(1);
        fill_path(p.coeffs[i], innovation, std::span<double>(p.values.row(i).data(), n), is, N);
    });
    for (char c : clipped) p.clip_count += c;
    return p;
}

double aggregation_exponent(AggregationScheme scheme, const InnovationSpec& innovation, const MixingSpec& mixing) {
    const bool heavy = std::holds_alternative<Stable>(innovation) || std::holds_alternative<DomainAttraction>(innovation);
    const bool id = std::holds_alternative<IdTriplet>(innovation);
    switch (scheme) {
        case AggregationScheme::FiniteVariance:
            if (!has_finite_variance(innovation) || id)
                throw std::invalid_argument("finite-variance scheme needs Gaussian or alpha=2 stable innovations");
            return 0.5;
        case AggregationScheme::Stable:
            if (!heavy) throw std::invalid_argument("stable scheme needs stable or domain-of-attraction innovations");
            return 1.0 / innovation_alpha(innovation);
        case AggregationScheme::DegenerateCheck: {
            if (!heavy) throw std::invalid_argument("degenerate-check scheme needs stable or domain-of-attraction innovations");
            const auto beta = tail_exponent(mixing);
            if (!beta) throw std::invalid_argument("degenerate-check scheme needs a known tail exponent");
            return 1.0 / (innovation_alpha(innovation) * (1.0 + *beta));
        }
        case AggregationScheme::TriangularArray:
            if (!id) throw std::invalid_argument("triangular-array scheme needs ID triplet innovations");
            return 0.0;
    }
    throw std::invalid_argument("unknown scheme");
}

AggregatedSeries aggregate(const Panel& panel, AggregationScheme scheme) {
    const double e = aggregation_exponent(scheme, panel.innovation, panel.mixing);
    const double norm = std::pow(static_cast<double>(panel.N()), -e);
    AggregatedSeries s{std::vector<double>(panel.n(), 0.0), e, scheme};
    for (std::size_t i = 0; i < panel.N(); ++i)
        for (std::size_t t = 0; t < panel.n(); ++t) s.values[t] += panel.values(i, t);
    for (auto& v : s.values) v *= norm;
    return s;
}

AggregatedSeries simulate_aggregate(const MixingSpec& mixing, const InnovationSpec& innovation, std::size_t N,
                                    std::size_t n, const Stream& stream, AggregationScheme scheme,
                                    const SimulationOptions& opts, std::size_t* clip_count) {
    if (N == 0 || n == 0) throw std::invalid_argument("N and n must be positive");
    if (n > opts.max_cells / kBlock) throw ResourceLimitError("path length exceeds the configured cap");
    validate(innovation);
    const double e = aggregation_exponent(scheme, innovation, mixing);
    const std::size_t nblocks = (N + kBlock - 1) / kBlock;
    std::vector<std::vector<double>> partial(nblocks);
    std::vector<std::size_t> clips(nblocks, 0);
    parallel_for(nblocks, opts.workers, [&](std::size_t b) {
        std::vector<double> acc(n, 0.0), path(n);
        for (std::size_t i = b * kBlock; i < std::min(N, (b + 1) * kBlock); ++i) {
            const Stream ps = stream.for_path(i);
            bool c = false;
            const double a = path_coeff(mixing, ps, opts.coeff_cap, c);
            clips[b] += c;
            Stream is = ps.substream(1);
            fill_path(a, innovation, path, is, N);
            for (std::size_t t = 0; t < n; ++t) acc[t] += path[t];
        }
        partial[b] = std::move(acc);
    });
    AggregatedSeries s{std::vector<double>(n, 0.0), e, scheme};
    std::size_t total_clips = 0;
    for (std::size_t b = 0; b < nblocks; ++b) {
        for (std::size_t t = 0; t < n; ++t) s.values[t] += partial[b][t];
        total_clips += clips[b];
    }
    const double norm = std::pow(static_cast<double>(N), -e);
    for (auto& v : s.values) v *= norm;
    if (clip_count) *clip_count = total_clips;
    return s;
}

std::vector<double> joint_sum(const Panel& panel, std::span<const double> taus) {
    if (taus.empty()) throw std::invalid_argument("tau grid must not be empty");
    const std::size_t n = panel.n();
    std::vector<double> col(n, 0.0);
    for (std::size_t i = 0; i < panel.N(); ++i)
        for (std::size_t t = 0; t < n; ++t) col[t] += panel.values(i, t);
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + col[t];
    std::vector<double> out;
    out.reserve(taus.size());
    for (double tau : taus) {
        if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau values must lie in (0,1]");
        const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * tau));
        out.push_back(prefix[k]);
    }
    return out;
}

std::string to_string(GrowthCase c) {
    switch (c) {
        case GrowthCase::Fast: return "j";
        case GrowthCase::Slow: return "jj";
        case GrowthCase::Intermediate: return "jjj";
    }
    return "?";
}

GrowthReport growth_case(double N, double n, double beta) {
    if (!(N >= 1.0 && n >= 1.0)) throw std::invalid_argument("N and n must be at least 1");
    if (!(beta > -1.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (-1,1)");
    const double ratio = std::pow(N, 1.0 / (1.0 + beta)) / n;
    if (ratio >= kFastGrowthRatio)
        return {GrowthCase::Fast, ratio, std::numeric_limits<double>::infinity(), 0.5, 1.0 - beta / 2.0,
                "N^(1/2) n^(1-beta/2)"};
    const double ne = 1.0 / (1.0 + beta);
    if (ratio <= kSlowGrowthRatio) return {GrowthCase::Slow, ratio, 0.0, ne, 0.5, "N^(1/(1+beta)) n^(1/2)"};
    return {GrowthCase::Intermediate, ratio, ratio, ne, 0.5, "N^(1/(1+beta)) n^(1/2), limit mu^(1/2) Z(tau/mu)"};
}

void write_panel(const Panel& panel, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_f64(dir / "values.f64", std::span<const double>(panel.values.data(), panel.values.size()));
    write_f64(dir / "coeffs.f64", panel.coeffs);
    nlohmann::json side{{"layout", "path-major float64 little-endian"},
                        {"N", panel.N()},
                        {"n", panel.n()},
                        {"innovation", to_json(panel.innovation)},
                        {"mixing", to_json(panel.mixing)},
                        {"master_seed", panel.lineage.master_seed},
                        {"replicate", panel.lineage.replicate},
                        {"clip_count", panel.clip_count}};
    write_text(dir / "panel.json", side.dump(2) + "\n");
}

void write_aggregate_csv(const AggregatedSeries& series, const std::filesystem::path& file) {
    std::vector<double> t(series.values.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i + 1);
    write_csv(file, {"t", "value"}, {t, series.values});
}

}  // namespace aggrolab
