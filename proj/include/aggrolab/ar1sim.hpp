#pragma once

#include "aggrolab/innovations.hpp"
#include "aggrolab/mixing.hpp"
#include "aggrolab/rng.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace aggrolab {

struct Lineage {
    std::uint64_t master_seed = 0;
    std::uint64_t replicate = 0;
};

struct SimulationOptions {
    unsigned workers = 1;
    std::size_t max_cells = std::size_t{1} << 28;
    double coeff_cap = 1.0 - 1e-12;
};

// N paths of length n stored path-major (row i is path i).
struct Panel {
    RowMatrix values;
    std::vector<double> coeffs;
    InnovationSpec innovation;
    MixingSpec mixing;
    Lineage lineage;
    std::size_t clip_count = 0;

    std::size_t N() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t n() const { return static_cast<std::size_t>(values.cols()); }
};

// TriangularArray applies no normalization: the ID innovations are already
// N-th convolution roots.
enum class AggregationScheme { FiniteVariance, Stable, DegenerateCheck, TriangularArray };

std::string to_string(AggregationScheme s);
AggregationScheme scheme_from_string(const std::string& s);

struct AggregatedSeries {
    std::vector<double> values;
    double exponent = 0.5;
    AggregationScheme scheme = AggregationScheme::FiniteVariance;
};

// Burn-in length used when no exact stationary start exists.
std::size_t burn_in_length(double a);

// Stationary AR(1) path. For IdTriplet innovations `root` selects the
// convolution root (the panel size).
std::vector<double> simulate_ar1(double a, const InnovationSpec& innovation, std::size_t n, Stream& stream,
                                 std::size_t root = 1);

// Path i uses stream.for_path(i): its coefficient comes from substream 0 and
// its innovations from substream 1.
Panel simulate_panel(const MixingSpec& mixing, const InnovationSpec& innovation, std::size_t N, std::size_t n,
                     const Stream& stream, const SimulationOptions& opts = {});

double aggregation_exponent(AggregationScheme scheme, const InnovationSpec& innovation, const MixingSpec& mixing);
AggregatedSeries aggregate(const Panel& panel, AggregationScheme scheme);

// Aggregate of N fresh paths without storing the panel. Paths are summed in
// fixed blocks, so the result does not depend on the worker count. Draws are
// identical to simulate_panel with the same stream.
AggregatedSeries simulate_aggregate(const MixingSpec& mixing, const InnovationSpec& innovation, std::size_t N,
                                    std::size_t n, const Stream& stream, AggregationScheme scheme,
                                    const SimulationOptions& opts = {}, std::size_t* clip_count = nullptr);

// S_{N,n}(tau) = sum over paths and t <= floor(n tau), unnormalized.
std::vector<double> joint_sum(const Panel& panel, std::span<const double> taus);

enum class GrowthCase { Fast, Slow, Intermediate };
std::string to_string(GrowthCase c);

struct GrowthReport {
    GrowthCase growth;
    double ratio;           // N^(1/(1+beta)) / n
    double mu;              // limit value reported for the case
    double N_exponent;      // normalization A = N^N_exponent n^n_exponent
    double n_exponent;
    std::string normalization;
};

inline constexpr double kFastGrowthRatio = 1e2;
inline constexpr double kSlowGrowthRatio = 1e-2;

GrowthReport growth_case(double N, double n, double beta);

void write_panel(const Panel& panel, const std::filesystem::path& dir);
void write_aggregate_csv(const AggregatedSeries& series, const std::filesystem::path& file);

}  // namespace aggrolab
