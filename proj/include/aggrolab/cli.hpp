#pragma once

#include "aggrolab/ar1sim.hpp"
#include "aggrolab/innovations.hpp"
#include "aggrolab/mixing.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace aggrolab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitResourceCap = 3;
inline constexpr int kExitNumerical = 4;

inline constexpr const char* kWorkersEnv = "AGGROLAB_WORKERS";
inline constexpr const char* kVersion = "0.1.0";

enum class Kind { Simulate, Aggregate, Diagnose, Disaggregate, Field, Report };
std::string to_string(Kind k);
Kind kind_from_string(const std::string& s);

struct Sizes {
    std::size_t N = 0;
    std::size_t n = 0;
    int L = 0;
    std::size_t replicates = 1;
};

struct ExperimentConfig {
    Kind kind = Kind::Simulate;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::filesystem::path out;
    std::optional<MixingSpec> mixing;
    std::optional<InnovationSpec> innovation;
    Sizes sizes;
    std::optional<AggregationScheme> scheme;
    std::size_t max_cells = std::size_t{1} << 28;
    nlohmann::json diagnose = nlohmann::json::object();
    nlohmann::json disaggregate = nlohmann::json::object();
    nlohmann::json field = nlohmann::json::object();
    // Effective configuration: parsed specs in canonical form plus overrides.
    nlohmann::json echo;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::filesystem::path> out;
};

// Parses and validates every block; throws std::invalid_argument on any
// problem. Worker precedence: flag, then the environment, then the file.
ExperimentConfig parse_config(Kind kind, const nlohmann::json& j, const std::filesystem::path& base_dir,
                              const Overrides& overrides = {});
ExperimentConfig load_config(Kind kind, const std::filesystem::path& file, const Overrides& overrides = {});

// Runs the experiment into cfg.out and returns the exit status. The manifest
// is written on success and on module failure.
int run(const ExperimentConfig& cfg);

// Regenerates summary.txt of a finished run from its manifest and results.
int report(const std::filesystem::path& run_dir);

std::string render_summary(const nlohmann::json& manifest, const nlohmann::json& results);

int main(int argc, char** argv);

}  // namespace aggrolab::cli
