#pragma once

#include "aggrolab/innovations.hpp"
#include "aggrolab/mixing.hpp"

#include <json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace aggrolab {

nlohmann::json to_json(const InnovationSpec& spec);
nlohmann::json to_json(const MixingSpec& spec);
InnovationSpec innovation_from_json(const nlohmann::json& j);
// Relative paths of tabulated CSV files resolve against base_dir.
MixingSpec mixing_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

// Shortest round-trip decimal form of a double.
std::string format_double(double x);

void write_text(const std::filesystem::path& file, const std::string& text);
void write_f64(const std::filesystem::path& file, std::span<const double> data);
std::vector<double> read_f64(const std::filesystem::path& file);
void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

std::string sha256_file(const std::filesystem::path& file);

}  // namespace aggrolab
