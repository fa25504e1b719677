#pragma once

#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "pemdetect/model.hpp"

namespace pem::cli {

/// Self-describing JSON form of a measurement set. Doubles are written in
/// shortest round-trip form, so parsing the output reproduces the set exactly.
nlohmann::json measurements_to_json(const MeasurementSet& data, const SystemParams& measured_with);
MeasurementSet measurements_from_json(const nlohmann::json& doc, SystemParams* measured_with = nullptr);

void write_measurements(const std::filesystem::path& path, const MeasurementSet& data, const SystemParams& measured_with);
MeasurementSet read_measurements(const std::filesystem::path& path, SystemParams* measured_with = nullptr);

/// Adds complex Gaussian noise to every measured response sample, with
/// standard deviation `relative` times the sample magnitude. Inputs untouched.
void add_noise(MeasurementSet& data, double relative, std::uint64_t seed);

/// Writes `text` to `path`, creating parent directories. Throws InvalidInput
/// when the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace pem::cli
