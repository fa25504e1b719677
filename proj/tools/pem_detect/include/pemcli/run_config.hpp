#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pemdetect/detect.hpp"
#include "pemdetect/spectral.hpp"

namespace pem::cli {

struct AxisSpec {
    double lo = 0.0;
    double hi = 1.0;
    int count = 2;
};

struct ScanSpec {
    AxisSpec d{0.1, 1.0, 46};
    AxisSpec x{0.0, 1.0, 51};
    std::vector<double> betas{1.0};
    double level = 1.0;
};

struct TuneSpec {
    ParameterPoint start{0.45, 0.75, 0.9};
    TuneOptions options;
};

struct VerifySpec {
    int n_elems = 200;
    int coarse_elems = 50;
    GridSpec frf_grid{1.0, 120.0, 30, 0.1};
    double frf_tol = 0.01;
    double coarse_tol = 0.04;
    double min_order = 2.0;
    double shift_lo = 1.5;   // percent
    double shift_hi = 4.5;
};

enum class LoadsMode { Summed, Separate };

struct RunConfig {
    SystemParams system;
    double eps = 0.05;
    std::optional<DamageProfile> truth;  // present when damage.d and damage.x are given
    GridSpec grid;
    std::vector<LoadCase> loads{{{0.0, 0.0}, {1.0, 0.0}}, {{1.0, 0.0}, {1.0, 0.0}}};
    LoadsMode loads_mode = LoadsMode::Summed;
    double beta_fixed = 1.0;
    IdentifyOptions identify;
    TuneSpec tune;
    ScanSpec scan;
    VerifySpec verify;
    double noise = 0.0;  // relative amplitude of complex Gaussian noise
    std::optional<std::uint64_t> seed;
    std::filesystem::path measurements;  // empty: synthesize in memory
    std::filesystem::path out_dir = "out";
    nlohmann::json canonical;            // effective config, used for the digest
};

/// Parses a config document. Relative paths resolve against `base`.
/// Throws InvalidInput on unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base = {});

RunConfig load_config(const std::filesystem::path& path);

/// SHA-256 of the compact dump of `doc`; object keys are sorted, so the
/// digest does not depend on key order in the source file.
std::string config_digest(const nlohmann::json& doc);

}  // namespace pem::cli
