#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "pemcli/run_config.hpp"

namespace pem::cli {

enum ExitCode : int { kOk = 0, kInvalidInput = 1, kNumericalFailure = 2, kVerificationFailure = 3 };

struct Invocation {
    std::string command;  // synthesize | identify | scan | tune | verify
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    bool tune = false;
};

/// Runs one command and writes its artifacts. Never throws; failures map to
/// the exit codes above and a one-line message on `err`.
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

nlohmann::json to_json(const IdentificationResult& r);

/// Experiment behind a config: the measurement file when one is given (fixed
/// across tunings), else a synthetic re-measurement of the true profile.
MeasurementSource experiment(const RunConfig& cfg, std::vector<std::string>& warnings);

}  // namespace pem::cli
