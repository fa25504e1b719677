#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pemcli/run_config.hpp"

namespace pem::cli {

struct Check {
    std::string name;
    bool passed = false;
    nlohmann::json values;
};

/// Largest relative difference between the finite-element and spectral
/// boundary responses over the grid, all loads and both measured slopes.
double frf_discrepancy(const SystemParams& p,
                       const DamageProfile& dp,
                       const std::vector<LoadCase>& loads,
                       const FrequencyGrid& grid,
                       int n_elems);

/// Relative shifts (percent) of the first `n_modes` mechanical natural
/// frequencies, damaged against undamaged, from the finite-element model.
std::vector<double> mechanical_shifts(const SystemParams& p, const DamageProfile& dp, int n_elems, int n_modes);

/// Same for the coupled system (mechanical and electric modes interleaved).
std::vector<double> coupled_shifts(const SystemParams& p, const DamageProfile& dp, int n_elems, int n_modes);

/// Cross-validation of the spectral solver against the finite-element
/// oracle, plus the eigenfrequency-shift check when a true damage is given.
std::vector<Check> run_verification(const RunConfig& cfg);

}  // namespace pem::cli
