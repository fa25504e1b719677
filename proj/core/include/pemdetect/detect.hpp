#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pemdetect/model.hpp"
#include "pemdetect/nelder_mead.hpp"
#include "pemdetect/spectral.hpp"

namespace pem {

struct FunctionalConfig {
    FrequencyGrid grid;
    std::vector<LoadCase> loads;
    double sensitivity_level = 1.0;
};

void validate(const FunctionalConfig& cfg);

/// Weighting of the per-frequency residual terms. Unweighted by default;
/// `normalize_by_input` divides every term by |g(omega_k)|^2.
struct FunctionalOptions {
    bool normalize_by_input = false;
};

struct FunctionalBreakdown {
    double value = 0.0;
    int frequencies_used = 0;
    std::vector<double> skipped;  // frequencies where the model could not be condensed
};

/// Damage functional: sum over load cases and frequencies of
/// |D~(omega_k, pi) m(omega_k) - g(omega_k)|^2 (the unmeasured input is zero).
/// A frequency where the model fails is skipped for every load case.
FunctionalBreakdown evaluate_functional_detailed(const ParameterPoint& pi,
                                                 const MeasurementSet& data,
                                                 const SystemParams& p,
                                                 double eps,
                                                 const FunctionalOptions& opts = {});

double evaluate_functional(const ParameterPoint& pi,
                           const MeasurementSet& data,
                           const SystemParams& p,
                           double eps,
                           std::vector<std::string>* warnings = nullptr,
                           const FunctionalOptions& opts = {});

/// Sum over the data of |g(omega_k)|^2, the natural scale of the functional.
double input_energy(const MeasurementSet& data);

/// Experiment performed with the line tuned to `beta`.
using MeasurementSource = std::function<MeasurementSet(double beta)>;

/// Experiment whose data does not depend on the tuning.
MeasurementSource fixed_source(MeasurementSet data);

/// Synthetic experiment: re-measures the true profile at each tuning.
MeasurementSource synthetic_source(SystemParams p, DamageProfile truth, FrequencyGrid grid, std::vector<LoadCase> loads);

/// As above, but the grid is rebuilt at each tuning so it stays clear of the
/// resonances of the retuned undamaged line.
MeasurementSource synthetic_source(SystemParams p, DamageProfile truth, GridSpec grid, std::vector<LoadCase> loads);

struct IdentifyOptions {
    SimplexOptions simplex;
    int starts = 4;
    double d_min = 0.05;           // lower edge of the d search interval
    double degenerate_d = 0.99;    // d_hat above this leaves x unidentifiable
    double start_step = 0.1;       // start-simplex edge as a fraction of the box
    bool test_undamaged = true;    // also score the undamaged model against the starts
};

/// Box of admissible (d, x) for a damage half-width eps.
Box damage_box(double eps, double d_min);

/// Multi-start Nelder-Mead over (d, x) at fixed beta.
IdentificationResult identify(const MeasurementSet& data,
                              const SystemParams& p,
                              double eps,
                              double beta_fixed,
                              const IdentifyOptions& opts = {});

struct TuneOptions {
    IdentifyOptions identify;
    double beta_lo = 0.5;
    double beta_hi = 2.0;
    double golden_tol = 1e-4;
    double step_tol = 1e-6;  // outer stop: |pi1_{k+1} - pi1_k| below this
    int max_outer = 20;
    double local_step = 0.02;  // simplex edge of the inner minimization
    double beta_floor = 1e-10;  // beta moves only if E rises by this times the input energy
};

/// Golden-section maximization of a scalar function on [lo, hi].
double golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol);

/// Alternating scheme: maximize the functional over beta at the current
/// damage estimate, then minimize over (d, x) at that beta, until the damage
/// estimate stops moving. Converges only from a neighbourhood of the truth.
IdentificationResult tune_minmax(const MeasurementSource& source,
                                 const SystemParams& p,
                                 double eps,
                                 const ParameterPoint& start,
                                 const TuneOptions& opts = {});

struct SurfaceScan {
    std::vector<double> d_axis;
    std::vector<double> x_axis;
    std::vector<double> beta_axis;
    /// log10 of the functional, index [(b * nd + i) * nx + j]; NaN for failed cells.
    std::vector<double> log10_E;
    std::vector<unsigned char> in_sublevel;
    std::vector<double> area;  // per beta, fraction of valid cells with E <= level
    double sensitivity_level = 1.0;

    std::size_t index(std::size_t b, std::size_t i, std::size_t j) const {
        return (b * d_axis.size() + i) * x_axis.size() + j;
    }
};

/// Fills the log10 functional over the (d, x, beta) tensor grid. Each beta
/// slice is compared against `source(beta)`. Cells with x outside (eps, 1-eps)
/// or d outside (0, 1] are marked failed.
SurfaceScan scan_surface(const SystemParams& p,
                         double eps,
                         const MeasurementSource& source,
                         const std::vector<double>& d_axis,
                         const std::vector<double>& x_axis,
                         const std::vector<double>& beta_axis,
                         double sensitivity_level,
                         int threads = 0);

/// Worker count: `requested` if positive, else PEM_THREADS, else hardware.
int thread_count(int requested = 0);

std::vector<double> linspace(double lo, double hi, int n);

}  // namespace pem
