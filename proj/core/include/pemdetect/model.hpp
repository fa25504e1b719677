#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pem {

using cplx = std::complex<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input (parameter ranges, grids, malformed files).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A numerical step failed (singular system, ill-conditioned element, ...).
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double omega, double rcond = 0.0)
        : Error(what), omega_(omega), rcond_(rcond) {}
    double omega() const { return omega_; }
    double rcond() const { return rcond_; }

private:
    double omega_;
    double rcond_;
};

/// Dimensionless constants of the coupled beam / transmission-line system.
struct SystemParams {
    double alpha0 = 1.0;   // baseline bending stiffness
    double beta = 1.0;     // line stiffness (inductance-derived)
    double gamma = 0.05;   // piezoelectric coupling
    double delta = 0.0;    // line resistance
};

/// Single rectangular notch of reduced bending stiffness.
/// alpha(s) = alpha0 * d on (x - eps, x + eps), alpha0 elsewhere.
struct DamageProfile {
    double d = 1.0;
    double x = 0.5;
    double eps = 0.05;
};

/// Point of the identification space: mechanical (d, x) plus electric tuning beta.
struct ParameterPoint {
    double d = 1.0;
    double x = 0.5;
    double beta = 1.0;
};

/// Electric bending moments applied at the two ends of the line, flat in omega.
struct LoadCase {
    cplx mu0{0.0, 0.0};
    cplx mu1{0.0, 0.0};
};

struct FrequencyGrid {
    std::vector<double> omegas;
};

/// Measured boundary slopes (phi'(0), phi'(1)) and the applied duals (mu0, mu1)
/// for one load case, one entry per grid frequency. The unmeasured input is
/// identically zero and therefore not stored.
struct MeasuredCase {
    LoadCase load;
    std::vector<std::array<cplx, 2>> response;
    std::vector<std::array<cplx, 2>> input;
};

struct MeasurementSet {
    FrequencyGrid grid;
    std::vector<MeasuredCase> cases;
};

enum class Status { Converged, MaxIters, DegenerateX, NotConverged };

std::string to_string(Status s);

struct TraceEntry {
    int iteration = 0;
    std::string step;  // "start", "min", "max", ...
    ParameterPoint point;
    double value = 0.0;
};

struct IdentificationResult {
    double d_hat = 1.0;
    double x_hat = 0.5;
    double beta_used = 1.0;
    double E_final = 0.0;
    std::vector<TraceEntry> trace;
    Status status = Status::MaxIters;
    int outer_iterations = 0;
};

/// Returns every violated invariant, empty when the pair is valid.
std::vector<std::string> validate_params(const SystemParams& p, const DamageProfile& dp);

/// Strictly increasing, positive, non-empty.
std::vector<std::string> validate_grid(const FrequencyGrid& grid);

/// Throws InvalidInput listing all violations.
void require_valid(const SystemParams& p, const DamageProfile& dp);

/// Bending stiffness at abscissa s. Interface points take the outside value.
double stiffness_at(double s, const SystemParams& p, const DamageProfile& dp);

}  // namespace pem
