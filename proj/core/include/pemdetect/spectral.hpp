#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pemdetect/model.hpp"

namespace pem {

using Matrix8c = Eigen::Matrix<cplx, 8, 8>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

/// Wavenumbers of one constant-coefficient interval.
///
/// The dispersion relation is quadratic in k^4:
///   beta*alpha*k^8 + (i*delta*omega*alpha - (beta + alpha + gamma^2)*omega^2)*k^4
///     + omega^4 - i*delta*omega^3 = 0,
/// so the eight roots are {1, -1, i, -i} times the principal fourth roots of the
/// two k^4 branches. `roots[0..3]` belong to `k4[0]`, `roots[4..7]` to `k4[1]`.
struct DispersionRoots {
    std::array<cplx, 8> roots{};
    std::array<cplx, 2> k4{};
    bool degenerate = false;
};

/// Relative tolerance on |k4[0] - k4[1]| below which the branches are considered equal.
inline constexpr double kDegeneracyTol = 1e-8;
/// Multiplicative perturbation applied to beta when the branches coincide.
inline constexpr double kDegeneracyShift = 1e-9;
/// Element/system reciprocal-condition floor.
inline constexpr double kMinRcond = 1e-14;

DispersionRoots dispersion_roots(double omega, double alpha_h, const SystemParams& p);

/// Value of the characteristic polynomial at k.
cplx dispersion_residual(cplx k, double omega, double alpha_h, const SystemParams& p);

/// Largest coefficient magnitude of the characteristic polynomial in k^4.
double dispersion_scale(double omega, double alpha_h, const SystemParams& p);

/// Exact dynamic stiffness of one interval.
///
/// Nodal order is (u, u', phi, phi') at `a` followed by the same at `b`. The
/// duals are, with outward sign, the shear M', the bending moment alpha*u'',
/// the electric shear mu' and the electric moment beta*phi''. The electric
/// equation enters with a negative sign so that K is complex symmetric; as a
/// consequence the dual of phi' at the left end is +mu(0) and at the right
/// end is -mu(1) (see `boundary_forces`).
struct ElementMatrix {
    double a = 0.0;
    double b = 1.0;
    double alpha_h = 1.0;
    Matrix8c K;
    double rcond = 0.0;
    bool perturbed = false;  // beta nudged off a degenerate root pair
};

ElementMatrix element_matrix(double a, double b, double omega, double alpha_h, const SystemParams& p);

enum class Field { Displacement, FluxLinkage };

struct DofLabel {
    int node = 0;        // 0..3 along the beam
    Field field = Field::Displacement;
    int derivative = 0;  // 0 = value, 1 = slope
    std::string name() const;
};

/// Assembled free-DOF dynamic stiffness of the three-interval beam.
struct DynamicStiffness {
    MatrixXc D;
    std::vector<DofLabel> dofs;
    std::array<double, 4> nodes{};
    double omega = 0.0;
    double rcond = 0.0;        // reciprocal condition estimate of D
    bool perturbed = false;
};

/// Number of free DOFs after eliminating u and phi at both ends.
inline constexpr int kFreeDofs = 12;
/// Free-DOF indices of phi'(0) and phi'(1).
inline constexpr std::array<int, 2> kMeasuredDofs{1, 11};

DynamicStiffness assemble(double omega, const SystemParams& p, const DamageProfile& dp);

/// Schur condensation onto the measured DOFs: D~ = Dmm - Dmn Dnn^-1 Dnm, H = Dmn Dnn^-1.
struct CondensedPair {
    MatrixXc D_tilde;
    MatrixXc H;
};

CondensedPair condense(const MatrixXc& D, std::span<const int> measured, double omega = 0.0);

/// Generalized forces dual to (phi'(0), phi'(1)) for applied moments (mu0, mu1).
std::array<cplx, 2> boundary_forces(const std::array<cplx, 2>& mu);

/// Full free-DOF response of D * O = I for the given load.
VectorXc solve_frf(double omega, const SystemParams& p, const DamageProfile& dp, const LoadCase& load);

/// Boundary slopes (phi'(0), phi'(1)) from a full response.
std::array<cplx, 2> measured_pair(const VectorXc& response);

/// Synthetic experiment: solves every (omega, load) pair at the true profile.
/// Frequencies that fail for any load are dropped and reported in `warnings`.
MeasurementSet synthesize_measurements(const SystemParams& p,
                                       const DamageProfile& truth,
                                       const FrequencyGrid& grid,
                                       const std::vector<LoadCase>& loads,
                                       std::vector<std::string>* warnings = nullptr);

/// Natural frequencies of the undamaged, simply supported and grounded
/// system (delta = 0) below `omega_max`, ascending.
std::vector<double> undamaged_resonances(const SystemParams& p, double omega_max);

/// `count` uniformly spaced frequencies on [lo, hi], each moved at least
/// `guard` times the local modal spacing away from the undamaged resonances.
FrequencyGrid make_guarded_grid(const SystemParams& p, double lo, double hi, int count, double guard = 0.02);

/// Band and guard of a guarded grid. The default band brackets the first
/// coupled mode pair of the baseline system.
struct GridSpec {
    double lo = 0.5;
    double hi = 15.0;
    int count = 40;
    double guard = 0.02;
};

FrequencyGrid make_guarded_grid(const SystemParams& p, const GridSpec& spec);

}  // namespace pem
