#pragma once

#include <array>
#include <vector>

#include <Eigen/Sparse>

#include "pemdetect/model.hpp"

namespace pem {

/// 1-D mesh whose nodes include both damage-zone boundaries.
struct FeMesh {
    std::vector<double> nodes;
    std::vector<double> alpha;  // per element
    int n_elems() const { return static_cast<int>(alpha.size()); }
};

/// Distributes `n_elems` cubic elements over [0, x-eps], [x-eps, x+eps],
/// [x+eps, 1] in proportion to their lengths (at least one per segment).
FeMesh make_mesh(const SystemParams& p, const DamageProfile& dp, int n_elems);

/// Cubic-Hermite discretization of the coupled beam / line:
///   D_FE(omega) = K - omega^2 M + i omega C.
///
/// Unknowns are ordered [u-block | phi-block], each holding (value, slope)
/// per node with the end values removed. K and M are symmetric, M is positive
/// definite; C carries the gyroscopic coupling gamma * (u'-phi' Gram matrix)
/// skew-symmetrically between the blocks and delta * mass on the phi block.
struct FeSystem {
    Eigen::SparseMatrix<double> K;
    Eigen::SparseMatrix<double> M;
    Eigen::SparseMatrix<double> C;
    int block_size = 0;                 // DOFs per field
    std::array<int, 2> measured{0, 0};  // phi'(0), phi'(1)
};

FeSystem fe_assemble(const SystemParams& p, const DamageProfile& dp, const FeMesh& mesh);

/// Undamped natural frequencies of the full system, ascending. With
/// coupling present the gyroscopic problem is solved through a
/// skew/positive-definite linearization; delta must be zero.
std::vector<double> eigenfrequencies(const FeSystem& sys, int n_modes);

/// Natural frequencies of the mechanical block alone (gamma ignored).
std::vector<double> mechanical_eigenfrequencies(const FeSystem& sys, int n_modes);

/// Boundary slopes (phi'(0), phi'(1)) for the same load placement as the
/// spectral solver.
std::array<cplx, 2> fe_frf(const FeSystem& sys, double omega, const LoadCase& load);

}  // namespace pem
