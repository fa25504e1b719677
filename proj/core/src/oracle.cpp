#include "pemdetect/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

namespace pem {

namespace {

using Mat4 = Eigen::Matrix4d;

struct HermiteMatrices {
    Mat4 stiffness;  // int N'' N''
    Mat4 mass;       // int N N
    Mat4 gram;       // int N' N'
};

// Cubic Hermite element on a segment of length h, integrated with 4-point
// Gauss-Legendre (exact up to degree 7).
HermiteMatrices hermite(double h) {
    static constexpr std::array<double, 4> xi{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                              0.8611363115940526};
    static constexpr std::array<double, 4> wt{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                              0.3478548451374538};
    HermiteMatrices m{Mat4::Zero(), Mat4::Zero(), Mat4::Zero()};
    for (std::size_t q = 0; q < 4; ++q) {
        const double t = 0.5 * (xi[q] + 1.0);
        const double w = 0.5 * h * wt[q];
        const Eigen::Vector4d N(1 - 3 * t * t + 2 * t * t * t, h * (t - 2 * t * t + t * t * t),
                                3 * t * t - 2 * t * t * t, h * (-t * t + t * t * t));
        const Eigen::Vector4d N1 = Eigen::Vector4d(-6 * t + 6 * t * t, h * (1 - 4 * t + 3 * t * t),
                                                   6 * t - 6 * t * t, h * (-2 * t + 3 * t * t)) / h;
        const Eigen::Vector4d N2 =
            Eigen::Vector4d(-6 + 12 * t, h * (-4 + 6 * t), 6 - 12 * t, h * (-2 + 6 * t)) / (h * h);
        m.stiffness += w * N2 * N2.transpose();
        m.mass += w * N * N.transpose();
        m.gram += w * N1 * N1.transpose();
    }
    return m;
}

using Triplets = std::vector<Eigen::Triplet<double>>;

}  // namespace

FeMesh make_mesh(const SystemParams& p, const DamageProfile& dp, int n_elems) {
    require_valid(p, dp);
    if (n_elems < 12) throw InvalidInput("FE mesh needs at least 12 elements");
    const std::array<double, 4> bounds{0.0, dp.x - dp.eps, dp.x + dp.eps, 1.0};
    std::array<int, 3> count{};
    int total = 0;
    for (std::size_t s = 0; s < 3; ++s) {
        count[s] = std::max(1, static_cast<int>(std::lround(n_elems * (bounds[s + 1] - bounds[s]))));
        total += count[s];
    }
    // Absorb rounding in the longest segment.
    const auto longest = static_cast<std::size_t>(std::distance(count.begin(), std::max_element(count.begin(), count.end())));
    count[longest] += n_elems - total;

    FeMesh mesh;
    mesh.nodes.push_back(0.0);
    for (std::size_t s = 0; s < 3; ++s) {
        const double alpha = s == 1 ? p.alpha0 * dp.d : p.alpha0;
        for (int i = 1; i <= count[s]; ++i) {
            mesh.nodes.push_back(i == count[s] ? bounds[s + 1]
                                               : bounds[s] + (bounds[s + 1] - bounds[s]) * i / count[s]);
            mesh.alpha.push_back(alpha);
        }
    }
    return mesh;
}

FeSystem fe_assemble(const SystemParams& p, const DamageProfile& dp, const FeMesh& mesh) {
    require_valid(p, dp);
    const int ne = mesh.n_elems();
    if (ne < 12 || mesh.nodes.size() != static_cast<std::size_t>(ne + 1)) {
        throw InvalidInput("FE mesh needs at least 12 elements and one more node than elements");
    }
    auto has_node = [&](double s) {
        return std::any_of(mesh.nodes.begin(), mesh.nodes.end(), [&](double n) { return std::abs(n - s) < 1e-12; });
    };
    if (!has_node(dp.x - dp.eps) || !has_node(dp.x + dp.eps)) {
        throw InvalidInput("FE mesh is not aligned with the damage-zone boundaries");
    }
    for (int e = 0; e < ne; ++e) {
        const double mid = 0.5 * (mesh.nodes[static_cast<std::size_t>(e)] + mesh.nodes[static_cast<std::size_t>(e) + 1]);
        if (std::abs(mesh.alpha[static_cast<std::size_t>(e)] - stiffness_at(mid, p, dp)) > 1e-12 * p.alpha0) {
            throw InvalidInput("FE mesh stiffness does not match the damage profile");
        }
    }

    // Per field: global (value, slope) index 2*node + {0,1}; drop value at both ends.
    const int per_field_full = 2 * (ne + 1);
    std::vector<int> reduced(static_cast<std::size_t>(per_field_full), -1);
    int next = 0;
    for (int g = 0; g < per_field_full; ++g) {
        if (g == 0 || g == per_field_full - 2) continue;
        reduced[static_cast<std::size_t>(g)] = next++;
    }
    const int nb = next;

    Triplets k, m, c;
    auto add = [&](Triplets& t, int row_block, int col_block, int e, const Mat4& local, double scale) {
        for (int i = 0; i < 4; ++i) {
            const int gi = reduced[static_cast<std::size_t>(2 * e + i)];
            if (gi < 0) continue;
            for (int j = 0; j < 4; ++j) {
                const int gj = reduced[static_cast<std::size_t>(2 * e + j)];
                if (gj < 0) continue;
                t.emplace_back(row_block * nb + gi, col_block * nb + gj, scale * local(i, j));
            }
        }
    };
    for (int e = 0; e < ne; ++e) {
        const auto h = hermite(mesh.nodes[static_cast<std::size_t>(e) + 1] - mesh.nodes[static_cast<std::size_t>(e)]);
        add(k, 0, 0, e, h.stiffness, mesh.alpha[static_cast<std::size_t>(e)]);
        add(k, 1, 1, e, h.stiffness, p.beta);
        add(m, 0, 0, e, h.mass, 1.0);
        add(m, 1, 1, e, h.mass, 1.0);
        // -i w gamma int phi v'' = +i w gamma int phi' v' once phi(0) = phi(1) = 0.
        add(c, 0, 1, e, h.gram, p.gamma);
        add(c, 1, 0, e, h.gram, -p.gamma);
        add(c, 1, 1, e, h.mass, p.delta);
    }

    FeSystem sys;
    sys.block_size = nb;
    sys.K.resize(2 * nb, 2 * nb);
    sys.M.resize(2 * nb, 2 * nb);
    sys.C.resize(2 * nb, 2 * nb);
    sys.K.setFromTriplets(k.begin(), k.end());
    sys.M.setFromTriplets(m.begin(), m.end());
    sys.C.setFromTriplets(c.begin(), c.end());
    sys.C.prune(0.0);
    sys.measured = {nb + reduced[1], nb + reduced[static_cast<std::size_t>(per_field_full) - 1]};
    return sys;
}

std::vector<double> mechanical_eigenfrequencies(const FeSystem& sys, int n_modes) {
    const int nb = sys.block_size;
    const Eigen::MatrixXd K = Eigen::MatrixXd(sys.K).topLeftCorner(nb, nb);
    const Eigen::MatrixXd M = Eigen::MatrixXd(sys.M).topLeftCorner(nb, nb);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("mechanical eigen-solver failed", 0.0);
    std::vector<double> out;
    for (int i = 0; i < std::min<int>(n_modes, nb); ++i) out.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i))));
    return out;
}

std::vector<double> eigenfrequencies(const FeSystem& sys, int n_modes) {
    const Eigen::MatrixXd K(sys.K);
    const Eigen::MatrixXd M(sys.M);
    const Eigen::MatrixXd C(sys.C);
    const auto n = K.rows();
    std::vector<double> out;

    if (C.norm() == 0.0) {
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw NumericalError("eigen-solver failed", 0.0);
        for (int i = 0; i < std::min<Eigen::Index>(n_modes, n); ++i)
            out.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i))));
        return out;
    }
    if ((C + C.transpose()).norm() > 1e-12 * C.norm()) {
        throw InvalidInput("eigenfrequencies: damped systems are not supported (delta must be 0)");
    }

    // M q'' + C q' + K q = 0 with C skew. With z = [q'; q]:
    //   diag(M, K) z' = [[-C, -K], [K, 0]] z,
    // a skew pencil against an SPD matrix, so L^-1 A L^-T is real skew and
    // i * (L^-1 A L^-T) is Hermitian with eigenvalues +-omega.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    A.topLeftCorner(n, n) = -C;
    A.topRightCorner(n, n) = -K;
    A.bottomLeftCorner(n, n) = K;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    B.topLeftCorner(n, n) = M;
    B.bottomRightCorner(n, n) = K;
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success) throw NumericalError("eigen-solver: mass/stiffness not positive definite", 0.0);
    Eigen::MatrixXd S = llt.matrixL().solve(A);
    S = llt.matrixL().solve(S.transpose()).transpose();
    const Eigen::MatrixXcd herm = cplx{0.0, 1.0} * S.cast<cplx>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("eigen-solver failed", 0.0);
    for (Eigen::Index i = 0; i < es.eigenvalues().size() && static_cast<int>(out.size()) < n_modes; ++i) {
        if (es.eigenvalues()(i) > 0.0) out.push_back(es.eigenvalues()(i));
    }
    return out;
}

std::array<cplx, 2> fe_frf(const FeSystem& sys, double omega, const LoadCase& load) {
    using SpC = Eigen::SparseMatrix<cplx>;
    const SpC D = sys.K.cast<cplx>() - (omega * omega) * sys.M.cast<cplx>() + cplx{0.0, omega} * sys.C.cast<cplx>();
    Eigen::SparseLU<SpC> lu;
    lu.compute(D);
    if (lu.info() != Eigen::Success) {
        std::ostringstream os;
        os << "FE dynamic stiffness singular at omega = " << omega;
        throw NumericalError(os.str(), omega);
    }
    // Natural terms of the electric equation: -mu(0) psi'(0) + mu(1) psi'(1).
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(D.rows());
    rhs(sys.measured[0]) = -load.mu0;
    rhs(sys.measured[1]) = load.mu1;
    const Eigen::VectorXcd sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !sol.allFinite()) {
        throw NumericalError("FE solve failed", omega);
    }
    return {sol(sys.measured[0]), sol(sys.measured[1])};
}

}  // namespace pem
