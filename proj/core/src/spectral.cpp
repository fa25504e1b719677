#include "pemdetect/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pem {

namespace {

constexpr cplx I{0.0, 1.0};

struct QuarticCoefficients {
    cplx a, b, c;  // a*z^2 + b*z + c with z = k^4
};

QuarticCoefficients coefficients(double omega, double alpha_h, const SystemParams& p) {
    const double w2 = omega * omega;
    return {
        p.beta * alpha_h,
        I * p.delta * omega * alpha_h - (p.beta + alpha_h + p.gamma * p.gamma) * w2,
        w2 * w2 - I * p.delta * w2 * omega,
    };
}

cplx fourth_root(cplx z) {
    return std::polar(std::pow(std::abs(z), 0.25), std::arg(z) / 4.0);
}

std::string where(double a, double b, double omega) {
    std::ostringstream os;
    os.precision(10);
    os << "interval [" << a << ", " << b << "] at omega = " << omega;
    return os.str();
}

// Kernel vector (U, P) of the 2x2 symbol matrix at wavenumber k. Both rows
// give a valid null vector when det = 0; the larger one is the better conditioned.
std::array<cplx, 2> amplitude_ratio(cplx k, double omega, double alpha_h, const SystemParams& p) {
    const cplx k2 = k * k;
    const cplx k4 = k2 * k2;
    const double w2 = omega * omega;
    const std::array<cplx, 2> from_row1{I * omega * p.gamma * k2, alpha_h * k4 - w2};
    const std::array<cplx, 2> from_row2{p.beta * k4 - w2 + I * omega * p.delta, -I * omega * p.gamma * k2};
    const double n1 = std::hypot(std::abs(from_row1[0]), std::abs(from_row1[1]));
    const double n2 = std::hypot(std::abs(from_row2[0]), std::abs(from_row2[1]));
    const auto& v = n1 >= n2 ? from_row1 : from_row2;
    const double n = std::max(n1, n2);
    return {v[0] / n, v[1] / n};
}

ElementMatrix build_element(double a, double b, double omega, double alpha_h, const SystemParams& p,
                            const DispersionRoots& dr) {
    Matrix8c G;
    Matrix8c F;
    const double L = b - a;
    // Without coupling each branch is purely mechanical or purely electric,
    // which also holds when the two branches coincide.
    const bool decoupled = p.gamma == 0.0;
    const int u_branch = std::abs(alpha_h * dr.k4[0] - omega * omega) <= std::abs(alpha_h * dr.k4[1] - omega * omega) ? 0 : 1;
    for (int j = 0; j < 8; ++j) {
        const cplx k = dr.roots[static_cast<std::size_t>(j)];
        std::array<cplx, 2> amp;
        if (decoupled) {
            amp = j / 4 == u_branch ? std::array<cplx, 2>{1.0, 0.0} : std::array<cplx, 2>{0.0, 1.0};
        } else {
            amp = amplitude_ratio(k, omega, alpha_h, p);
        }
        const auto [U, P] = amp;
        // Growing exponentials are anchored at the right end so every basis
        // function is bounded by one on the element.
        const bool anchor_right = k.real() > 0.0;
        const cplx ea = anchor_right ? std::exp(-k * L) : cplx{1.0, 0.0};
        const cplx eb = anchor_right ? cplx{1.0, 0.0} : std::exp(k * L);
        const cplx k2 = k * k;
        const cplx k3 = k2 * k;
        for (int side = 0; side < 2; ++side) {
            const cplx e = side == 0 ? ea : eb;
            const double sgn = side == 0 ? -1.0 : 1.0;  // outward normal
            const int r = 4 * side;
            G(r + 0, j) = U * e;
            G(r + 1, j) = U * k * e;
            G(r + 2, j) = P * e;
            G(r + 3, j) = P * k * e;

            const cplx shear = (alpha_h * U * k3 - I * omega * p.gamma * P * k) * e;   // M'
            const cplx moment = alpha_h * U * k2 * e;                                   // alpha u''
            const cplx eshear = (p.beta * P * k3 + I * omega * p.gamma * U * k) * e;   // mu'
            const cplx emoment = p.beta * P * k2 * e;                                   // beta phi''
            F(r + 0, j) = -sgn * shear;
            F(r + 1, j) = sgn * moment;
            F(r + 2, j) = sgn * eshear;
            F(r + 3, j) = -sgn * emoment;
        }
    }

    ElementMatrix em;
    em.a = a;
    em.b = b;
    em.alpha_h = alpha_h;
    Eigen::PartialPivLU<Matrix8c> lu(G.transpose());
    em.rcond = lu.rcond();
    if (!(em.rcond > kMinRcond) || !std::isfinite(em.rcond)) {
        throw NumericalError("element conditioning failure on " + where(a, b, omega), omega, em.rcond);
    }
    em.K = lu.solve(F.transpose()).transpose();
    return em;
}

}  // namespace

cplx dispersion_residual(cplx k, double omega, double alpha_h, const SystemParams& p) {
    const auto c = coefficients(omega, alpha_h, p);
    const cplx z = k * k * k * k;
    return (c.a * z + c.b) * z + c.c;
}

double dispersion_scale(double omega, double alpha_h, const SystemParams& p) {
    const auto c = coefficients(omega, alpha_h, p);
    return std::max({std::abs(c.a), std::abs(c.b), std::abs(c.c)});
}

DispersionRoots dispersion_roots(double omega, double alpha_h, const SystemParams& p) {
    if (!(omega > 0.0) || !(alpha_h > 0.0) || !(p.beta > 0.0)) {
        throw InvalidInput("dispersion_roots requires omega > 0, alpha_h > 0, beta > 0");
    }
    const auto c = coefficients(omega, alpha_h, p);
    if (!std::isfinite(std::abs(c.a)) || !std::isfinite(std::abs(c.b)) || !std::isfinite(std::abs(c.c))) {
        throw NumericalError("non-finite dispersion coefficients", omega);
    }
    cplx z1, z2;
    if (p.gamma == 0.0) {
        // Decoupled: the quadratic factors exactly. The formula below would
        // lose half the digits near the repeated root alpha_h = beta.
        z1 = omega * omega / alpha_h;
        z2 = (omega * omega - I * omega * p.delta) / p.beta;
    } else {
        // Cancellation-free quadratic formula.
        const cplx disc = std::sqrt(c.b * c.b - 4.0 * c.a * c.c);
        const cplx q = std::real(std::conj(c.b) * disc) >= 0.0 ? -0.5 * (c.b + disc) : -0.5 * (c.b - disc);
        if (std::abs(q) == 0.0) throw NumericalError("both k^4 branches vanish", omega);
        z1 = q / c.a;
        z2 = c.c / q;
    }
    if (std::abs(z1) < std::abs(z2)) std::swap(z1, z2);

    DispersionRoots dr;
    dr.k4 = {z1, z2};
    dr.degenerate = std::abs(z1 - z2) < kDegeneracyTol * std::abs(z1);
    constexpr std::array<cplx, 4> units{cplx{1, 0}, cplx{-1, 0}, cplx{0, 1}, cplx{0, -1}};
    for (std::size_t br = 0; br < 2; ++br) {
        const cplx r = fourth_root(dr.k4[br]);
        for (std::size_t u = 0; u < 4; ++u) dr.roots[4 * br + u] = units[u] * r;
    }
    return dr;
}

ElementMatrix element_matrix(double a, double b, double omega, double alpha_h, const SystemParams& p) {
    if (!(b > a)) throw InvalidInput("element interval must satisfy b > a");
    const auto dr = dispersion_roots(omega, alpha_h, p);
    if (!dr.degenerate || p.gamma == 0.0) return build_element(a, b, omega, alpha_h, p, dr);

    SystemParams shifted = p;
    shifted.beta *= 1.0 + kDegeneracyShift;
    auto em = build_element(a, b, omega, alpha_h, shifted, dispersion_roots(omega, alpha_h, shifted));
    em.perturbed = true;
    return em;
}

std::string DofLabel::name() const {
    std::string s = field == Field::Displacement ? "u" : "phi";
    if (derivative == 1) s += "'";
    return s + "@" + std::to_string(node);
}

DynamicStiffness assemble(double omega, const SystemParams& p, const DamageProfile& dp) {
    require_valid(p, dp);
    if (!(omega > 0.0)) throw InvalidInput("assemble requires omega > 0");

    DynamicStiffness ds;
    ds.omega = omega;
    ds.nodes = {0.0, dp.x - dp.eps, dp.x + dp.eps, 1.0};
    const std::array<double, 3> alphas{p.alpha0, p.alpha0 * dp.d, p.alpha0};

    Eigen::Matrix<cplx, 16, 16> full = Eigen::Matrix<cplx, 16, 16>::Zero();
    for (int h = 0; h < 3; ++h) {
        const auto hu = static_cast<std::size_t>(h);
        const auto em = element_matrix(ds.nodes[hu], ds.nodes[hu + 1], omega, alphas[hu], p);
        ds.perturbed = ds.perturbed || em.perturbed;
        full.block<8, 8>(4 * h, 4 * h) += em.K;
    }

    // u and phi vanish at both ends.
    std::vector<int> keep;
    for (int g = 0; g < 16; ++g) {
        const int node = g / 4;
        const int local = g % 4;
        const bool end = node == 0 || node == 3;
        if (end && (local == 0 || local == 2)) continue;
        keep.push_back(g);
        ds.dofs.push_back({node, local < 2 ? Field::Displacement : Field::FluxLinkage, local % 2});
    }
    const auto n = static_cast<Eigen::Index>(keep.size());
    ds.D.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) ds.D(i, j) = full(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
    ds.rcond = Eigen::PartialPivLU<MatrixXc>(ds.D).rcond();
    return ds;
}

CondensedPair condense(const MatrixXc& D, std::span<const int> measured, double omega) {
    const auto n = D.rows();
    if (D.cols() != n) throw InvalidInput("condense requires a square matrix");
    std::vector<bool> is_measured(static_cast<std::size_t>(n), false);
    for (int m : measured) {
        if (m < 0 || m >= n || is_measured[static_cast<std::size_t>(m)]) {
            throw InvalidInput("condense: measured index out of range or repeated");
        }
        is_measured[static_cast<std::size_t>(m)] = true;
    }
    std::vector<int> rest;
    for (int i = 0; i < n; ++i)
        if (!is_measured[static_cast<std::size_t>(i)]) rest.push_back(i);

    const auto nm = static_cast<Eigen::Index>(measured.size());
    const auto nn = static_cast<Eigen::Index>(rest.size());
    MatrixXc Dmm(nm, nm), Dmn(nm, nn), Dnm(nn, nm), Dnn(nn, nn);
    for (Eigen::Index i = 0; i < nm; ++i) {
        for (Eigen::Index j = 0; j < nm; ++j) Dmm(i, j) = D(measured[static_cast<std::size_t>(i)], measured[static_cast<std::size_t>(j)]);
        for (Eigen::Index j = 0; j < nn; ++j) Dmn(i, j) = D(measured[static_cast<std::size_t>(i)], rest[static_cast<std::size_t>(j)]);
    }
    for (Eigen::Index i = 0; i < nn; ++i) {
        for (Eigen::Index j = 0; j < nm; ++j) Dnm(i, j) = D(rest[static_cast<std::size_t>(i)], measured[static_cast<std::size_t>(j)]);
        for (Eigen::Index j = 0; j < nn; ++j) Dnn(i, j) = D(rest[static_cast<std::size_t>(i)], rest[static_cast<std::size_t>(j)]);
    }

    CondensedPair cp;
    if (nn == 0) {
        cp.D_tilde = Dmm;
        cp.H.resize(nm, 0);
        return cp;
    }
    Eigen::PartialPivLU<MatrixXc> lu(Dnn);
    const double rc = lu.rcond();
    if (!(rc > kMinRcond) || !std::isfinite(rc)) {
        std::ostringstream os;
        os << "condensation failed: unmeasured block singular at omega = " << omega;
        throw NumericalError(os.str(), omega, rc);
    }
    // H = Dmn Dnn^-1  <=>  Dnn^T H^T = Dmn^T
    cp.H = Eigen::PartialPivLU<MatrixXc>(Dnn.transpose()).solve(Dmn.transpose()).transpose();
    cp.D_tilde = Dmm - Dmn * lu.solve(Dnm);
    return cp;
}

std::array<cplx, 2> boundary_forces(const std::array<cplx, 2>& mu) {
    return {mu[0], -mu[1]};
}

VectorXc solve_frf(double omega, const SystemParams& p, const DamageProfile& dp, const LoadCase& load) {
    const auto ds = assemble(omega, p, dp);
    VectorXc rhs = VectorXc::Zero(ds.D.rows());
    const auto f = boundary_forces({load.mu0, load.mu1});
    rhs(kMeasuredDofs[0]) = f[0];
    rhs(kMeasuredDofs[1]) = f[1];
    Eigen::PartialPivLU<MatrixXc> lu(ds.D);
    const double rc = lu.rcond();
    if (!(rc > kMinRcond) || !std::isfinite(rc)) {
        std::ostringstream os;
        os << "dynamic stiffness singular at omega = " << omega << " (rcond " << rc << ")";
        throw NumericalError(os.str(), omega, rc);
    }
    return lu.solve(rhs);
}

std::array<cplx, 2> measured_pair(const VectorXc& response) {
    return {response(kMeasuredDofs[0]), response(kMeasuredDofs[1])};
}

MeasurementSet synthesize_measurements(const SystemParams& p,
                                       const DamageProfile& truth,
                                       const FrequencyGrid& grid,
                                       const std::vector<LoadCase>& loads,
                                       std::vector<std::string>* warnings) {
    require_valid(p, truth);
    if (auto errs = validate_grid(grid); !errs.empty()) throw InvalidInput("invalid frequency grid: " + errs.front());
    if (loads.empty()) throw InvalidInput("at least one load case is required");
    for (const auto& l : loads) {
        if (l.mu0 == cplx{} && l.mu1 == cplx{}) throw InvalidInput("load case (0, 0) carries no excitation");
    }

    MeasurementSet ms;
    ms.cases.resize(loads.size());
    for (std::size_t c = 0; c < loads.size(); ++c) ms.cases[c].load = loads[c];

    for (double omega : grid.omegas) {
        std::vector<std::array<cplx, 2>> row;
        try {
            for (const auto& l : loads) row.push_back(measured_pair(solve_frf(omega, p, truth, l)));
        } catch (const NumericalError& e) {
            if (warnings) warnings->push_back(std::string("dropped frequency: ") + e.what());
            continue;
        }
        ms.grid.omegas.push_back(omega);
        for (std::size_t c = 0; c < loads.size(); ++c) {
            ms.cases[c].response.push_back(row[c]);
            ms.cases[c].input.push_back({loads[c].mu0, loads[c].mu1});
        }
    }
    return ms;
}

std::vector<double> undamaged_resonances(const SystemParams& p, double omega_max) {
    const double s = p.beta + p.alpha0 + p.gamma * p.gamma;
    const double root = std::sqrt(s * s - 4.0 * p.beta * p.alpha0);
    std::vector<double> out;
    for (int n = 1;; ++n) {
        const double k2 = n * std::numbers::pi * n * std::numbers::pi;
        const double lo = k2 * std::sqrt(0.5 * (s - root));
        const double hi = k2 * std::sqrt(0.5 * (s + root));
        if (lo > omega_max) break;
        out.push_back(lo);
        if (hi <= omega_max) out.push_back(hi);
    }
    std::sort(out.begin(), out.end());
    return out;
}

FrequencyGrid make_guarded_grid(const SystemParams& p, double lo, double hi, int count, double guard) {
    if (!(lo > 0.0) || !(hi > lo) || count < 1) throw InvalidInput("grid needs 0 < lo < hi and count >= 1");
    const auto res = undamaged_resonances(p, 2.0 * hi + 10.0);
    std::vector<double> radius(res.size(), 0.0);
    for (std::size_t r = 0; r < res.size(); ++r) {
        double spacing = std::numeric_limits<double>::infinity();
        if (r > 0) spacing = std::min(spacing, res[r] - res[r - 1]);
        if (r + 1 < res.size()) spacing = std::min(spacing, res[r + 1] - res[r]);
        if (!std::isfinite(spacing)) spacing = res[r];
        radius[r] = guard * spacing;
    }

    FrequencyGrid grid;
    for (int i = 0; i < count; ++i) {
        double w = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
        for (int pass = 0; pass < 4; ++pass) {
            bool moved = false;
            for (std::size_t r = 0; r < res.size(); ++r) {
                if (std::abs(w - res[r]) < radius[r]) {
                    w = w >= res[r] ? res[r] + radius[r] * 1.0000001 : res[r] - radius[r] * 1.0000001;
                    moved = true;
                }
            }
            if (!moved) break;
        }
        if (!grid.omegas.empty() && w <= grid.omegas.back()) continue;
        grid.omegas.push_back(w);
    }
    return grid;
}

FrequencyGrid make_guarded_grid(const SystemParams& p, const GridSpec& spec) {
    return make_guarded_grid(p, spec.lo, spec.hi, spec.count, spec.guard);
}

}  // namespace pem
