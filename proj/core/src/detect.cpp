#include "pemdetect/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "pemdetect/spectral.hpp"

namespace pem {

void validate(const FunctionalConfig& cfg) {
    if (auto errs = validate_grid(cfg.grid); !errs.empty()) throw InvalidInput("invalid frequency grid: " + errs.front());
    if (cfg.loads.empty()) throw InvalidInput("functional needs at least one load case");
    if (!(cfg.sensitivity_level > 0.0)) throw InvalidInput("sensitivity_level must be > 0");
}

FunctionalBreakdown evaluate_functional_detailed(const ParameterPoint& pi,
                                                 const MeasurementSet& data,
                                                 const SystemParams& p,
                                                 double eps,
                                                 const FunctionalOptions& opts) {
    SystemParams model = p;
    model.beta = pi.beta;
    const DamageProfile dp{pi.d, pi.x, eps};
    require_valid(model, dp);

    FunctionalBreakdown out;
    const auto K = data.grid.omegas.size();
    for (std::size_t k = 0; k < K; ++k) {
        const double omega = data.grid.omegas[k];
        CondensedPair cp;
        try {
            cp = condense(assemble(omega, model, dp).D, kMeasuredDofs, omega);
        } catch (const NumericalError&) {
            out.skipped.push_back(omega);
            continue;
        }
        for (const auto& c : data.cases) {
            const Eigen::Vector2cd m(c.response[k][0], c.response[k][1]);
            const auto g = boundary_forces(c.input[k]);
            const Eigen::Vector2cd r = cp.D_tilde * m - Eigen::Vector2cd(g[0], g[1]);
            double term = r.squaredNorm();
            if (opts.normalize_by_input) {
                const double s = std::norm(g[0]) + std::norm(g[1]);
                if (s > 0.0) term /= s;
            }
            out.value += term;
        }
        ++out.frequencies_used;
    }
    if (out.frequencies_used == 0) throw NumericalError("functional: no usable frequency at this parameter point", 0.0);
    return out;
}

double evaluate_functional(const ParameterPoint& pi,
                           const MeasurementSet& data,
                           const SystemParams& p,
                           double eps,
                           std::vector<std::string>* warnings,
                           const FunctionalOptions& opts) {
    const auto b = evaluate_functional_detailed(pi, data, p, eps, opts);
    if (warnings && !b.skipped.empty()) {
        std::ostringstream os;
        os << "functional coverage: skipped " << b.skipped.size() << " of " << data.grid.omegas.size()
           << " frequencies at (d=" << pi.d << ", x=" << pi.x << ", beta=" << pi.beta << ")";
        warnings->push_back(os.str());
    }
    return b.value;
}

double input_energy(const MeasurementSet& data) {
    double s = 0.0;
    for (const auto& c : data.cases)
        for (const auto& g : c.input) s += std::norm(g[0]) + std::norm(g[1]);
    return s;
}

MeasurementSource fixed_source(MeasurementSet data) {
    return [data = std::move(data)](double) { return data; };
}

MeasurementSource synthetic_source(SystemParams p, DamageProfile truth, FrequencyGrid grid, std::vector<LoadCase> loads) {
    return [=](double beta) {
        SystemParams tuned = p;
        tuned.beta = beta;
        return synthesize_measurements(tuned, truth, grid, loads);
    };
}

MeasurementSource synthetic_source(SystemParams p, DamageProfile truth, GridSpec grid, std::vector<LoadCase> loads) {
    return [=](double beta) {
        SystemParams tuned = p;
        tuned.beta = beta;
        return synthesize_measurements(tuned, truth, make_guarded_grid(tuned, grid), loads);
    };
}

Box damage_box(double eps, double d_min) {
    return Box{{d_min, eps}, {1.0, 1.0 - eps}, 1e-6};
}

namespace {

// Value only when every frequency contributes; a partial sum is not
// comparable with a full one and would pull the search towards it.
double full_coverage_value(const ParameterPoint& pt, const MeasurementSet& data, const SystemParams& p, double eps) {
    const auto b = evaluate_functional_detailed(pt, data, p, eps);
    if (!b.skipped.empty()) return std::numeric_limits<double>::quiet_NaN();
    return b.value;
}

// Objective over (d, x); infeasible or failed points rank worst.
Objective damage_objective(const MeasurementSet& data, const SystemParams& p, double eps, double beta) {
    return [&data, p, eps, beta](std::span<const double> v) {
        try {
            const double e = full_coverage_value({v[0], v[1], beta}, data, p, eps);
            return std::isnan(e) ? std::numeric_limits<double>::infinity() : e;
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };
}

}  // namespace

IdentificationResult identify(const MeasurementSet& data,
                              const SystemParams& p,
                              double eps,
                              double beta_fixed,
                              const IdentifyOptions& opts) {
    if (!(beta_fixed > 0.0)) throw InvalidInput("identify: beta must be > 0");
    if (opts.starts < 1) throw InvalidInput("identify: at least one start is required");
    validate(opts.simplex);
    require_valid(p, DamageProfile{1.0, 0.5, eps});

    const Box box = damage_box(eps, opts.d_min);
    const auto f = damage_objective(data, p, eps, beta_fixed);
    std::mt19937_64 rng(opts.simplex.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::vector<double> step{opts.start_step * (box.upper[0] - box.lower[0]),
                                   opts.start_step * (box.upper[1] - box.lower[1])};

    IdentificationResult best;
    best.E_final = std::numeric_limits<double>::infinity();
    best.beta_used = beta_fixed;
    bool any_converged = false;
    for (int s = 0; s < opts.starts; ++s) {
        // redraw starts whose simplex touches a point where the model fails
        std::vector<double> x0;
        for (int attempt = 0; attempt < 50; ++attempt) {
            x0 = {box.lower[0] + unit(rng) * (box.upper[0] - box.lower[0]),
                  box.lower[1] + unit(rng) * (box.upper[1] - box.lower[1])};
            const auto simplex = coordinate_simplex(x0, step, box);
            if (std::all_of(simplex.begin(), simplex.end(), [&](const auto& v) { return std::isfinite(f(v)); })) break;
        }
        best.trace.push_back({s, "start", {x0[0], x0[1], beta_fixed}, f(x0)});
        const auto r = nelder_mead(f, coordinate_simplex(x0, step, box), box, opts.simplex);
        best.trace.push_back({s, "min", {r.argmin[0], r.argmin[1], beta_fixed}, r.value});
        any_converged = any_converged || r.converged;
        if (r.value < best.E_final) {
            best.E_final = r.value;
            best.d_hat = r.argmin[0];
            best.x_hat = r.argmin[1];
        }
    }
    if (opts.test_undamaged) {
        // Random starts rarely land near d = 1, where an intact beam fits exactly.
        const std::vector<double> intact = box.clamp(std::vector<double>{box.upper[0], 0.5 * (box.lower[1] + box.upper[1])});
        const double e = f(intact);
        best.trace.push_back({opts.starts, "intact", {intact[0], intact[1], beta_fixed}, e});
        if (e < best.E_final) {
            best.E_final = e;
            best.d_hat = intact[0];
            best.x_hat = intact[1];
        }
    }
    best.outer_iterations = opts.starts;
    if (best.d_hat > opts.degenerate_d) {
        best.status = Status::DegenerateX;
    } else {
        best.status = any_converged ? Status::Converged : Status::MaxIters;
    }
    return best;
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (!(hi > lo)) throw InvalidInput("golden_section_max: empty bracket");
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    // The interior search can miss a maximum sitting on the bracket edge.
    double x = 0.5 * (a + b);
    double fx = f(x);
    for (double e : {lo, hi}) {
        const double fe = f(e);
        if (fe > fx) {
            fx = fe;
            x = e;
        }
    }
    return x;
}

IdentificationResult tune_minmax(const MeasurementSource& source,
                                 const SystemParams& p,
                                 double eps,
                                 const ParameterPoint& start,
                                 const TuneOptions& opts) {
    if (!(opts.beta_lo > 0.0) || !(opts.beta_hi > opts.beta_lo)) throw InvalidInput("tune_minmax: bad beta bracket");
    require_valid(p, DamageProfile{start.d, start.x, eps});
    validate(opts.identify.simplex);

    const Box box = damage_box(eps, opts.identify.d_min);
    IdentificationResult res;
    std::vector<double> pi1{start.d, start.x};
    double beta = start.beta;
    {
        const auto data = source(beta);
        res.trace.push_back({0, "start", {pi1[0], pi1[1], beta}, damage_objective(data, p, eps, beta)(pi1)});
    }

    std::vector<double> steps;
    res.status = Status::MaxIters;
    for (int k = 1; k <= opts.max_outer; ++k) {
        // Maximization over the electric tuning at fixed damage estimate.
        auto at = [&](double b) {
            const auto data = source(b);
            return damage_objective(data, p, eps, b)(pi1);
        };
        const double candidate = golden_section_max(at, opts.beta_lo, opts.beta_hi, opts.golden_tol);
        // At an exact fit E vanishes for every beta and the search has nothing to follow.
        const double floor = opts.beta_floor * input_energy(source(beta));
        if (at(candidate) > at(beta) + floor) beta = candidate;
        const auto data = source(beta);
        const auto f = damage_objective(data, p, eps, beta);
        res.trace.push_back({k, "max", {pi1[0], pi1[1], beta}, f(pi1)});

        // Minimization over the damage parameters at fixed tuning.
        if (!std::isfinite(f(pi1))) throw NumericalError("tune_minmax: model fails at the current damage estimate", 0.0);
        // shrink the local simplex until no vertex falls where the model fails
        std::vector<double> step{opts.local_step, opts.local_step};
        auto simplex = coordinate_simplex(pi1, step, box);
        for (int halving = 0; halving < 20; ++halving) {
            if (std::all_of(simplex.begin(), simplex.end(), [&](const auto& v) { return std::isfinite(f(v)); })) break;
            for (auto& s : step) s *= 0.5;
            simplex = coordinate_simplex(pi1, step, box);
        }
        const auto r = nelder_mead(f, simplex, box, opts.identify.simplex);
        const double move = std::hypot(r.argmin[0] - pi1[0], r.argmin[1] - pi1[1]);
        pi1 = r.argmin;
        res.trace.push_back({k, "min", {pi1[0], pi1[1], beta}, r.value});
        res.E_final = r.value;
        res.outer_iterations = k;

        steps.push_back(move);
        if (move < opts.step_tol) {
            res.status = Status::Converged;
            break;
        }
        if (steps.size() >= 4) {
            const auto n = steps.size();
            if (steps[n - 1] >= steps[n - 2] && steps[n - 2] >= steps[n - 3] && steps[n - 3] >= steps[n - 4]) {
                res.status = Status::NotConverged;
                break;
            }
        }
    }
    res.d_hat = pi1[0];
    res.x_hat = pi1[1];
    res.beta_used = beta;
    if (res.status == Status::Converged && res.d_hat > opts.identify.degenerate_d) res.status = Status::DegenerateX;
    return res;
}

int thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PEM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1) throw InvalidInput("linspace needs n >= 1");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
}

SurfaceScan scan_surface(const SystemParams& p,
                         double eps,
                         const MeasurementSource& source,
                         const std::vector<double>& d_axis,
                         const std::vector<double>& x_axis,
                         const std::vector<double>& beta_axis,
                         double sensitivity_level,
                         int threads) {
    if (d_axis.empty() || x_axis.empty() || beta_axis.empty()) throw InvalidInput("scan_surface: empty axis");
    if (!(sensitivity_level > 0.0)) throw InvalidInput("scan_surface: sensitivity_level must be > 0");

    SurfaceScan scan;
    scan.d_axis = d_axis;
    scan.x_axis = x_axis;
    scan.beta_axis = beta_axis;
    scan.sensitivity_level = sensitivity_level;
    const std::size_t nd = d_axis.size(), nx = x_axis.size(), nb = beta_axis.size();
    scan.log10_E.assign(nb * nd * nx, std::numeric_limits<double>::quiet_NaN());
    scan.in_sublevel.assign(nb * nd * nx, 0);
    scan.area.assign(nb, 0.0);

    const int workers = thread_count(threads);
    for (std::size_t b = 0; b < nb; ++b) {
        const auto data = source(beta_axis[b]);
        const std::size_t cells = nd * nx;
        auto work = [&](std::size_t begin, std::size_t end) {
            for (std::size_t c = begin; c < end; ++c) {
                const std::size_t i = c / nx, j = c % nx;
                const ParameterPoint pt{d_axis[i], x_axis[j], beta_axis[b]};
                if (!validate_params(p, DamageProfile{pt.d, pt.x, eps}).empty()) continue;
                try {
                    const double e = full_coverage_value(pt, data, p, eps);
                    scan.log10_E[scan.index(b, i, j)] = std::log10(e);
                    scan.in_sublevel[scan.index(b, i, j)] = e <= sensitivity_level ? 1 : 0;
                } catch (const Error&) {
                }
            }
        };
        const auto n_workers = static_cast<std::size_t>(std::min<int>(workers, static_cast<int>(cells)));
        if (n_workers <= 1) {
            work(0, cells);
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < n_workers; ++w) {
                pool.emplace_back(work, cells * w / n_workers, cells * (w + 1) / n_workers);
            }
        }
        std::size_t valid = 0, inside = 0;
        for (std::size_t c = 0; c < cells; ++c) {
            const auto idx = b * cells + c;
            if (std::isnan(scan.log10_E[idx])) continue;
            ++valid;
            inside += scan.in_sublevel[idx];
        }
        scan.area[b] = valid == 0 ? 0.0 : static_cast<double>(inside) / static_cast<double>(valid);
    }
    return scan;
}

}  // namespace pem
