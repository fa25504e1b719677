#include "pemdetect/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pemdetect/model.hpp"

namespace pem {

void validate(const SimplexOptions& o) {
    std::string bad;
    if (!(o.reflection > 0.0)) bad += " reflection must be > 0;";
    if (!(o.expansion > 1.0)) bad += " expansion must be > 1;";
    if (!(o.contraction > 0.0 && o.contraction < 1.0)) bad += " contraction must lie in (0, 1);";
    if (!(o.shrink > 0.0 && o.shrink < 1.0)) bad += " shrink must lie in (0, 1);";
    if (!(o.diameter_tol >= 0.0) || !(o.value_tol >= 0.0)) bad += " tolerances must be >= 0;";
    if (o.max_iterations < 1) bad += " max_iterations must be >= 1;";
    if (!bad.empty()) throw InvalidInput("invalid simplex options:" + bad);
}

std::vector<double> Box::clamp(std::span<const double> v) const {
    std::vector<double> out(v.begin(), v.end());
    for (std::size_t i = 0; i < out.size() && i < lower.size(); ++i) {
        if (out[i] < lower[i]) out[i] = std::min(lower[i] + inset, upper[i]);
        if (out[i] > upper[i]) out[i] = std::max(upper[i] - inset, lower[i]);
    }
    return out;
}

std::vector<std::vector<double>> coordinate_simplex(std::span<const double> start,
                                                    std::span<const double> step,
                                                    const Box& box) {
    std::vector<std::vector<double>> simplex;
    simplex.push_back(box.clamp(start));
    for (std::size_t i = 0; i < start.size(); ++i) {
        auto v = simplex.front();
        double s = step[i];
        if (i < box.upper.size() && v[i] + s > box.upper[i]) s = -s;
        v[i] += s;
        simplex.push_back(box.clamp(v));
    }
    return simplex;
}

namespace {

double safe(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

}  // namespace

SimplexResult nelder_mead(const Objective& f,
                          std::vector<std::vector<double>> simplex,
                          const Box& box,
                          const SimplexOptions& opts) {
    validate(opts);
    const std::size_t n = simplex.empty() ? 0 : simplex.front().size();
    if (n == 0 || simplex.size() != n + 1) throw InvalidInput("nelder_mead needs n + 1 vertices of dimension n >= 1");
    if (box.lower.size() != n || box.upper.size() != n) throw InvalidInput("nelder_mead box dimension mismatch");

    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        simplex[i] = box.clamp(simplex[i]);
        values[i] = safe(f(simplex[i]));
        if (!std::isfinite(values[i])) throw InvalidInput("nelder_mead: objective not finite at a start vertex");
    }

    auto eval = [&](const std::vector<double>& v) { return safe(f(v)); };
    auto affine = [&](const std::vector<double>& base, const std::vector<double>& toward, double t) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = base[i] + t * (toward[i] - base[i]);
        return box.clamp(out);
    };

    SimplexResult res;
    std::vector<std::size_t> order(n + 1);
    for (int it = 0;; ++it) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t v = 0; v <= n; ++v) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) d2 += (simplex[v][i] - simplex[best][i]) * (simplex[v][i] - simplex[best][i]);
            diameter = std::max(diameter, std::sqrt(d2));
        }
        const bool small = diameter < opts.diameter_tol;
        const bool flat = opts.value_tol > 0.0 && values[worst] - values[best] <= opts.value_tol;
        if (small || flat || it >= opts.max_iterations) {
            res.argmin = simplex[best];
            res.value = values[best];
            res.iterations = it;
            res.converged = small || flat;
            return res;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t v = 0; v <= n; ++v) {
            if (v == worst) continue;
            for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v][i] / static_cast<double>(n);
        }

        const auto xr = affine(centroid, simplex[worst], -opts.reflection);
        const double fr = eval(xr);
        if (fr < values[best]) {
            const auto xe = affine(centroid, simplex[worst], -opts.reflection * opts.expansion);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
        } else if (fr < values[second]) {
            simplex[worst] = xr;
            values[worst] = fr;
        } else {
            bool accepted = false;
            if (fr < values[worst]) {
                const auto xc = affine(centroid, xr, opts.contraction);
                const double fc = eval(xc);
                if (fc <= fr) {
                    simplex[worst] = xc;
                    values[worst] = fc;
                    accepted = true;
                }
            } else {
                const auto xc = affine(centroid, simplex[worst], opts.contraction);
                const double fc = eval(xc);
                if (fc < values[worst]) {
                    simplex[worst] = xc;
                    values[worst] = fc;
                    accepted = true;
                }
            }
            if (!accepted) {
                for (std::size_t v = 0; v <= n; ++v) {
                    if (v == best) continue;
                    simplex[v] = affine(simplex[best], simplex[v], opts.shrink);
                    values[v] = eval(simplex[v]);
                }
            }
        }
        res.best_history.push_back(*std::min_element(values.begin(), values.end()));
    }
}

}  // namespace pem
