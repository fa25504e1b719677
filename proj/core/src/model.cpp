#include "pemdetect/model.hpp"

#include <cmath>
#include <sstream>

namespace pem {

std::string to_string(Status s) {
    switch (s) {
        case Status::Converged: return "converged";
        case Status::MaxIters: return "max-iters";
        case Status::DegenerateX: return "degenerate-x";
        case Status::NotConverged: return "not-converged";
    }
    return "unknown";
}

namespace {

std::string fmt(const char* field, const char* bound, double value) {
    std::ostringstream os;
    os.precision(17);
    os << field << " must " << bound << " (got " << value << ")";
    return os.str();
}

}  // namespace

std::vector<std::string> validate_params(const SystemParams& p, const DamageProfile& dp) {
    std::vector<std::string> errors;
    auto finite = [&](const char* name, double v) {
        if (!std::isfinite(v)) errors.push_back(fmt(name, "be finite", v));
        return std::isfinite(v);
    };
    if (finite("alpha0", p.alpha0) && !(p.alpha0 > 0.0)) errors.push_back(fmt("alpha0", "be > 0", p.alpha0));
    if (finite("beta", p.beta) && !(p.beta > 0.0)) errors.push_back(fmt("beta", "be > 0", p.beta));
    if (finite("gamma", p.gamma) && !(p.gamma >= 0.0)) errors.push_back(fmt("gamma", "be >= 0", p.gamma));
    if (finite("delta", p.delta) && !(p.delta >= 0.0)) errors.push_back(fmt("delta", "be >= 0", p.delta));

    if (finite("d", dp.d)) {
        if (!(dp.d > 0.0)) errors.push_back(fmt("d", "be > 0", dp.d));
        if (!(dp.d <= 1.0)) errors.push_back(fmt("d", "be <= 1", dp.d));
    }
    const bool eps_ok = finite("eps", dp.eps);
    if (eps_ok) {
        if (!(dp.eps > 0.0)) errors.push_back(fmt("eps", "be > 0", dp.eps));
        if (!(dp.eps <= 0.25)) errors.push_back(fmt("eps", "be <= 0.25", dp.eps));
    }
    if (finite("x", dp.x) && eps_ok) {
        if (!(dp.x > dp.eps)) errors.push_back(fmt("x", "exceed eps", dp.x));
        if (!(dp.x < 1.0 - dp.eps)) errors.push_back(fmt("x", "be below 1 - eps", dp.x));
    }
    return errors;
}

std::vector<std::string> validate_grid(const FrequencyGrid& grid) {
    std::vector<std::string> errors;
    if (grid.omegas.empty()) {
        errors.emplace_back("frequency grid must contain at least one frequency");
        return errors;
    }
    for (std::size_t k = 0; k < grid.omegas.size(); ++k) {
        const double w = grid.omegas[k];
        if (!std::isfinite(w) || !(w > 0.0)) errors.push_back(fmt("omega", "be finite and > 0", w));
        if (k > 0 && !(w > grid.omegas[k - 1])) errors.push_back(fmt("omega", "be strictly increasing", w));
    }
    return errors;
}

void require_valid(const SystemParams& p, const DamageProfile& dp) {
    const auto errors = validate_params(p, dp);
    if (errors.empty()) return;
    std::string msg = "invalid parameters:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw InvalidInput(msg);
}

double stiffness_at(double s, const SystemParams& p, const DamageProfile& dp) {
    if (!(s >= 0.0 && s <= 1.0)) throw InvalidInput(fmt("s", "lie in [0, 1]", s));
    if (s > dp.x - dp.eps && s < dp.x + dp.eps) return p.alpha0 * dp.d;
    return p.alpha0;
}

}  // namespace pem
