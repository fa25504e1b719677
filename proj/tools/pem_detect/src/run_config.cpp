#include "pemcli/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

namespace pem::cli {

using nlohmann::json;

namespace {

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw InvalidInput(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items())
        if (!ok.count(k)) throw InvalidInput("unknown key '" + k + "' in " + where);
}

double num(const json& obj, const char* key, double fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw InvalidInput(where + "." + key + " must be a number");
    return v.get<double>();
}

int integer(const json& obj, const char* key, int fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw InvalidInput(where + "." + key + " must be an integer");
    return v.get<int>();
}

cplx complex_value(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    if (v.is_object()) {
        only_keys(v, where, {"re", "im"});
        return {num(v, "re", 0.0, where), num(v, "im", 0.0, where)};
    }
    throw InvalidInput(where + " must be a number, [re, im] or {re, im}");
}

AxisSpec axis(const json& obj, const char* key, AxisSpec fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& a = obj.at(key);
    const std::string w = where + "." + key;
    only_keys(a, w, {"lo", "hi", "count"});
    AxisSpec s{num(a, "lo", fallback.lo, w), num(a, "hi", fallback.hi, w), integer(a, "count", fallback.count, w)};
    if (!(s.hi >= s.lo) || s.count < 1) throw InvalidInput(w + " needs lo <= hi and count >= 1");
    return s;
}

GridSpec grid_spec(const json& g, GridSpec s, const std::string& w) {
    only_keys(g, w, {"lo", "hi", "count", "guard"});
    s.lo = num(g, "lo", s.lo, w);
    s.hi = num(g, "hi", s.hi, w);
    s.count = integer(g, "count", s.count, w);
    s.guard = num(g, "guard", s.guard, w);
    if (!(s.lo > 0.0) || !(s.hi > s.lo) || s.count < 1 || !(s.guard >= 0.0 && s.guard < 0.5))
        throw InvalidInput(w + " needs 0 < lo < hi, count >= 1, 0 <= guard < 0.5");
    return s;
}

json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json canonicalize(const RunConfig& c) {
    json j;
    j["system"] = {{"alpha0", c.system.alpha0}, {"beta", c.system.beta}, {"gamma", c.system.gamma}, {"delta", c.system.delta}};
    j["damage"] = {{"eps", c.eps}};
    if (c.truth) {
        j["damage"]["d"] = c.truth->d;
        j["damage"]["x"] = c.truth->x;
    }
    j["grid"] = {{"lo", c.grid.lo}, {"hi", c.grid.hi}, {"count", c.grid.count}, {"guard", c.grid.guard}};
    j["loads"] = json::array();
    for (const auto& l : c.loads) j["loads"].push_back({{"mu0", complex_json(l.mu0)}, {"mu1", complex_json(l.mu1)}});
    j["loads_mode"] = c.loads_mode == LoadsMode::Summed ? "summed" : "separate";
    const auto& s = c.identify.simplex;
    j["optimizer"] = {{"beta", c.beta_fixed},
                      {"starts", c.identify.starts},
                      {"d_min", c.identify.d_min},
                      {"reflection", s.reflection},
                      {"expansion", s.expansion},
                      {"contraction", s.contraction},
                      {"shrink", s.shrink},
                      {"diameter_tol", s.diameter_tol},
                      {"value_tol", s.value_tol},
                      {"max_iterations", s.max_iterations}};
    const auto& t = c.tune;
    j["tune"] = {{"start", {t.start.d, t.start.x, t.start.beta}},
                 {"beta_lo", t.options.beta_lo},
                 {"beta_hi", t.options.beta_hi},
                 {"golden_tol", t.options.golden_tol},
                 {"step_tol", t.options.step_tol},
                 {"max_outer", t.options.max_outer}};
    auto ax = [](const AxisSpec& a) { return json{{"lo", a.lo}, {"hi", a.hi}, {"count", a.count}}; };
    j["scan"] = {{"d", ax(c.scan.d)}, {"x", ax(c.scan.x)}, {"beta", c.scan.betas}, {"level", c.scan.level}};
    const auto& v = c.verify;
    j["verify"] = {{"n_elems", v.n_elems},
                   {"coarse_elems", v.coarse_elems},
                   {"grid", {{"lo", v.frf_grid.lo}, {"hi", v.frf_grid.hi}, {"count", v.frf_grid.count}, {"guard", v.frf_grid.guard}}}};
    j["noise"] = c.noise;
    if (c.seed) j["seed"] = *c.seed;
    return j;
}

}  // namespace

RunConfig parse_config(const json& doc, const std::filesystem::path& base) {
    try {
        only_keys(doc, "config",
                  {"system", "damage", "grid", "loads", "loads_mode", "optimizer", "tune", "scan", "verify", "noise", "seed",
                   "measurements", "output"});
        RunConfig c;

        if (doc.contains("system")) {
            const auto& s = doc["system"];
            only_keys(s, "system", {"alpha0", "beta", "gamma", "delta"});
            c.system = {num(s, "alpha0", 1.0, "system"), num(s, "beta", 1.0, "system"), num(s, "gamma", 0.05, "system"),
                        num(s, "delta", 0.0, "system")};
        }
        if (doc.contains("damage")) {
            const auto& d = doc["damage"];
            only_keys(d, "damage", {"d", "x", "eps"});
            c.eps = num(d, "eps", 0.05, "damage");
            if (d.contains("d") != d.contains("x")) throw InvalidInput("damage needs both d and x, or neither");
            if (d.contains("d")) c.truth = DamageProfile{num(d, "d", 1.0, "damage"), num(d, "x", 0.5, "damage"), c.eps};
        }
        if (auto errs = validate_params(c.system, c.truth.value_or(DamageProfile{1.0, 0.5, c.eps})); !errs.empty()) {
            std::string all;
            for (const auto& e : errs) all += "; " + e;
            throw InvalidInput("invalid parameters" + all);
        }

        if (doc.contains("grid")) c.grid = grid_spec(doc["grid"], c.grid, "grid");

        if (doc.contains("loads")) {
            const auto& ls = doc["loads"];
            if (!ls.is_array() || ls.empty()) throw InvalidInput("loads must be a non-empty array");
            c.loads.clear();
            for (std::size_t i = 0; i < ls.size(); ++i) {
                const std::string w = "loads[" + std::to_string(i) + "]";
                only_keys(ls[i], w, {"mu0", "mu1"});
                LoadCase l{ls[i].contains("mu0") ? complex_value(ls[i]["mu0"], w + ".mu0") : cplx{},
                           ls[i].contains("mu1") ? complex_value(ls[i]["mu1"], w + ".mu1") : cplx{}};
                if (l.mu0 == cplx{} && l.mu1 == cplx{}) throw InvalidInput(w + " is identically zero");
                c.loads.push_back(l);
            }
        }
        if (doc.contains("loads_mode")) {
            const auto m = doc["loads_mode"].get<std::string>();
            if (m == "summed") c.loads_mode = LoadsMode::Summed;
            else if (m == "separate") c.loads_mode = LoadsMode::Separate;
            else throw InvalidInput("loads_mode must be 'summed' or 'separate'");
        }

        c.beta_fixed = c.system.beta;
        if (doc.contains("optimizer")) {
            const auto& o = doc["optimizer"];
            only_keys(o, "optimizer",
                      {"beta", "starts", "d_min", "reflection", "expansion", "contraction", "shrink", "diameter_tol", "value_tol",
                       "max_iterations"});
            auto& s = c.identify.simplex;
            c.beta_fixed = num(o, "beta", c.beta_fixed, "optimizer");
            c.identify.starts = integer(o, "starts", c.identify.starts, "optimizer");
            c.identify.d_min = num(o, "d_min", c.identify.d_min, "optimizer");
            s.reflection = num(o, "reflection", s.reflection, "optimizer");
            s.expansion = num(o, "expansion", s.expansion, "optimizer");
            s.contraction = num(o, "contraction", s.contraction, "optimizer");
            s.shrink = num(o, "shrink", s.shrink, "optimizer");
            s.diameter_tol = num(o, "diameter_tol", s.diameter_tol, "optimizer");
            s.value_tol = num(o, "value_tol", s.value_tol, "optimizer");
            s.max_iterations = integer(o, "max_iterations", s.max_iterations, "optimizer");
        }
        validate(c.identify.simplex);
        if (!(c.beta_fixed > 0.0)) throw InvalidInput("optimizer.beta must be > 0");
        if (c.identify.starts < 1) throw InvalidInput("optimizer.starts must be >= 1");
        if (!(c.identify.d_min > 0.0 && c.identify.d_min < 1.0)) throw InvalidInput("optimizer.d_min must lie in (0, 1)");
        c.tune.options.identify = c.identify;

        if (doc.contains("tune")) {
            const auto& t = doc["tune"];
            only_keys(t, "tune", {"start", "beta_lo", "beta_hi", "golden_tol", "step_tol", "max_outer"});
            auto& o = c.tune.options;
            if (t.contains("start")) {
                const auto& s = t["start"];
                if (!s.is_array() || s.size() != 3) throw InvalidInput("tune.start must be [d, x, beta]");
                c.tune.start = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
            }
            o.beta_lo = num(t, "beta_lo", o.beta_lo, "tune");
            o.beta_hi = num(t, "beta_hi", o.beta_hi, "tune");
            o.golden_tol = num(t, "golden_tol", o.golden_tol, "tune");
            o.step_tol = num(t, "step_tol", o.step_tol, "tune");
            o.max_outer = integer(t, "max_outer", o.max_outer, "tune");
        }
        if (!(c.tune.options.beta_lo > 0.0) || !(c.tune.options.beta_hi > c.tune.options.beta_lo))
            throw InvalidInput("tune needs 0 < beta_lo < beta_hi");
        if (c.tune.options.max_outer < 1) throw InvalidInput("tune.max_outer must be >= 1");

        if (doc.contains("scan")) {
            const auto& s = doc["scan"];
            only_keys(s, "scan", {"d", "x", "beta", "level"});
            c.scan.d = axis(s, "d", c.scan.d, "scan");
            c.scan.x = axis(s, "x", c.scan.x, "scan");
            if (s.contains("beta")) {
                const auto& b = s["beta"];
                c.scan.betas = b.is_array() ? b.get<std::vector<double>>() : std::vector<double>{b.get<double>()};
            }
            c.scan.level = num(s, "level", c.scan.level, "scan");
        }
        if (c.scan.betas.empty() || std::any_of(c.scan.betas.begin(), c.scan.betas.end(), [](double b) { return !(b > 0.0); }))
            throw InvalidInput("scan.beta must be a non-empty list of positive values");
        if (!(c.scan.level > 0.0)) throw InvalidInput("scan.level must be > 0");

        if (doc.contains("verify")) {
            const auto& v = doc["verify"];
            only_keys(v, "verify", {"n_elems", "coarse_elems", "grid"});
            c.verify.n_elems = integer(v, "n_elems", c.verify.n_elems, "verify");
            c.verify.coarse_elems = integer(v, "coarse_elems", c.verify.coarse_elems, "verify");
            if (v.contains("grid")) c.verify.frf_grid = grid_spec(v["grid"], c.verify.frf_grid, "verify.grid");
        }
        if (c.verify.coarse_elems < 12 || c.verify.n_elems < 2 * c.verify.coarse_elems)
            throw InvalidInput("verify needs coarse_elems >= 12 and n_elems >= 2 * coarse_elems");

        if (doc.contains("noise")) {
            c.noise = doc["noise"].get<double>();
            if (!(c.noise >= 0.0)) throw InvalidInput("noise must be >= 0");
        }
        if (doc.contains("seed")) {
            if (!doc["seed"].is_number_unsigned()) throw InvalidInput("seed must be a non-negative integer");
            c.seed = doc["seed"].get<std::uint64_t>();
        }
        if (doc.contains("measurements")) c.measurements = base / doc["measurements"].get<std::string>();
        if (doc.contains("output")) {
            const auto& o = doc["output"];
            only_keys(o, "output", {"dir"});
            if (o.contains("dir")) c.out_dir = base / o["dir"].get<std::string>();
        } else {
            c.out_dir = base / c.out_dir;
        }

        c.canonical = canonicalize(c);
        if (doc.contains("measurements")) c.canonical["measurements"] = doc["measurements"];
        return c;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("config: ") + e.what());
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidInput("config " + path.string() + ": " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

std::string config_digest(const json& doc) {
    const std::string text = doc.dump();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr)) throw Error("sha256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return "sha256:" + os.str();
}

}  // namespace pem::cli
