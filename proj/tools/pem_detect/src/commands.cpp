#include "pemcli/commands.hpp"

#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "pemcli/measurement_io.hpp"
#include "pemcli/verify.hpp"

namespace pem::cli {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

class Timer {
public:
    explicit Timer(json& sink) : sink_(sink) {}
    template <class F>
    auto operator()(const char* phase, F&& f) {
        const auto t0 = Clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            sink_[phase] = seconds(t0);
        } else {
            auto r = f();
            sink_[phase] = seconds(t0);
            return r;
        }
    }

private:
    static double seconds(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }
    json& sink_;
};

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t need_seed(const RunConfig& cfg, const std::string& why) {
    if (!cfg.seed) throw InvalidInput("a seed is required for " + why + " (config 'seed' or --seed)");
    return *cfg.seed;
}

MeasurementSet synthesize_at(const RunConfig& cfg, double beta, std::vector<std::string>& warnings) {
    if (!cfg.truth) throw InvalidInput("synthesis needs a true damage profile (damage.d and damage.x)");
    SystemParams p = cfg.system;
    p.beta = beta;
    auto data = synthesize_measurements(p, *cfg.truth, make_guarded_grid(p, cfg.grid), cfg.loads, &warnings);
    if (cfg.noise > 0.0) {
        const auto seed = need_seed(cfg, "measurement noise");
        add_noise(data, cfg.noise, splitmix(seed ^ std::bit_cast<std::uint64_t>(beta)));
    }
    return data;
}

MeasurementSet only_case(const MeasurementSet& data, std::size_t c) {
    MeasurementSet one{data.grid, {data.cases.at(c)}};
    return one;
}

json ident_payload(const RunConfig& cfg, const MeasurementSet& data, bool tune, const MeasurementSource& source) {
    IdentifyOptions opts = cfg.identify;
    TuneOptions topts = cfg.tune.options;
    if (!tune) opts.simplex.seed = need_seed(cfg, "random starts");
    auto one = [&](const MeasurementSet& d, const MeasurementSource& s) {
        return tune ? tune_minmax(s, cfg.system, cfg.eps, cfg.tune.start, topts)
                    : identify(d, cfg.system, cfg.eps, cfg.beta_fixed, opts);
    };
    json results = json::array();
    if (cfg.loads_mode == LoadsMode::Summed) {
        auto j = to_json(one(data, source));
        j["loads"] = "summed";
        results.push_back(j);
    } else {
        for (std::size_t c = 0; c < data.cases.size(); ++c) {
            const MeasurementSource sc = [source, c](double b) { return only_case(source(b), c); };
            auto j = to_json(one(only_case(data, c), sc));
            j["loads"] = c;
            results.push_back(j);
        }
    }
    return json{{"method", tune ? "tune_minmax" : "identify"}, {"results", results}};
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
    return std::string(buf, r.ptr);
}

json scan_payload(const RunConfig& cfg, const MeasurementSource& source, const std::filesystem::path& dir) {
    const auto d_axis = linspace(cfg.scan.d.lo, cfg.scan.d.hi, cfg.scan.d.count);
    const auto x_axis = linspace(cfg.scan.x.lo, cfg.scan.x.hi, cfg.scan.x.count);

    std::vector<std::pair<std::string, MeasurementSource>> runs;
    if (cfg.loads_mode == LoadsMode::Summed) {
        runs.emplace_back("summed", source);
    } else {
        for (std::size_t c = 0; c < cfg.loads.size(); ++c)
            runs.emplace_back(std::to_string(c), [source, c](double b) { return only_case(source(b), c); });
    }

    std::ostringstream area;
    area << "load,beta,area,level\n";
    json summary = json::array();
    for (const auto& [label, src] : runs) {
        const auto scan = scan_surface(cfg.system, cfg.eps, src, d_axis, x_axis, cfg.scan.betas, cfg.scan.level);
        std::ostringstream csv;
        csv << "d,x,beta,log10_E,in_sublevel\n";
        for (std::size_t b = 0; b < scan.beta_axis.size(); ++b) {
            double best = std::numeric_limits<double>::infinity();
            double bd = 0.0, bx = 0.0;
            for (std::size_t i = 0; i < d_axis.size(); ++i)
                for (std::size_t j = 0; j < x_axis.size(); ++j) {
                    const auto idx = scan.index(b, i, j);
                    const double v = scan.log10_E[idx];
                    csv << fmt(d_axis[i]) << ',' << fmt(x_axis[j]) << ',' << fmt(scan.beta_axis[b]) << ',' << fmt(v) << ','
                        << int(scan.in_sublevel[idx]) << '\n';
                    if (!std::isnan(v) && v < best) {
                        best = v;
                        bd = d_axis[i];
                        bx = x_axis[j];
                    }
                }
            area << label << ',' << fmt(scan.beta_axis[b]) << ',' << fmt(scan.area[b]) << ',' << fmt(scan.sensitivity_level) << '\n';
            summary.push_back({{"load", label}, {"beta", scan.beta_axis[b]}, {"area", scan.area[b]}, {"argmin", {bd, bx}}, {"log10_E_min", best}});
        }
        write_text(dir / (runs.size() == 1 ? std::string("scan.csv") : "scan_load" + label + ".csv"), csv.str());
    }
    write_text(dir / "scan_area.csv", area.str());
    return json{{"slices", summary}, {"d_count", d_axis.size()}, {"x_count", x_axis.size()}};
}

}  // namespace

json to_json(const IdentificationResult& r) {
    json trace = json::array();
    for (const auto& t : r.trace)
        trace.push_back({{"iteration", t.iteration}, {"step", t.step}, {"d", t.point.d}, {"x", t.point.x}, {"beta", t.point.beta}, {"E", t.value}});
    return {{"d_hat", r.d_hat},       {"x_hat", r.x_hat},   {"beta_used", r.beta_used},
            {"E_final", r.E_final},   {"status", to_string(r.status)},
            {"outer_iterations", r.outer_iterations}, {"trace", trace}};
}

MeasurementSource experiment(const RunConfig& cfg, std::vector<std::string>& warnings) {
    if (!cfg.measurements.empty()) {
        auto data = read_measurements(cfg.measurements);
        warnings.push_back("measurement file holds one tuning; every beta is compared against it");
        return fixed_source(std::move(data));
    }
    if (!cfg.truth) throw InvalidInput("config needs a measurement file or a true damage profile");
    if (cfg.noise > 0.0) need_seed(cfg, "measurement noise");
    return [cfg](double beta) {
        std::vector<std::string> ignored;
        return synthesize_at(cfg, beta, ignored);
    };
}

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
    json timing = json::object();
    Timer timed(timing);
    std::vector<std::string> warnings;
    try {
        RunConfig cfg = timed("load_config", [&] { return load_config(inv.config); });
        if (inv.seed) {
            cfg.seed = *inv.seed;
            cfg.canonical["seed"] = *inv.seed;
        }
        if (inv.out) cfg.out_dir = *inv.out;
        const auto& dir = cfg.out_dir;

        json result;
        int code = kOk;
        const auto& cmd = inv.command;
        if (cmd == "synthesize") {
            const auto data = timed("synthesize", [&] { return synthesize_at(cfg, cfg.system.beta, warnings); });
            SystemParams p = cfg.system;
            timed("write", [&] { write_measurements(dir / "measurements.json", data, p); });
            result = {{"file", (dir / "measurements.json").generic_string()}, {"frequencies", data.grid.omegas.size()}, {"cases", data.cases.size()}};
        } else if (cmd == "identify" || cmd == "tune") {
            const bool tune = cmd == "tune" || inv.tune;
            MeasurementSet data;
            MeasurementSource source;
            if (!cfg.measurements.empty()) {
                data = timed("read", [&] { return read_measurements(cfg.measurements); });
                source = fixed_source(data);
                if (tune) warnings.push_back("measurement file holds one tuning; every beta is compared against it");
            } else {
                data = timed("synthesize", [&] { return synthesize_at(cfg, cfg.system.beta, warnings); });
                source = experiment(cfg, warnings);
            }
            result = timed(tune ? "tune" : "identify", [&] { return ident_payload(cfg, data, tune, source); });
            write_text(dir / (cmd + "_result.json"), result.dump(1) + "\n");
        } else if (cmd == "scan") {
            const auto source = experiment(cfg, warnings);
            result = timed("scan", [&] { return scan_payload(cfg, source, dir); });
        } else if (cmd == "verify") {
            const auto checks = timed("verify", [&] { return run_verification(cfg); });
            json list = json::array();
            for (const auto& c : checks) {
                list.push_back({{"name", c.name}, {"passed", c.passed}, {"values", c.values}});
                out << (c.passed ? "PASS " : "FAIL ") << c.name << ' ' << c.values.dump() << '\n';
                if (!c.passed) code = kVerificationFailure;
            }
            result = {{"checks", list}, {"passed", code == kOk}};
        } else {
            throw InvalidInput("unknown command '" + cmd + "'");
        }

        json report{{"command", cmd},
                    {"config_digest", config_digest(cfg.canonical)},
                    {"config", cfg.canonical},
                    {"timing_s", timing},
                    {"result", result},
                    {"warnings", warnings},
                    {"exit_code", code}};
        write_text(dir / (cmd + "_report.json"), report.dump(1) + "\n");
        for (const auto& w : warnings) err << "warning: " << w << '\n';
        out << cmd << ": wrote " << (dir / (cmd + "_report.json")).generic_string() << '\n';
        return code;
    } catch (const InvalidInput& e) {
        err << "invalid input: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << " (omega=" << e.omega() << ")\n";
        return kNumericalFailure;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "i/o failure: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    }
}

}  // namespace pem::cli
