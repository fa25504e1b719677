#include "pemcli/measurement_io.hpp"

#include <fstream>
#include <random>

namespace pem::cli {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "pem-measurements/1";

json cj(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

cplx cplx_from(const json& j) { return {j.at("re").get<double>(), j.at("im").get<double>()}; }

}  // namespace

json measurements_to_json(const MeasurementSet& data, const SystemParams& p) {
    json doc;
    doc["format"] = kFormat;
    doc["system"] = {{"alpha0", p.alpha0}, {"beta", p.beta}, {"gamma", p.gamma}, {"delta", p.delta}};
    doc["omegas"] = data.grid.omegas;
    doc["cases"] = json::array();
    for (const auto& c : data.cases) {
        json jc;
        jc["load"] = {{"mu0", cj(c.load.mu0)}, {"mu1", cj(c.load.mu1)}};
        jc["samples"] = json::array();
        for (std::size_t k = 0; k < data.grid.omegas.size(); ++k) {
            jc["samples"].push_back({{"omega", data.grid.omegas[k]},
                                     {"m", {cj(c.response[k][0]), cj(c.response[k][1])}},
                                     {"g", {cj(c.input[k][0]), cj(c.input[k][1])}}});
        }
        doc["cases"].push_back(std::move(jc));
    }
    return doc;
}

MeasurementSet measurements_from_json(const json& doc, SystemParams* measured_with) {
    try {
        if (doc.value("format", std::string{}) != kFormat) throw InvalidInput("measurement file: unknown format");
        MeasurementSet data;
        data.grid.omegas = doc.at("omegas").get<std::vector<double>>();
        if (auto errs = validate_grid(data.grid); !errs.empty()) throw InvalidInput("measurement file: " + errs.front());
        const auto K = data.grid.omegas.size();
        for (const auto& jc : doc.at("cases")) {
            MeasuredCase c;
            c.load = {cplx_from(jc.at("load").at("mu0")), cplx_from(jc.at("load").at("mu1"))};
            const auto& samples = jc.at("samples");
            if (samples.size() != K) throw InvalidInput("measurement file: sample count differs from the grid");
            for (std::size_t k = 0; k < K; ++k) {
                const auto& s = samples[k];
                if (s.at("omega").get<double>() != data.grid.omegas[k]) throw InvalidInput("measurement file: sample omega mismatch");
                const auto& m = s.at("m");
                const auto& g = s.at("g");
                if (m.size() != 2 || g.size() != 2) throw InvalidInput("measurement file: m and g need 2 components");
                c.response.push_back({cplx_from(m[0]), cplx_from(m[1])});
                c.input.push_back({cplx_from(g[0]), cplx_from(g[1])});
            }
            data.cases.push_back(std::move(c));
        }
        if (data.cases.empty()) throw InvalidInput("measurement file: no load cases");
        if (measured_with) {
            const auto& s = doc.at("system");
            *measured_with = {s.at("alpha0").get<double>(), s.at("beta").get<double>(), s.at("gamma").get<double>(),
                              s.at("delta").get<double>()};
        }
        return data;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("measurement file: ") + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + path.string());
    out << text;
    if (!out) throw InvalidInput("failed writing " + path.string());
}

void write_measurements(const std::filesystem::path& path, const MeasurementSet& data, const SystemParams& p) {
    write_text(path, measurements_to_json(data, p).dump(1) + "\n");
}

MeasurementSet read_measurements(const std::filesystem::path& path, SystemParams* measured_with) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open measurement file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidInput("measurement file " + path.string() + ": " + e.what());
    }
    return measurements_from_json(doc, measured_with);
}

void add_noise(MeasurementSet& data, double relative, std::uint64_t seed) {
    if (!(relative >= 0.0)) throw InvalidInput("noise amplitude must be >= 0");
    if (relative == 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& c : data.cases)
        for (auto& sample : c.response)
            for (auto& m : sample) {
                const double re = n(rng), im = n(rng);
                m += relative * std::abs(m) * cplx(re, im) / std::sqrt(2.0);
            }
}

}  // namespace pem::cli
