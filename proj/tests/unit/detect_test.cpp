#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "pemdetect/detect.hpp"
#include "pemdetect/spectral.hpp"

using namespace pem;

namespace {

constexpr double kEps = 0.05;
const SystemParams kBase{};

MeasurementSet data_at(const DamageProfile& truth, std::vector<LoadCase> loads, double beta = 1.0) {
    SystemParams p = kBase;
    p.beta = beta;
    return synthesize_measurements(p, truth, make_guarded_grid(p, GridSpec{}), loads);
}

double E(const MeasurementSet& data, double d, double x, double beta = 1.0) {
    return evaluate_functional({d, x, beta}, data, kBase, kEps);
}

int strict_local_minima(const SurfaceScan& s, std::size_t b) {
    int count = 0;
    const auto nd = s.d_axis.size(), nx = s.x_axis.size();
    for (std::size_t i = 1; i + 1 < nd; ++i)
        for (std::size_t j = 1; j + 1 < nx; ++j) {
            const double v = s.log10_E[s.index(b, i, j)];
            if (std::isnan(v)) continue;
            bool lower = true;
            for (int di = -1; di <= 1 && lower; ++di)
                for (int dj = -1; dj <= 1 && lower; ++dj) {
                    if (!di && !dj) continue;
                    const double w = s.log10_E[s.index(b, i + di, j + dj)];
                    lower = std::isnan(w) || v < w;
                }
            count += lower;
        }
    return count;
}

std::pair<double, double> argmin(const SurfaceScan& s, std::size_t b) {
    double best = INFINITY;
    std::pair<double, double> at;
    for (std::size_t i = 0; i < s.d_axis.size(); ++i)
        for (std::size_t j = 0; j < s.x_axis.size(); ++j) {
            const double v = s.log10_E[s.index(b, i, j)];
            if (v < best) {
                best = v;
                at = {s.d_axis[i], s.x_axis[j]};
            }
        }
    return at;
}

}  // namespace

TEST(Functional, VanishesAtTruth) {
    const auto data = data_at({0.5, 0.8, kEps}, {{0.0, 1.0}, {1.0, 1.0}});
    EXPECT_LT(E(data, 0.5, 0.8), 1e-10 * input_energy(data));
    EXPECT_DOUBLE_EQ(input_energy(data), 3.0 * 40);
}

TEST(Functional, NonNegativeEverywhere) {
    const auto data = data_at({0.5, 0.8, kEps}, {{0.0, 1.0}});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(0.05, 1.0), x(0.06, 0.94);
    for (int i = 0; i < 50; ++i) EXPECT_GE(E(data, d(rng), x(rng)), 0.0);
}

TEST(Functional, MirrorsWithSymmetricLoad) {
    // Mirroring the model and the experiment together leaves the functional unchanged.
    const auto data = data_at({0.5, 0.8, kEps}, {{1.0, 1.0}});
    const auto mirrored = data_at({0.5, 0.2, kEps}, {{1.0, 1.0}});
    for (double d : {0.2, 0.5, 0.9})
        for (double x : {0.1, 0.37, 0.5, 0.8}) {
            const double a = E(data, d, x), b = E(mirrored, d, 1.0 - x);
            // absolute floor for the zero at the truth
            EXPECT_NEAR(a, b, 1e-9 * a + 1e-15 * input_energy(data)) << d << ' ' << x;
        }
}

TEST(Functional, AsymmetricLoadBreaksMirror) {
    const auto data = data_at({0.5, 0.8, kEps}, {{0.0, 1.0}});
    const double a = E(data, 0.5, 0.8), b = E(data, 0.5, 0.2);
    EXPECT_GT(std::abs(a - b), 1e-3 * std::max(a, b));
}

TEST(Functional, ScalesWithData) {
    const auto data = data_at({0.5, 0.8, kEps}, {{0.0, 1.0}});
    auto scaled = data;
    const cplx c{0.3, -1.7};
    for (auto& cs : scaled.cases) {
        for (auto& m : cs.response)
            for (auto& v : m) v *= c;
        for (auto& g : cs.input)
            for (auto& v : g) v *= c;
    }
    double best_a = INFINITY, best_b = INFINITY;
    std::pair<double, double> at_a, at_b;
    for (double d : linspace(0.1, 1.0, 10))
        for (double x : linspace(0.1, 0.9, 9)) {
            const double a = E(data, d, x), b = E(scaled, d, x);
            EXPECT_NEAR(b, std::norm(c) * a, 1e-9 * std::norm(c) * a + 1e-15 * input_energy(scaled));
            if (a < best_a) best_a = a, at_a = {d, x};
            if (b < best_b) best_b = b, at_b = {d, x};
        }
    EXPECT_EQ(at_a, at_b);
}

TEST(Functional, Continuous) {
    const auto data = data_at({0.5, 0.8, kEps}, {{0.0, 1.0}});
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> d(0.2, 0.9), x(0.15, 0.85), dir(-1.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const double d0 = d(rng), x0 = x(rng), ud = dir(rng), ux = dir(rng);
        const double base = E(data, d0, x0);
        double prev = INFINITY;
        for (double h = 1e-3; h > 1e-7; h /= 2) {
            const double diff = std::abs(E(data, d0 + h * ud, x0 + h * ux) - base);
            EXPECT_LT(diff, prev * 0.75 + 1e-12 * base);
            prev = diff;
        }
        EXPECT_LT(prev, 1e-3 * base + 1e-12);
    }
}

TEST(Functional, NormalizedWeighting) {
    const auto data = data_at({0.5, 0.8, kEps}, {{0.0, 2.0}});
    const double plain = E(data, 0.4, 0.6);
    const double weighted = evaluate_functional({0.4, 0.6, 1.0}, data, kBase, kEps, nullptr, {true});
    EXPECT_NEAR(weighted, plain / 4.0, 1e-12 * plain);
}

TEST(Functional, RejectsInvalidPoint) {
    const auto data = data_at({0.5, 0.8, kEps}, {{0.0, 1.0}});
    EXPECT_THROW(E(data, 0.5, 0.02), InvalidInput);
    EXPECT_THROW(E(data, 1.5, 0.5), InvalidInput);
}

TEST(FunctionalConfig, Validation) {
    EXPECT_NO_THROW(validate(FunctionalConfig{{{1.0, 2.0}}, {{0.0, 1.0}}, 1.0}));
    EXPECT_THROW(validate(FunctionalConfig{{{1.0, 2.0}}, {}, 1.0}), InvalidInput);
    EXPECT_THROW(validate(FunctionalConfig{{{2.0, 1.0}}, {{0.0, 1.0}}, 1.0}), InvalidInput);
    EXPECT_THROW(validate(FunctionalConfig{{{1.0, 2.0}}, {{0.0, 1.0}}, 0.0}), InvalidInput);
}

TEST(Identify, RecoversBaselineDamage) {
    const auto data = data_at({0.5, 0.8, kEps}, {{0.0, 1.0}});
    IdentifyOptions o;
    o.simplex.seed = 1;
    const auto r = identify(data, kBase, kEps, 1.0, o);
    EXPECT_EQ(r.status, Status::Converged);
    EXPECT_NEAR(r.d_hat, 0.5, 1e-3);
    EXPECT_NEAR(r.x_hat, 0.8, 1e-3);
    // each simplex run ends no higher than it started
    for (std::size_t i = 0; i + 1 < r.trace.size(); ++i)
        if (r.trace[i].step == "start" && r.trace[i + 1].step == "min") EXPECT_LE(r.trace[i + 1].value, r.trace[i].value);
}

TEST(Identify, SecondProfileFromDenseScan) {
    const DamageProfile truth{0.7, 0.3, kEps};
    const auto data = data_at(truth, {{0.0, 1.0}});
    // the dense scan must place its minimum at the truth before the optimizer is trusted
    const auto scan = scan_surface(kBase, kEps, fixed_source(data), linspace(0.1, 1.0, 46), linspace(0.0, 1.0, 51), {1.0}, 1.0);
    const auto [d, x] = argmin(scan, 0);
    EXPECT_NEAR(d, 0.7, 1e-9);
    EXPECT_NEAR(x, 0.3, 1e-9);
    IdentifyOptions o;
    o.simplex.seed = 1;
    const auto r = identify(data, kBase, kEps, 1.0, o);
    EXPECT_NEAR(r.d_hat, 0.7, 1e-3);
    EXPECT_NEAR(r.x_hat, 0.3, 1e-3);
}

TEST(Identify, UndamagedIsDegenerate) {
    const auto data = data_at({1.0, 0.5, kEps}, {{0.0, 1.0}});
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        IdentifyOptions o;
        o.simplex.seed = seed;
        const auto r = identify(data, kBase, kEps, 1.0, o);
        EXPECT_GT(r.d_hat, 0.99);
        EXPECT_EQ(r.status, Status::DegenerateX);
    }
}

TEST(Identify, DeterministicUnderSeed) {
    const auto data = data_at({0.5, 0.8, kEps}, {{0.0, 1.0}});
    IdentifyOptions o;
    o.simplex.seed = 9;
    o.starts = 2;
    const auto a = identify(data, kBase, kEps, 1.0, o);
    const auto b = identify(data, kBase, kEps, 1.0, o);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        EXPECT_EQ(a.trace[i].value, b.trace[i].value);
        EXPECT_EQ(a.trace[i].point.d, b.trace[i].point.d);
        EXPECT_EQ(a.trace[i].point.x, b.trace[i].point.x);
    }
    EXPECT_EQ(a.d_hat, b.d_hat);
}

TEST(Identify, RejectsBadOptions) {
    const auto data = data_at({0.5, 0.8, kEps}, {{0.0, 1.0}});
    IdentifyOptions o;
    o.starts = 0;
    EXPECT_THROW(identify(data, kBase, kEps, 1.0, o), InvalidInput);
    EXPECT_THROW(identify(data, kBase, kEps, 0.0, {}), InvalidInput);
}

TEST(GoldenSection, FindsInteriorAndEdgeMaxima) {
    EXPECT_NEAR(golden_section_max([](double b) { return -(b - 1.3) * (b - 1.3); }, 0.5, 2.0, 1e-6), 1.3, 1e-5);
    EXPECT_DOUBLE_EQ(golden_section_max([](double b) { return b; }, 0.5, 2.0, 1e-6), 2.0);
    EXPECT_THROW(golden_section_max([](double b) { return b; }, 2.0, 1.0, 1e-6), InvalidInput);
}

TEST(Tune, ConvergesFromNearbyStart) {
    const auto source = synthetic_source(kBase, {0.5, 0.8, kEps}, GridSpec{}, {{0.0, 1.0}, {1.0, 1.0}});
    const auto r = tune_minmax(source, kBase, kEps, {0.45, 0.75, 0.9});
    EXPECT_EQ(r.status, Status::Converged);
    EXPECT_NEAR(r.d_hat, 0.5, 1e-3);
    EXPECT_NEAR(r.x_hat, 0.8, 1e-3);
    EXPECT_GE(r.beta_used, 0.9);
    EXPECT_LE(r.beta_used, 1.1);
    ASSERT_GE(r.trace.size(), 3u);
    EXPECT_EQ(r.trace[0].step, "start");
    EXPECT_EQ(r.trace[1].step, "max");
    EXPECT_EQ(r.trace[2].step, "min");
}

TEST(Tune, FixedPointAtTruth) {
    const auto source = synthetic_source(kBase, {0.5, 0.8, kEps}, GridSpec{}, {{0.0, 1.0}});
    const auto r = tune_minmax(source, kBase, kEps, {0.5, 0.8, 1.0});
    EXPECT_EQ(r.outer_iterations, 1);
    EXPECT_EQ(r.status, Status::Converged);
    EXPECT_NEAR(r.d_hat, 0.5, 1e-6);
    EXPECT_NEAR(r.x_hat, 0.8, 1e-6);
}

TEST(Tune, FarStartReportsTrace) {
    const auto source = synthetic_source(kBase, {0.5, 0.8, kEps}, GridSpec{}, {{0.0, 1.0}, {1.0, 1.0}});
    TuneOptions o;
    o.max_outer = 6;
    const auto r = tune_minmax(source, kBase, kEps, {0.15, 0.2, 0.9}, o);
    EXPECT_EQ(r.trace.size(), 1u + 2u * static_cast<std::size_t>(r.outer_iterations));
    if (r.status != Status::Converged) {
        EXPECT_TRUE(r.status == Status::NotConverged || r.status == Status::MaxIters);
    }
}

TEST(Tune, RejectsBadBracket) {
    const auto source = synthetic_source(kBase, {0.5, 0.8, kEps}, GridSpec{}, {{0.0, 1.0}});
    TuneOptions o;
    o.beta_lo = 2.0;
    o.beta_hi = 1.0;
    EXPECT_THROW(tune_minmax(source, kBase, kEps, {0.5, 0.8, 1.0}, o), InvalidInput);
}

TEST(Scan, GlobalMinimumAndLocalMinima) {
    const auto data = data_at({0.5, 0.8, kEps}, {{0.0, 1.0}});
    const auto s = scan_surface(kBase, kEps, fixed_source(data), linspace(0.1, 1.0, 46), linspace(0.0, 1.0, 51), {1.0}, 1.0);
    ASSERT_EQ(s.log10_E.size(), 46u * 51u);
    const auto [d, x] = argmin(s, 0);
    EXPECT_NEAR(d, 0.5, 1e-9);
    EXPECT_NEAR(x, 0.8, 1e-9);
    EXPECT_GE(strict_local_minima(s, 0), 2);
    EXPECT_GE(s.area[0], 0.0);
    EXPECT_LE(s.area[0], 1.0);
    // x = 0 and x = 1 lie outside the admissible range
    EXPECT_TRUE(std::isnan(s.log10_E[s.index(0, 0, 0)]));
    EXPECT_TRUE(std::isnan(s.log10_E[s.index(0, 0, 50)]));
}

TEST(Scan, ThreadCountDoesNotChangeValues) {
    const auto data = data_at({0.5, 0.8, kEps}, {{0.0, 1.0}});
    const auto a = scan_surface(kBase, kEps, fixed_source(data), linspace(0.2, 1.0, 9), linspace(0.1, 0.9, 9), {1.0}, 1.0, 1);
    const auto b = scan_surface(kBase, kEps, fixed_source(data), linspace(0.2, 1.0, 9), linspace(0.1, 0.9, 9), {1.0}, 1.0, 3);
    EXPECT_EQ(a.log10_E, b.log10_E);
    EXPECT_EQ(a.in_sublevel, b.in_sublevel);
}

TEST(Scan, TightestNearUnitTuning) {
    const auto source = synthetic_source(kBase, {0.5, 0.8, kEps}, GridSpec{}, {{0.0, 1.0}, {1.0, 1.0}});
    const auto s = scan_surface(kBase, kEps, source, linspace(0.1, 1.0, 19), linspace(0.0, 1.0, 21), {0.8, 1.0, 1.2}, 1.0);
    EXPECT_LT(s.area[1], s.area[0]);
    EXPECT_LT(s.area[1], s.area[2]);
}

// Fails: with the measured pair the (1,1) load only excites modes whose end
// slopes are opposite, and the band is dominated by the first mode pair, so
// both functionals share one Hessian up to a factor of about 4. Angles stay
// below 0.5 degrees around the truth, also on a [1, 120] grid.
TEST(Scan, DISABLED_LoadsGiveIndependentGradients) {
    const auto a = data_at({0.5, 0.8, kEps}, {{0.0, 1.0}});
    const auto b = data_at({0.5, 0.8, kEps}, {{1.0, 1.0}});
    const double d0 = 0.53, x0 = 0.78, h = 1e-5;
    auto grad = [&](const MeasurementSet& m) {
        return std::array<double, 2>{(E(m, d0 + h, x0) - E(m, d0 - h, x0)) / (2 * h), (E(m, d0, x0 + h) - E(m, d0, x0 - h)) / (2 * h)};
    };
    const auto ga = grad(a), gb = grad(b);
    const double cosang = (ga[0] * gb[0] + ga[1] * gb[1]) / (std::hypot(ga[0], ga[1]) * std::hypot(gb[0], gb[1]));
    EXPECT_GT(std::acos(std::clamp(cosang, -1.0, 1.0)) * 180.0 / M_PI, 10.0);
}

TEST(Threads, EnvironmentOverride) {
    EXPECT_EQ(thread_count(5), 5);
    setenv("PEM_THREADS", "3", 1);
    EXPECT_EQ(thread_count(), 3);
    setenv("PEM_THREADS", "junk", 1);
    EXPECT_GE(thread_count(), 1);
    unsetenv("PEM_THREADS");
}

TEST(Linspace, Endpoints) {
    const auto v = linspace(0.1, 1.0, 46);
    EXPECT_DOUBLE_EQ(v.front(), 0.1);
    EXPECT_DOUBLE_EQ(v.back(), 1.0);
    EXPECT_NEAR(v[20], 0.5, 1e-15);
    EXPECT_THROW(linspace(0.0, 1.0, 0), InvalidInput);
}
