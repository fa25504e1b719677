#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "pemdetect/model.hpp"

using namespace pem;

namespace {

bool mentions(const std::vector<std::string>& errs, const std::string& word) {
    for (const auto& e : errs)
        if (e.find(word) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST(ValidateParams, AcceptsBaseline) {
    EXPECT_TRUE(validate_params({1.0, 1.0, 0.05, 0.0}, {0.5, 0.8, 0.05}).empty());
}

TEST(ValidateParams, RejectsCentreInsideLeftMargin) {
    const auto errs = validate_params({}, {0.5, 0.03, 0.05});
    ASSERT_EQ(errs.size(), 1u);
    EXPECT_TRUE(mentions(errs, "x"));
}

TEST(ValidateParams, RejectsRetentionAboveOne) {
    const auto errs = validate_params({}, {1.2, 0.8, 0.05});
    ASSERT_EQ(errs.size(), 1u);
    EXPECT_TRUE(mentions(errs, "d"));
}

TEST(ValidateParams, ListsEveryViolation) {
    const SystemParams p{-1.0, 0.0, -0.1, -0.2};
    const auto errs = validate_params(p, {0.0, 0.99, 0.3});
    EXPECT_TRUE(mentions(errs, "alpha0"));
    EXPECT_TRUE(mentions(errs, "beta"));
    EXPECT_TRUE(mentions(errs, "gamma"));
    EXPECT_TRUE(mentions(errs, "delta"));
    EXPECT_TRUE(mentions(errs, "eps"));
    EXPECT_GE(errs.size(), 6u);
}

TEST(ValidateParams, RejectsNonFinite) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    EXPECT_FALSE(validate_params({1.0, nan, 0.05, 0.0}, {}).empty());
    EXPECT_FALSE(validate_params({}, {0.5, std::numeric_limits<double>::infinity(), 0.05}).empty());
}

TEST(ValidateParams, RequireValidThrows) {
    EXPECT_THROW(require_valid({}, {0.5, 0.03, 0.05}), InvalidInput);
    EXPECT_NO_THROW(require_valid({}, {0.5, 0.8, 0.05}));
}

TEST(ValidateGrid, NeedsStrictlyIncreasingPositive) {
    EXPECT_TRUE(validate_grid({{0.5, 1.0, 2.0}}).empty());
    EXPECT_FALSE(validate_grid({{}}).empty());
    EXPECT_FALSE(validate_grid({{1.0, 1.0}}).empty());
    EXPECT_FALSE(validate_grid({{0.0, 1.0}}).empty());
}

TEST(StiffnessAt, InsideAndOutsideNotch) {
    const SystemParams p;
    const DamageProfile dp{0.5, 0.8, 0.05};
    EXPECT_DOUBLE_EQ(stiffness_at(0.8, p, dp), 0.5);
    EXPECT_DOUBLE_EQ(stiffness_at(0.1, p, dp), 1.0);
    // interfaces take the outside value
    EXPECT_DOUBLE_EQ(stiffness_at(dp.x - dp.eps, p, dp), 1.0);
    EXPECT_DOUBLE_EQ(stiffness_at(dp.x + dp.eps, p, dp), 1.0);
}

TEST(StiffnessAt, UndamagedIsUniform) {
    const SystemParams p{2.5, 1.0, 0.05, 0.0};
    for (double s = 0.0; s <= 1.0; s += 0.01) EXPECT_DOUBLE_EQ(stiffness_at(s, p, {1.0, 0.4, 0.05}), 2.5);
}

TEST(StiffnessAt, TwoJumpsWhenDamaged) {
    const SystemParams p;
    const DamageProfile dp{0.3, 0.4, 0.1};
    int jumps = 0;
    double prev = stiffness_at(0.0, p, dp);
    for (int i = 1; i <= 1000; ++i) {
        const double v = stiffness_at(i / 1000.0, p, dp);
        jumps += v != prev;
        prev = v;
    }
    EXPECT_EQ(jumps, 2);
}

TEST(StiffnessAt, RejectsAbscissaOffBeam) {
    EXPECT_THROW(stiffness_at(-0.01, {}, {0.5, 0.8, 0.05}), InvalidInput);
    EXPECT_THROW(stiffness_at(1.01, {}, {0.5, 0.8, 0.05}), InvalidInput);
}

TEST(Status, Names) {
    EXPECT_EQ(to_string(Status::Converged), "converged");
    EXPECT_EQ(to_string(Status::MaxIters), "max-iters");
    EXPECT_EQ(to_string(Status::DegenerateX), "degenerate-x");
}
