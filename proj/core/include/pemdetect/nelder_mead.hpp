#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace pem {

struct SimplexOptions {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    double diameter_tol = 1e-8;
    double value_tol = 0.0;  // absolute spread of vertex values; 0 disables
    int max_iterations = 500;
    std::uint64_t seed = 0;
};

/// Throws InvalidInput unless the coefficients are admissible.
void validate(const SimplexOptions& opts);

/// Axis-aligned feasible box. Points proposed outside are clamped to the
/// boundary and pulled `inset` inside.
struct Box {
    std::vector<double> lower;
    std::vector<double> upper;
    double inset = 1e-6;
    std::vector<double> clamp(std::span<const double> v) const;
};

struct SimplexResult {
    std::vector<double> argmin;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> best_history;  // best vertex value after each iteration
};

using Objective = std::function<double(std::span<const double>)>;

/// Downhill simplex minimization inside a box. Non-finite objective values
/// rank a vertex as worst.
SimplexResult nelder_mead(const Objective& f,
                          std::vector<std::vector<double>> simplex,
                          const Box& box,
                          const SimplexOptions& opts);

/// Start simplex from a point by stepping each coordinate by `step[i]`,
/// flipping the step when it would leave the box.
std::vector<std::vector<double>> coordinate_simplex(std::span<const double> start,
                                                    std::span<const double> step,
                                                    const Box& box);

}  // namespace pem
