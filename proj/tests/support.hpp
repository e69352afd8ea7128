#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "relmaup/loopspace.hpp"
#include "relmaup/potentials.hpp"

namespace testing_support {

using relmaup::DiscreteLoop;
using relmaup::Vec2;

inline std::mt19937_64& rng() {
    static std::mt19937_64 gen(20240611);
    return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

/// Smooth star-shaped loop around center: radius r0 (1 + a cos(k s + phi)).
inline DiscreteLoop wobbly_loop(const Vec2& center, double r0, std::size_t n, double amp, int mode, double phase, double offset = 0.0) {
    std::vector<Vec2> s(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        const double r = r0 * (1.0 + amp * std::cos(mode * t + phase));
        s[j] = center + Vec2{r * std::cos(t + offset), r * std::sin(t + offset)};
    }
    return DiscreteLoop(std::move(s));
}

inline DiscreteLoop random_loop(const Vec2& center, double r0, std::size_t n) {
    return wobbly_loop(center, r0, n, uniform(0.0, 0.3), static_cast<int>(uniform(1, 5)), uniform(0, 6.28));
}

inline relmaup::PotentialConfig model_problem() { return relmaup::PotentialConfig::single_center(1.0, 2.0); }

inline relmaup::PotentialConfig two_centers(double alpha = 2.0) {
    return relmaup::PotentialConfig({{-1.0, 0.0}, {1.0, 0.0}}, {1.0, 1.0}, alpha);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing_support
