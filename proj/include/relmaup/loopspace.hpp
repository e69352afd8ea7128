#pragma once

// Discretized closed loops u: [0,1] -> plane and the length, energy and
// Maupertuis functionals.
//
// Quadrature (shared by every functional and the exact gradient):
//   kinetic         K = N * sum_j |u_{j+1} - u_j|^2
//   potential part  P = (1/N) * sum_j g(u_j),      g = Z_h + 2 h m
//   Maupertuis      M = K * P
//   energy          E = N * sum_j |u_{j+1} - u_j|^2 g(u_j)
//   length          L = sum_j |u_{j+1} - u_j| sqrt(g(u_j))
// Indices are periodic (u_N = u_0). With this choice L^2 <= K * P and
// L^2 <= E hold exactly by the discrete Cauchy-Schwarz inequality.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relmaup/errors.hpp"
#include "relmaup/potentials.hpp"
#include "relmaup/vec2.hpp"

namespace relmaup {

/// Closed polyline sampled on a uniform grid; the endpoint u_N = u_0 is implicit.
class DiscreteLoop {
public:
    static constexpr std::size_t kMinGridSize = 8;

    DiscreteLoop() = default;

    explicit DiscreteLoop(std::vector<Vec2> samples) : samples_(std::move(samples)) {
        if (samples_.size() < kMinGridSize)
            throw InvalidConfig("a loop needs at least " + std::to_string(kMinGridSize) +
                                " samples, got " + std::to_string(samples_.size()));
    }

    std::size_t size() const { return samples_.size(); }
    const Vec2& operator[](std::size_t j) const { return samples_[j]; }
    Vec2& operator[](std::size_t j) { return samples_[j]; }
    /// Periodic access.
    const Vec2& at_wrapped(std::ptrdiff_t j) const {
        const auto n = static_cast<std::ptrdiff_t>(samples_.size());
        return samples_[static_cast<std::size_t>(((j % n) + n) % n)];
    }
    std::span<const Vec2> samples() const { return samples_; }
    std::span<Vec2> samples() { return samples_; }

    auto begin() const { return samples_.begin(); }
    auto end() const { return samples_.end(); }

    /// Circle of radius r about center, counter-clockwise when turns > 0.
    static DiscreteLoop circle(const Vec2& center, double radius, std::size_t n, int turns = 1,
                               double phase = 0.0) {
        std::vector<Vec2> s(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double th = phase + 2.0 * std::numbers::pi * turns * static_cast<double>(j) / static_cast<double>(n);
            s[j] = center + Vec2{radius * std::cos(th), radius * std::sin(th)};
        }
        return DiscreteLoop(std::move(s));
    }

    /// Doubles the grid by inserting segment midpoints; the polyline is unchanged.
    DiscreteLoop refined() const {
        std::vector<Vec2> s;
        s.reserve(2 * samples_.size());
        for (std::size_t j = 0; j < samples_.size(); ++j) {
            const Vec2& a = samples_[j];
            const Vec2& b = samples_[(j + 1) % samples_.size()];
            s.push_back(a);
            s.push_back((a + b) * 0.5);
        }
        return DiscreteLoop(std::move(s));
    }

    DiscreteLoop translated(const Vec2& shift) const {
        auto s = samples_;
        for (auto& p : s) p += shift;
        return DiscreteLoop(std::move(s));
    }

    /// Same loop traversed in the opposite direction, starting at u_0.
    DiscreteLoop reversed() const {
        std::vector<Vec2> s(samples_.size());
        s[0] = samples_[0];
        for (std::size_t j = 1; j < samples_.size(); ++j) s[j] = samples_[samples_.size() - j];
        return DiscreteLoop(std::move(s));
    }

private:
    std::vector<Vec2> samples_;
};

struct FunctionalReport {
    double kinetic = 0.0;
    double potential_part = 0.0;
    double maupertuis = 0.0;
    double energy_functional = 0.0;
    double length = 0.0;
};

namespace detail {

/// g = Z_h + 2hm at a sample, checking the Hill region.
inline double weight_at(const PotentialConfig& cfg, EnergyLevel e, const Vec2& x, std::size_t j) {
    const double v = eval_V(cfg, x);
    if (!hill_condition(v, e.h))
        throw OutsideHillRegion("sample " + std::to_string(j) + " has V + h <= 0");
    return metric_weight(v, e.h, cfg.mass(), cfg.light_speed());
}

}  // namespace detail

inline double kinetic_integral(const DiscreteLoop& u) {
    const std::size_t n = u.size();
    double k = 0.0;
    for (std::size_t j = 0; j < n; ++j) k += norm2(u[(j + 1) % n] - u[j]);
    return k * static_cast<double>(n);
}

inline FunctionalReport evaluate_functionals(const DiscreteLoop& u, const PotentialConfig& cfg,
                                             EnergyLevel e) {
    const std::size_t n = u.size();
    const double nd = static_cast<double>(n);
    FunctionalReport r;
    for (std::size_t j = 0; j < n; ++j) {
        const double g = detail::weight_at(cfg, e, u[j], j);
        const double d2 = norm2(u[(j + 1) % n] - u[j]);
        r.kinetic += d2;
        r.potential_part += g;
        r.energy_functional += d2 * g;
        r.length += std::sqrt(d2 * g);
    }
    r.kinetic *= nd;
    r.potential_part /= nd;
    r.energy_functional *= nd;
    r.maupertuis = r.kinetic * r.potential_part;
    return r;
}

/// Value and exact gradient of the discrete Maupertuis functional.
struct MaupertuisEvaluation {
    FunctionalReport report;
    std::vector<Vec2> gradient;
};

inline MaupertuisEvaluation maupertuis_with_gradient(const DiscreteLoop& u,
                                                     const PotentialConfig& cfg, EnergyLevel e) {
    const std::size_t n = u.size();
    const double nd = static_cast<double>(n);
    const double m = cfg.mass();
    const double c = cfg.light_speed();

    MaupertuisEvaluation out;
    auto& r = out.report;
    std::vector<Vec2> grad_p(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto s = eval_V_and_grad(cfg, u[j]);
        if (!hill_condition(s.v, e.h))
            throw OutsideHillRegion("sample " + std::to_string(j) + " has V + h <= 0");
        const double g = metric_weight(s.v, e.h, m, c);
        const double d2 = norm2(u[(j + 1) % n] - u[j]);
        r.kinetic += d2;
        r.potential_part += g;
        r.energy_functional += d2 * g;
        r.length += std::sqrt(d2 * g);
        // grad Z_h = (2/c^2)(V + h + m c^2) grad V
        grad_p[j] = s.grad * (2.0 / (c * c) * (s.v + e.h + m * c * c) / nd);
    }
    r.kinetic *= nd;
    r.potential_part /= nd;
    r.energy_functional *= nd;
    r.maupertuis = r.kinetic * r.potential_part;

    out.gradient.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Vec2 lap = u[j] * 2.0 - u.at_wrapped(static_cast<std::ptrdiff_t>(j) - 1) -
                         u[(j + 1) % n];
        out.gradient[j] = lap * (2.0 * nd * r.potential_part) + grad_p[j] * r.kinetic;
    }
    return out;
}

inline std::vector<Vec2> maupertuis_gradient(const DiscreteLoop& u, const PotentialConfig& cfg,
                                             EnergyLevel e) {
    return maupertuis_with_gradient(u, cfg, e).gradient;
}

inline double directional_derivative(const DiscreteLoop& u, const PotentialConfig& cfg,
                                     EnergyLevel e, std::span<const Vec2> direction) {
    if (direction.size() != u.size())
        throw InvalidConfig("direction must have one vector per sample");
    const auto g = maupertuis_gradient(u, cfg, e);
    double d = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) d += dot(g[j], direction[j]);
    return d;
}

/// M(v) - M(u) evaluated from the sample displacements, so that the
/// difference keeps its relative accuracy when v is very close to u.
inline double maupertuis_difference(const DiscreteLoop& u, const DiscreteLoop& v, const PotentialConfig& cfg,
                                    EnergyLevel e) {
    const std::size_t n = u.size();
    if (v.size() != n) throw InvalidConfig("loops differ in grid size");
    const double nd = static_cast<double>(n);
    const double m = cfg.mass(), c = cfg.light_speed(), a = cfg.alpha();

    double ku = 0.0, dk = 0.0, pv = 0.0, dp = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jn = (j + 1) % n;
        const Vec2 du = u[jn] - u[j];
        const Vec2 dv = v[jn] - v[j];
        const Vec2 ddelta = (v[jn] - u[jn]) - (v[j] - u[j]);
        ku += norm2(du);
        dk += dot(ddelta, du + dv);

        const Vec2 delta = v[j] - u[j];
        double dV = 0.0;
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            const Vec2 au = u[j] - cfg.centers()[i];
            const Vec2 av = v[j] - cfg.centers()[i];
            const double ru2 = norm2(au);
            if (!(std::sqrt(ru2) > cfg.collision_radius()) || !(norm(av) > cfg.collision_radius()))
                throw CollisionPoint("sample " + std::to_string(j) + " within collision radius");
            const double rel = dot(delta, au + av) / ru2;  // (|av|^2 - |au|^2) / |au|^2
            dV += cfg.strengths()[i] / (a * std::pow(ru2, 0.5 * a)) * std::expm1(-0.5 * a * std::log1p(rel));
        }
        if (const auto* gb = std::get_if<perturbation::GaussianBump>(&cfg.perturbation())) {
            const double w2 = gb->width * gb->width;
            dV += gb->amplitude * std::exp(-norm2(u[j]) / w2) * std::expm1(-dot(delta, u[j] + v[j]) / w2);
        }
        const double wu = eval_V(cfg, u[j]) + e.h;
        const double wv = eval_V(cfg, v[j]) + e.h;
        if (!(wv > 0.0)) throw OutsideHillRegion("sample " + std::to_string(j) + " has V + h <= 0");
        pv += 2.0 * m * wv + wv * wv / (c * c);
        dp += dV * (2.0 * m + (wu + wv) / (c * c));
    }
    ku *= nd;
    dk *= nd;
    pv /= nd;
    dp /= nd;
    // K_v P_v - K_u P_u = dK P_v + K_u dP
    return dk * pv + ku * dp;
}

/// Discrete H^1 distance (int |u - sigma|^2 + int |u'|^2)^(1/2).
inline double h1_norm_to_center(const DiscreteLoop& u, const Vec2& center) {
    double l2 = 0.0;
    for (const auto& p : u) l2 += norm2(p - center);
    l2 /= static_cast<double>(u.size());
    return std::sqrt(l2 + kinetic_integral(u));
}

struct CenterDistance {
    double min = std::numeric_limits<double>::infinity();  // collision margin
    double max = 0.0;                                      // sup norm of u - sigma
};

inline CenterDistance sup_distance_to_center(const DiscreteLoop& u, const Vec2& center) {
    CenterDistance d;
    for (const auto& p : u) {
        const double r = norm(p - center);
        d.min = std::min(d.min, r);
        d.max = std::max(d.max, r);
    }
    return d;
}

/// Norm used for the collision-margin constraint ||u - sigma_i|| >= epsilon.
/// sup_distance measures the smallest sample distance to the center.
enum class NormChoice { sup_distance, h1_distance };

inline double distance_to_center(const DiscreteLoop& u, const Vec2& center, NormChoice choice) {
    return choice == NormChoice::sup_distance ? sup_distance_to_center(u, center).min
                                              : h1_norm_to_center(u, center);
}

/// Smallest distance from any sample to any center.
inline double min_distance_to_centers(const DiscreteLoop& u, const PotentialConfig& cfg) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& s : cfg.centers()) d = std::min(d, sup_distance_to_center(u, s).min);
    return d;
}

}  // namespace relmaup
