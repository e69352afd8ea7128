#pragma once

// N-centre potential V(x) = sum_i kappa_i / (alpha |x - sigma_i|^alpha) + W(x),
// its gradient, the transformed weight Z_h = 2 m V + (V + h)^2 / c^2 and the
// Hill region {V + h > 0}. All functions are pure in (config, h, x).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "relmaup/errors.hpp"
#include "relmaup/vec2.hpp"

namespace relmaup {

namespace perturbation {

struct Zero {};

struct Constant {
    double value = 0.0;  // M0 > 0
};

/// W(x) = offset + amplitude * exp(-|x|^2 / width^2)
struct GaussianBump {
    double amplitude = 0.0;
    double width = 1.0;
    double offset = 0.0;
};

}  // namespace perturbation

using PerturbationSpec =
    std::variant<perturbation::Zero, perturbation::Constant, perturbation::GaussianBump>;

inline double eval_W(const PerturbationSpec& w, const Vec2& x) {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, perturbation::Zero>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, perturbation::Constant>) {
                return p.value;
            } else {
                return p.offset + p.amplitude * std::exp(-norm2(x) / (p.width * p.width));
            }
        },
        w);
}

inline Vec2 grad_W(const PerturbationSpec& w, const Vec2& x) {
    if (const auto* g = std::get_if<perturbation::GaussianBump>(&w)) {
        const double w2 = g->width * g->width;
        return x * (-2.0 * g->amplitude * std::exp(-norm2(x) / w2) / w2);
    }
    return {};
}

/// Upper bound M of (W1), 0 for the Zero perturbation.
inline double perturbation_bound(const PerturbationSpec& w) {
    if (const auto* c = std::get_if<perturbation::Constant>(&w)) return c->value;
    if (const auto* g = std::get_if<perturbation::GaussianBump>(&w)) return g->offset + g->amplitude;
    return 0.0;
}

/// True when W satisfies 0 < W <= M (the Zero perturbation does not).
inline bool perturbation_strictly_positive(const PerturbationSpec& w) {
    return !std::holds_alternative<perturbation::Zero>(w);
}

/// Immutable description of the potential and the physical constants.
class PotentialConfig {
public:
    static constexpr double kDefaultCollisionRadius = 1e-12;

    PotentialConfig(std::vector<Vec2> centers, std::vector<double> strengths, double alpha,
                    PerturbationSpec perturbation = perturbation::Zero{}, double mass = 1.0,
                    double light_speed = 1.0, double collision_radius = kDefaultCollisionRadius)
        : centers_(std::move(centers)),
          strengths_(std::move(strengths)),
          alpha_(alpha),
          perturbation_(perturbation),
          mass_(mass),
          light_speed_(light_speed),
          collision_radius_(collision_radius) {
        validate();
    }

    /// Single center at the origin with W = 0.
    static PotentialConfig single_center(double kappa, double alpha, double mass = 1.0,
                                         double light_speed = 1.0) {
        return PotentialConfig({Vec2{0.0, 0.0}}, {kappa}, alpha, perturbation::Zero{}, mass,
                               light_speed);
    }

    const std::vector<Vec2>& centers() const { return centers_; }
    const std::vector<double>& strengths() const { return strengths_; }
    std::size_t size() const { return centers_.size(); }
    double alpha() const { return alpha_; }
    const PerturbationSpec& perturbation() const { return perturbation_; }
    double mass() const { return mass_; }
    double light_speed() const { return light_speed_; }
    double collision_radius() const { return collision_radius_; }

    /// Largest |sigma_i|.
    double max_center_norm() const {
        double r = 0.0;
        for (const auto& s : centers_) r = std::max(r, norm(s));
        return r;
    }

    /// Smallest pairwise distance between centers, +inf for a single center.
    double min_center_gap() const {
        double g = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < centers_.size(); ++i)
            for (std::size_t j = i + 1; j < centers_.size(); ++j)
                g = std::min(g, norm(centers_[i] - centers_[j]));
        return g;
    }

private:
    void validate() const {
        if (centers_.empty()) throw InvalidConfig("at least one center is required");
        if (centers_.size() != strengths_.size())
            throw InvalidConfig("centers and strengths differ in length");
        for (double k : strengths_)
            if (!(k > 0.0) || !std::isfinite(k)) throw InvalidConfig("strengths must be > 0");
        for (std::size_t i = 0; i < centers_.size(); ++i)
            for (std::size_t j = i + 1; j < centers_.size(); ++j)
                if (centers_[i] == centers_[j]) throw InvalidConfig("centers must be distinct");
        if (!(mass_ > 0.0)) throw InvalidConfig("m must be > 0");
        if (!(light_speed_ > 0.0)) throw InvalidConfig("c must be > 0");
        if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw InvalidConfig("alpha must be > 0");
        if (!(collision_radius_ >= 0.0)) throw InvalidConfig("collision radius must be >= 0");
        std::visit(
            [](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, perturbation::Constant>) {
                    if (!(p.value > 0.0)) throw InvalidConfig("constant perturbation needs value > 0");
                } else if constexpr (std::is_same_v<T, perturbation::GaussianBump>) {
                    if (!(p.amplitude > 0.0) || !(p.width > 0.0) || !(p.offset > 0.0))
                        throw InvalidConfig("gaussian perturbation needs amplitude, width, offset > 0");
                }
            },
            perturbation_);
    }

    std::vector<Vec2> centers_;
    std::vector<double> strengths_;
    double alpha_;
    PerturbationSpec perturbation_;
    double mass_;
    double light_speed_;
    double collision_radius_;
};

/// Energy above rest energy; the relativistic energy is h + m c^2.
struct EnergyLevel {
    double h = 0.0;

    double relativistic(const PotentialConfig& cfg) const {
        return h + cfg.mass() * cfg.light_speed() * cfg.light_speed();
    }
};

namespace detail {

inline void check_collision(const PotentialConfig& cfg, const Vec2& x) {
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const double d = norm(x - cfg.centers()[i]);
        if (!(d > cfg.collision_radius()))
            throw CollisionPoint("point within collision radius of center " + std::to_string(i));
    }
}

}  // namespace detail

inline double eval_V(const PotentialConfig& cfg, const Vec2& x) {
    detail::check_collision(cfg, x);
    const double a = cfg.alpha();
    double v = 0.0;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const double r = norm(x - cfg.centers()[i]);
        v += cfg.strengths()[i] / (a * std::pow(r, a));
    }
    return v + eval_W(cfg.perturbation(), x);
}

inline Vec2 grad_V(const PotentialConfig& cfg, const Vec2& x) {
    detail::check_collision(cfg, x);
    const double a = cfg.alpha();
    Vec2 g{};
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const Vec2 d = x - cfg.centers()[i];
        const double r = norm(d);
        g -= d * (cfg.strengths()[i] / std::pow(r, a + 2.0));
    }
    return g + grad_W(cfg.perturbation(), x);
}

/// Z_h as a function of the potential value.
inline double transformed_potential(double v, double h, double m, double c) {
    return 2.0 * m * v + (v + h) * (v + h) / (c * c);
}

/// Jacobi-type weight Z_h + 2 h m = 2 m (V + h) + (V + h)^2 / c^2.
inline double metric_weight(double v, double h, double m, double c) {
    const double w = v + h;
    return 2.0 * m * w + w * w / (c * c);
}

inline bool hill_condition(double v, double h) { return v + h > 0.0; }

inline double eval_Zh(const PotentialConfig& cfg, EnergyLevel e, const Vec2& x) {
    return transformed_potential(eval_V(cfg, x), e.h, cfg.mass(), cfg.light_speed());
}

inline Vec2 grad_Zh(const PotentialConfig& cfg, EnergyLevel e, const Vec2& x) {
    const double c = cfg.light_speed();
    const double v = eval_V(cfg, x);
    return grad_V(cfg, x) * (2.0 / (c * c) * (v + e.h + cfg.mass() * c * c));
}

inline bool in_hill_region(const PotentialConfig& cfg, EnergyLevel e, const Vec2& x) {
    return hill_condition(eval_V(cfg, x), e.h);
}

/// V and grad V in one pass over the centers.
struct PotentialSample {
    double v;
    Vec2 grad;
};

inline PotentialSample eval_V_and_grad(const PotentialConfig& cfg, const Vec2& x) {
    detail::check_collision(cfg, x);
    const double a = cfg.alpha();
    PotentialSample s{eval_W(cfg.perturbation(), x), grad_W(cfg.perturbation(), x)};
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const Vec2 d = x - cfg.centers()[i];
        const double r = norm(d);
        const double ra = std::pow(r, a);
        s.v += cfg.strengths()[i] / (a * ra);
        s.grad -= d * (cfg.strengths()[i] / (ra * r * r));
    }
    return s;
}

}  // namespace relmaup
