#pragma once

// Single attracting center at the origin, V = kappa / (alpha r^alpha), W = 0.
// Circular orbits, their energy profile, the radial effective potential and
// the c -> infinity limit of the circular radius.
//
// Throughout, S(t) = sqrt(kappa^2 + 4 m^2 c^4 t^2) with t = r^alpha, and the
// differences -kappa + S are evaluated as 4 m^2 c^4 t^2 / (S + kappa) so that
// small t keeps full precision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "relmaup/errors.hpp"
#include "relmaup/integrator.hpp"
#include "relmaup/potentials.hpp"
#include "relmaup/vec2.hpp"

namespace relmaup {

struct ModelConfig {
    double kappa = 1.0;
    double alpha = 2.0;
    double m = 1.0;
    double c = 1.0;

    /// Profile formulas make sense for any alpha > 0; existence results need
    /// alpha > 1 and are checked where used.
    void validate() const {
        if (!(kappa > 0.0)) throw InvalidConfig("kappa must be > 0");
        if (!(alpha > 0.0)) throw InvalidConfig("alpha must be > 0");
        if (!(m > 0.0)) throw InvalidConfig("m must be > 0");
        if (!(c > 0.0)) throw InvalidConfig("c must be > 0");
    }

    PotentialConfig potential() const { return PotentialConfig::single_center(kappa, alpha, m, c); }
    double rest_energy() const { return m * c * c; }
};

namespace detail {

inline void require_strong(double alpha) {
    if (!(alpha > 1.0)) throw InvalidExponent("alpha must be > 1, got " + std::to_string(alpha));
}

inline double s_of_t(const ModelConfig& mc, double t) {
    const double q = 2.0 * mc.m * mc.c * mc.c * t;
    return std::hypot(mc.kappa, q);
}

/// Bisection on [lo, hi] for an f with f(lo), f(hi) of opposite sign;
/// stops at relative width rel_width or when the midpoint stops moving.
template <typename F>
double bisect(F&& f, double lo, double hi, double rel_width = 1e-15) {
    double flo = f(lo);
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi || hi - lo <= rel_width * std::abs(mid)) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Angular velocity of the circular orbit of radius r:
/// omega^2 = 2 kappa c^2 / ((S + kappa) r^2).
inline double omega_from_radius(const ModelConfig& mc, double r) {
    mc.validate();
    if (!(r > 0.0)) throw InvalidConfig("r must be > 0");
    const double t = std::pow(r, mc.alpha);
    const double s = detail::s_of_t(mc, t);
    return std::sqrt(2.0 * mc.kappa * mc.c * mc.c / ((s + mc.kappa) * r * r));
}

/// kappa f(t) at t = r^alpha, f(t) = (S + kappa) / (2 kappa t) - 1 / (alpha t).
inline double energy_of_t(const ModelConfig& mc, double t) {
    const double s = detail::s_of_t(mc, t);
    return (s + mc.kappa) / (2.0 * t) - mc.kappa / (mc.alpha * t);
}

inline double energy_of_radius(const ModelConfig& mc, double r) {
    mc.validate();
    if (!(r > 0.0)) throw InvalidConfig("r must be > 0");
    return energy_of_t(mc, std::pow(r, mc.alpha));
}

/// Phase-space point on the circular orbit of radius r, moving counter-clockwise.
inline PhaseState circular_state(const ModelConfig& mc, double r) {
    mc.validate();
    if (!(r > 0.0)) throw InvalidConfig("r must be > 0");
    // |p| = sqrt(kappa (S + kappa) / 2) / (c t); going through the velocity
    // loses digits once v is close to c
    const double t = std::pow(r, mc.alpha);
    const double s = detail::s_of_t(mc, t);
    return {{r, 0.0}, {0.0, std::sqrt(0.5 * mc.kappa * (s + mc.kappa)) / (mc.c * t)}};
}

/// Energy threshold for circular orbits.
inline double eta(const ModelConfig& mc, double alpha) {
    detail::require_strong(alpha);
    if (alpha < 2.0) return 2.0 * mc.m * mc.c * mc.c * std::sqrt(alpha - 1.0) / alpha;
    return mc.m * mc.c * mc.c;
}

inline double eta(const ModelConfig& mc) { return eta(mc, mc.alpha); }

/// Minimum point of the energy profile in t = r^alpha for alpha in (1, 2).
inline double t_min(const ModelConfig& mc) {
    detail::require_strong(mc.alpha);
    if (!(mc.alpha < 2.0)) throw InvalidExponent("t_min exists only for alpha in (1, 2)");
    return mc.kappa / (mc.m * mc.c * mc.c) * std::sqrt(mc.alpha - 1.0) / (2.0 - mc.alpha);
}

/// All radii of circular orbits with energy E, ascending.
inline std::vector<double> radius_from_energy(const ModelConfig& mc, double E) {
    mc.validate();
    detail::require_strong(mc.alpha);
    const double threshold = eta(mc);
    if (!(E > threshold))
        throw NoCircularOrbit("energy " + std::to_string(E) + " does not exceed eta = " + std::to_string(threshold));
    auto g = [&](double t) { return energy_of_t(mc, t) - E; };
    auto to_r = [&](double t) { return std::pow(t, 1.0 / mc.alpha); };

    // root of g on a branch where g decreases (sign +1) or increases (-1)
    auto branch_root = [&](double lo, double hi) {
        if (!(g(lo) * g(hi) < 0.0)) throw BracketFailure("profile bracket lost its sign change");
        return detail::bisect(g, lo, hi);
    };
    auto expand_down = [&](double t) {
        for (int k = 0; k < 2000 && g(t) <= 0.0; ++k) t *= 0.5;
        if (g(t) <= 0.0) throw BracketFailure("no lower bracket");
        return t;
    };

    std::vector<double> roots;
    if (mc.alpha >= 2.0) {
        double hi = 1.0;
        for (int k = 0; k < 2000 && g(hi) >= 0.0; ++k) hi *= 2.0;
        if (g(hi) >= 0.0) throw BracketFailure("no upper bracket");
        const double lo = expand_down(hi);
        roots.push_back(to_r(branch_root(lo, hi)));
        return roots;
    }
    const double tm = t_min(mc);
    if (g(tm) >= 0.0) return roots;  // E at or below the profile minimum
    roots.push_back(to_r(branch_root(expand_down(tm), tm)));
    if (E < mc.rest_energy()) {
        double hi = 2.0 * tm;
        for (int k = 0; k < 2000 && g(hi) <= 0.0; ++k) hi *= 2.0;
        if (g(hi) <= 0.0) throw BracketFailure("no upper bracket on the increasing branch");
        roots.push_back(to_r(branch_root(tm, hi)));
    }
    return roots;
}

/// Phi_{E,L}(r) = (1/c^2)(kappa^2/(alpha^2 r^2a) - c^2 L^2/r^2 + 2 E kappa/(alpha r^a) + E^2 - m^2 c^4)
inline double effective_potential(const ModelConfig& mc, double E, double L, double r) {
    const double a = mc.alpha, k = mc.kappa, c2 = mc.c * mc.c;
    const double ra = std::pow(r, a);
    return (k * k / (a * a * ra * ra) - c2 * L * L / (r * r) + 2.0 * E * k / (a * ra) + E * E -
            mc.m * mc.m * c2 * c2) / c2;
}

/// Phi~ with Phi' = 2 Phi~ / (c^2 r^(2a+1)).
inline double effective_potential_reduced(const ModelConfig& mc, double E, double L, double r) {
    const double a = mc.alpha, k = mc.kappa;
    return mc.c * mc.c * L * L * std::pow(r, 2.0 * a - 2.0) - k * k / a - E * k * std::pow(r, a);
}

inline double effective_potential_derivative(const ModelConfig& mc, double E, double L, double r) {
    return 2.0 / (mc.c * mc.c * std::pow(r, 2.0 * mc.alpha + 1.0)) * effective_potential_reduced(mc, E, L, r);
}

/// c^2 r^(2a) Phi(r): same sign as Phi, no overflow near r = 0.
inline double effective_potential_scaled(const ModelConfig& mc, double E, double L, double r) {
    const double a = mc.alpha, k = mc.kappa, c2 = mc.c * mc.c;
    const double ra = std::pow(r, a);
    return k * k / (a * a) - c2 * L * L * std::pow(r, 2.0 * a - 2.0) + 2.0 * E * k * ra / a +
           (E * E - mc.m * mc.m * c2 * c2) * ra * ra;
}

/// Coefficients of P2(x) = p0 + p1 x + p2 x^2 with Phi = P2(r^2) / (c^2 r^4) at alpha = 2.
struct QuadraticP2 {
    double p0 = 0.0, p1 = 0.0, p2 = 0.0;
    std::vector<double> positive_roots;  // ascending, in x = r^2
    std::size_t critical_points = 0;     // of Phi in r > 0
    bool bounded_positive_interval = false;
};

inline QuadraticP2 p2_analysis(const ModelConfig& mc, double E, double L) {
    const double k = mc.kappa, c2 = mc.c * mc.c;
    QuadraticP2 q;
    q.p0 = k * k / 4.0;
    q.p1 = -(c2 * L * L - E * k);
    q.p2 = E * E - mc.m * mc.m * c2 * c2;
    if (q.p2 == 0.0) {
        if (q.p1 < 0.0) q.positive_roots.push_back(-q.p0 / q.p1);
    } else {
        const double disc = q.p1 * q.p1 - 4.0 * q.p0 * q.p2;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            // stable pair of roots
            const double qq = -0.5 * (q.p1 + std::copysign(sq, q.p1));
            for (double x : {qq / q.p2, qq != 0.0 ? q.p0 / qq : -1.0})
                if (x > 0.0) q.positive_roots.push_back(x);
            std::sort(q.positive_roots.begin(), q.positive_roots.end());
        }
    }
    // Phi' has the sign of (c^2 L^2 - E kappa) r^2 - kappa^2 / 2
    q.critical_points = (c2 * L * L - E * k) > 0.0 ? 1 : 0;
    // positive between two positive roots needs p2 < 0, impossible with p0 > 0
    q.bounded_positive_interval = q.positive_roots.size() == 2 && q.p2 < 0.0;
    return q;
}

enum class OrbitVerdict { NoBoundedOrbits, CircularOnly, AnnulusPresent };

inline const char* to_string(OrbitVerdict v) {
    switch (v) {
        case OrbitVerdict::NoBoundedOrbits: return "NoBoundedOrbits";
        case OrbitVerdict::CircularOnly: return "CircularOnly";
        case OrbitVerdict::AnnulusPresent: return "AnnulusPresent";
    }
    return "unknown";
}

struct CriticalPoint {
    double r = 0.0;
    double phi = 0.0;
    bool minimum = false;
};

struct OrbitClassification {
    double E = 0.0, L = 0.0, alpha = 0.0;
    std::vector<CriticalPoint> critical_points;
    std::vector<double> zeros;                      // sign changes of Phi
    std::string sign_pattern;                       // e.g. "+-" from small to large r
    std::vector<std::pair<double, double>> annuli;  // bounded intervals with Phi > 0
    OrbitVerdict verdict = OrbitVerdict::NoBoundedOrbits;
    std::optional<QuadraticP2> p2;                  // alpha == 2 only
};

struct ScanGrid {
    double r_min = 1e-6;
    double r_max = 1e6;
    std::size_t per_decade = 400;
};

inline OrbitClassification classify_orbits(const ModelConfig& mc, double E, double L, ScanGrid grid = {}) {
    mc.validate();
    if (!(L > 0.0)) throw InvalidConfig("L must be > 0");
    OrbitClassification out;
    out.E = E;
    out.L = L;
    out.alpha = mc.alpha;

    const double decades = std::log10(grid.r_max / grid.r_min);
    const auto npts = static_cast<std::size_t>(std::ceil(decades * static_cast<double>(grid.per_decade))) + 1;
    std::vector<double> rs(npts);
    for (std::size_t i = 0; i < npts; ++i)
        rs[i] = grid.r_min * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(npts - 1));

    auto dphi = [&](double r) { return effective_potential_reduced(mc, E, L, r); };
    auto phi = [&](double r) { return effective_potential_scaled(mc, E, L, r); };

    for (std::size_t i = 0; i + 1 < npts; ++i) {
        // an exact zero on a node belongs to the interval it closes
        const double a = dphi(rs[i]), b = dphi(rs[i + 1]);
        if ((a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0)) {
            const double r = b == 0.0 ? rs[i + 1] : detail::bisect(dphi, rs[i], rs[i + 1]);
            out.critical_points.push_back({r, effective_potential(mc, E, L, r), a < 0.0});
        }
    }

    // Double zeros: a critical point where Phi vanishes to rounding.
    bool touching_zero = false;
    for (const auto& cp : out.critical_points) {
        const double scale = std::abs(mc.kappa * mc.kappa / (mc.alpha * mc.alpha)) + std::abs(E * E) +
                             mc.m * mc.m * std::pow(mc.c, 4);
        if (std::abs(phi(cp.r)) <= 1e-10 * scale) touching_zero = true;
    }

    char last = 0;
    for (std::size_t i = 0; i < npts; ++i) {
        const double v = phi(rs[i]);
        const char sgn = v > 0.0 ? '+' : (v < 0.0 ? '-' : '0');
        if (sgn != last) out.sign_pattern.push_back(sgn);
        if (i > 0) {
            const double u = phi(rs[i - 1]);
            if ((u > 0.0 && v <= 0.0) || (u <= 0.0 && v > 0.0)) out.zeros.push_back(detail::bisect(phi, rs[i - 1], rs[i]));
        }
        last = sgn;
    }
    // bounded positive intervals: a '-' to '+' zero followed by a '+' to '-' zero
    for (std::size_t z = 0; z + 1 < out.zeros.size(); ++z) {
        const double mid = std::sqrt(out.zeros[z] * out.zeros[z + 1]);
        if (phi(mid) > 0.0) out.annuli.emplace_back(out.zeros[z], out.zeros[z + 1]);
    }

    if (!out.annuli.empty()) out.verdict = OrbitVerdict::AnnulusPresent;
    else if (touching_zero) out.verdict = OrbitVerdict::CircularOnly;
    else out.verdict = OrbitVerdict::NoBoundedOrbits;

    if (mc.alpha == 2.0) out.p2 = p2_analysis(mc, E, L);
    return out;
}

/// psi(x) = 2x^2/(-kappa + sqrt(kappa^2 + 4x^2)) - x = (kappa + kappa^2/(sqrt(kappa^2 + 4x^2) + 2x)) / 2
inline double psi(const ModelConfig& mc, double x) {
    const double k = mc.kappa;
    return 0.5 * (k + k * k / (std::hypot(k, 2.0 * x) + 2.0 * x));
}

inline double theta(const ModelConfig& mc, double x, double h) { return h * x + mc.kappa / mc.alpha; }

struct PsiTheta {
    double psi = 0.0;
    double theta = 0.0;
};

inline PsiTheta psi_theta(const ModelConfig& mc, double x, double h) {
    if (!(x > 0.0)) throw InvalidConfig("x must be > 0");
    return {psi(mc, x), theta(mc, x, h)};
}

/// Circular radius at energy h + m c^2 from psi(m c^2 t) = Theta(t), t = r^alpha.
inline double circular_radius_at_h(const ModelConfig& mc, double h) {
    mc.validate();
    detail::require_strong(mc.alpha);
    if (!(h + mc.rest_energy() > eta(mc)))
        throw RootNotBracketed("h + m c^2 does not exceed eta at c = " + std::to_string(mc.c));
    const double mc2 = mc.rest_energy();
    auto f = [&](double t) { return psi(mc, mc2 * t) - theta(mc, t, h); };
    // f(0+) = kappa (1 - 1/alpha) > 0 and f decreases to -infinity when h > 0
    double hi = 1.0, lo = 1.0;
    for (int k = 0; k < 4000 && f(hi) > 0.0; ++k) hi *= 2.0;
    for (int k = 0; k < 4000 && f(lo) <= 0.0; ++k) lo *= 0.5;
    if (!(f(lo) > 0.0 && f(hi) <= 0.0)) throw RootNotBracketed("psi = Theta has no bracketed root");
    return std::pow(detail::bisect(f, lo, hi), 1.0 / mc.alpha);
}

struct LimitRow {
    double c = 0.0;
    std::optional<double> radius;
    std::string error;
};

struct LimitTable {
    std::vector<LimitRow> rows;
    std::optional<double> classical_radius;  // R_h for alpha > 2
    double limit_radius = 0.0;               // R_h or 0
    bool strictly_decreasing = false;
};

/// R_h = ((kappa/h)(alpha - 2)/(2 alpha))^(1/alpha), alpha > 2.
inline double classical_radius(double kappa, double alpha, double h) {
    if (!(alpha > 2.0)) throw NoCircularOrbit("classical circular orbits with h > 0 need alpha > 2");
    if (!(h > 0.0)) throw InvalidEnergy("h must be > 0");
    return std::pow(kappa / h * (alpha - 2.0) / (2.0 * alpha), 1.0 / alpha);
}

inline LimitTable nonrelativistic_limit(const ModelConfig& base, double h, const std::vector<double>& c_values) {
    base.validate();
    detail::require_strong(base.alpha);
    if (!(h > 0.0)) throw InvalidEnergy("h must be > 0");
    if (c_values.empty()) throw InvalidConfig("c_values is empty");
    for (std::size_t i = 0; i < c_values.size(); ++i) {
        if (!(c_values[i] > 0.0)) throw InvalidConfig("c values must be > 0");
        if (i > 0 && !(c_values[i] > c_values[i - 1])) throw InvalidConfig("c values must be ascending");
    }
    LimitTable tab;
    for (double c : c_values) {
        ModelConfig mc = base;
        mc.c = c;
        LimitRow row{c, std::nullopt, ""};
        try {
            row.radius = circular_radius_at_h(mc, h);
        } catch (const RootNotBracketed& e) {
            row.error = e.what();
        }
        tab.rows.push_back(row);
    }
    if (base.alpha > 2.0) {
        tab.classical_radius = classical_radius(base.kappa, base.alpha, h);
        tab.limit_radius = *tab.classical_radius;
    }
    tab.strictly_decreasing = true;
    std::optional<double> prev;
    for (const auto& row : tab.rows) {
        if (!row.radius) continue;
        if (prev && !(*row.radius < *prev)) tab.strictly_decreasing = false;
        prev = row.radius;
    }
    return tab;
}

}  // namespace relmaup
