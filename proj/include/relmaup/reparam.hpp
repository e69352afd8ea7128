#pragma once

// Changes of parameter between Maupertuis loops, constant-speed loops of the
// weighted metric, and time-parameterized periodic solutions.
//
// Loops are treated as samples of a smooth periodic curve: derivatives and
// cumulative integrals come from the trigonometric interpolant, and inverse
// maps are found by safeguarded Newton iteration started from a monotone
// cubic (Fritsch-Carlson) fit of the node table.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "relmaup/errors.hpp"
#include "relmaup/fourier.hpp"
#include "relmaup/loopspace.hpp"
#include "relmaup/potentials.hpp"
#include "relmaup/vec2.hpp"

namespace relmaup {

struct PeriodicSolution {
    double period = 0.0;
    std::vector<double> times;
    std::vector<Vec2> positions;
    std::vector<Vec2> velocities;
    double h = 0.0;
    double energy = 0.0;          // h + m c^2
    double lambda = 0.0;          // mean of |q'|^2 g / 2 over the input nodes
    double lambda_spread = 0.0;   // (max - min) / mean of the same quantity

    std::size_t size() const { return times.size(); }
};

namespace detail {

/// Monotone cubic Hermite interpolant through (xs, ys), xs strictly increasing.
class MonotoneCubic {
public:
    MonotoneCubic(std::vector<double> xs, std::vector<double> ys) : x_(std::move(xs)), y_(std::move(ys)) {
        const std::size_t n = x_.size();
        std::vector<double> delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        m_.assign(n, 0.0);
        m_[0] = delta[0];
        m_[n - 1] = delta[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i)
            m_[i] = delta[i - 1] * delta[i] <= 0.0 ? 0.0 : 0.5 * (delta[i - 1] + delta[i]);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (delta[i] == 0.0) {
                m_[i] = m_[i + 1] = 0.0;
                continue;
            }
            const double a = m_[i] / delta[i];
            const double b = m_[i + 1] / delta[i];
            const double s = a * a + b * b;
            if (s > 9.0) {
                const double t = 3.0 / std::sqrt(s);
                m_[i] = t * a * delta[i];
                m_[i + 1] = t * b * delta[i];
            }
        }
    }

    double operator()(double x) const {
        const std::size_t i = segment(x);
        const double hseg = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / hseg;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * hseg * m_[i] +
               (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * hseg * m_[i + 1];
    }

    std::size_t segment(double x) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        return std::min(i, x_.size() - 2);
    }

private:
    std::vector<double> x_, y_, m_;
};

/// Solves F(s) = target for s in [0, 1] given F increasing with F(nodes)
/// tabulated on the uniform grid nodes_j = j / (table.size() - 1).
inline double invert_increasing(const std::function<double(double)>& f,
                                const std::function<double(double)>& df,
                                const std::vector<double>& table, const MonotoneCubic& guess,
                                double target) {
    const std::size_t m = table.size() - 1;
    auto it = std::upper_bound(table.begin(), table.end(), target);
    std::size_t i = it == table.begin() ? 0 : static_cast<std::size_t>(it - table.begin()) - 1;
    i = std::min(i, m - 1);
    double lo = static_cast<double>(i) / static_cast<double>(m);
    double hi = static_cast<double>(i + 1) / static_cast<double>(m);
    double s = std::clamp(guess(target), lo, hi);
    const double scale = std::max(std::abs(table.back()), std::abs(table.front())) + 1.0;
    for (int k = 0; k < 60; ++k) {
        const double r = f(s) - target;
        if (std::abs(r) <= 4e-16 * scale) break;
        if (r > 0.0) hi = s;
        else lo = s;
        const double d = df(s);
        double next = d > 0.0 ? s - r / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == s || hi - lo <= 4e-16) break;
        s = next;
    }
    return s;
}

inline double grid_point(std::size_t j, std::size_t n) {
    return static_cast<double>(j) / static_cast<double>(n);
}

}  // namespace detail

/// Resamples u uniformly in the arclength of the weighted metric, which makes
/// |q'|^2 (Z_h + 2hm) constant along the output.
inline DiscreteLoop maupertuis_to_energy_param(const DiscreteLoop& u, const PotentialConfig& cfg, EnergyLevel e,
                                               std::size_t out_size = 0) {
    const std::size_t n = u.size();
    if (out_size == 0) out_size = n;
    if (kinetic_integral(u) == 0.0) throw DegenerateLoop("kinetic integral vanishes");
    const CurveInterpolant curve(u.samples());
    std::vector<double> density(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double g = detail::weight_at(cfg, e, u[j], j);
        density[j] = norm(curve.derivative(detail::grid_point(j, n))) * std::sqrt(g);
        if (!(density[j] > 0.0)) throw DegenerateLoop("loop is stationary at sample " + std::to_string(j));
    }
    const TrigInterpolant rho(density);
    const double total = rho.mean();
    auto f = [&](double s) { return rho.integral(s) / total; };
    auto df = [&](double s) { return rho.value(s) / total; };

    std::vector<double> table(n + 1), nodes(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        nodes[j] = detail::grid_point(j, n);
        table[j] = j == n ? 1.0 : f(nodes[j]);
        if (j > 0 && !(table[j] > table[j - 1]))
            throw DegenerateLoop("arclength is not increasing; refine the grid");
    }
    const detail::MonotoneCubic guess(table, nodes);
    std::vector<Vec2> q(out_size);
    for (std::size_t k = 0; k < out_size; ++k) {
        const double s = k == 0 ? 0.0 : detail::invert_increasing(f, df, table, guess, detail::grid_point(k, out_size));
        q[k] = k == 0 ? u[0] : curve.value(s);
    }
    return DiscreteLoop(std::move(q));
}

/// Velocity on the energy shell at x moving along direction.
inline Vec2 velocity_on_shell(const PotentialConfig& cfg, EnergyLevel e, const Vec2& x, const Vec2& direction) {
    const double m = cfg.mass(), c = cfg.light_speed();
    const double v = eval_V(cfg, x);
    if (!hill_condition(v, e.h)) throw OutsideHillRegion("position outside the Hill region");
    const double g = metric_weight(v, e.h, m, c);
    return direction / norm(direction) * (c * c * std::sqrt(g) / (v + e.h + m * c * c));
}

inline PeriodicSolution energy_param_to_time(const DiscreteLoop& q, const PotentialConfig& cfg, EnergyLevel e,
                                             std::size_t time_samples = 0) {
    const std::size_t n = q.size();
    if (time_samples == 0) time_samples = n;
    const double m = cfg.mass(), c = cfg.light_speed();
    const CurveInterpolant curve(q.samples());

    std::vector<double> tprime(n), lam(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double v = eval_V(cfg, q[j]);
        if (!hill_condition(v, e.h)) throw OutsideHillRegion("sample " + std::to_string(j) + " has V + h <= 0");
        const double g = metric_weight(v, e.h, m, c);
        const Vec2 dq = curve.derivative(detail::grid_point(j, n));
        tprime[j] = (v + e.h + m * c * c) / std::sqrt(g) * norm(dq) / (c * c);
        lam[j] = 0.5 * norm2(dq) * g;
        if (!(tprime[j] > 0.0) || !std::isfinite(tprime[j]))
            throw NonMonotoneTime("t'(sigma) is not positive at node " + std::to_string(j));
    }

    PeriodicSolution sol;
    sol.h = e.h;
    sol.energy = e.relativistic(cfg);
    double lsum = 0.0;
    for (double l : lam) lsum += l;
    sol.lambda = lsum / static_cast<double>(n);
    const auto [lmin, lmax] = std::minmax_element(lam.begin(), lam.end());
    sol.lambda_spread = (*lmax - *lmin) / sol.lambda;

    const TrigInterpolant tp(tprime);
    const double period = tp.mean();
    sol.period = period;
    auto f = [&](double s) { return tp.integral(s); };
    auto df = [&](double s) { return tp.value(s); };
    std::vector<double> table(n + 1), nodes(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        nodes[j] = detail::grid_point(j, n);
        table[j] = j == n ? period : f(nodes[j]);
        if (j > 0 && !(table[j] > table[j - 1]))
            throw NonMonotoneTime("t(sigma) is not strictly increasing near node " + std::to_string(j));
    }
    const detail::MonotoneCubic guess(table, nodes);

    sol.times.resize(time_samples);
    sol.positions.resize(time_samples);
    sol.velocities.resize(time_samples);
    for (std::size_t k = 0; k < time_samples; ++k) {
        const double t = period * detail::grid_point(k, time_samples);
        const double s = k == 0 ? 0.0 : detail::invert_increasing(f, df, table, guess, t);
        sol.times[k] = t;
        sol.positions[k] = k == 0 ? q[0] : curve.value(s);
        sol.velocities[k] = velocity_on_shell(cfg, e, sol.positions[k], curve.derivative(s));
    }
    return sol;
}

/// max_k |m c^2 / sqrt(1 - |v_k|^2/c^2) - V(x_k) - (h + m c^2)| / (h + m c^2)
inline double energy_law_residual(const PeriodicSolution& sol, const PotentialConfig& cfg, EnergyLevel e) {
    const double m = cfg.mass(), c = cfg.light_speed();
    const double target = e.relativistic(cfg);
    double worst = 0.0;
    for (std::size_t k = 0; k < sol.size(); ++k) {
        const double beta2 = norm2(sol.velocities[k]) / (c * c);
        if (!(beta2 < 1.0)) return std::numeric_limits<double>::infinity();
        const double lhs = m * c * c / std::sqrt(1.0 - beta2) - eval_V(cfg, sol.positions[k]);
        worst = std::max(worst, std::abs(lhs - target) / std::abs(target));
    }
    return worst;
}

inline double max_speed_ratio(const PeriodicSolution& sol, const PotentialConfig& cfg) {
    double r = 0.0;
    for (const auto& v : sol.velocities) r = std::max(r, norm(v) / cfg.light_speed());
    return r;
}

/// Inverse of energy_param_to_time: resamples the orbit uniformly in the
/// parameter in which |q'|^2 (Z_h + 2hm) is constant.
inline DiscreteLoop time_to_energy_param(const PeriodicSolution& sol, const PotentialConfig& cfg, EnergyLevel e,
                                         std::size_t out_size = 0) {
    const std::size_t n = sol.size();
    if (n < DiscreteLoop::kMinGridSize) throw InvalidConfig("solution has too few nodes");
    if (out_size == 0) out_size = n;
    const double resid = energy_law_residual(sol, cfg, e);
    if (!(resid <= 1e-6))
        throw EnergyLawViolated("energy law residual " + std::to_string(resid) + " exceeds 1e-6");
    const double m = cfg.mass(), c = cfg.light_speed();
    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double v = eval_V(cfg, sol.positions[k]);
        w[k] = metric_weight(v, e.h, m, c) / (v + e.h + m * c * c);
    }
    // tau = t / T in [0, 1)
    const TrigInterpolant wi(w);
    const double total = wi.mean();
    auto f = [&](double tau) { return wi.integral(tau) / total; };
    auto df = [&](double tau) { return wi.value(tau) / total; };
    std::vector<double> table(n + 1), nodes(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        nodes[k] = detail::grid_point(k, n);
        table[k] = k == n ? 1.0 : f(nodes[k]);
        if (k > 0 && !(table[k] > table[k - 1])) throw NonMonotoneTime("energy parameter is not increasing");
    }
    const detail::MonotoneCubic guess(table, nodes);
    const CurveInterpolant orbit(sol.positions);
    std::vector<Vec2> q(out_size);
    for (std::size_t j = 0; j < out_size; ++j) {
        const double tau = j == 0 ? 0.0 : detail::invert_increasing(f, df, table, guess, detail::grid_point(j, out_size));
        q[j] = j == 0 ? sol.positions[0] : orbit.value(tau);
    }
    return DiscreteLoop(std::move(q));
}

/// Relative spread (max - min) / mean of |q'|^2 (Z_h + 2hm) / 2 using
/// spectral derivatives.
inline double constancy_spread(const DiscreteLoop& q, const PotentialConfig& cfg, EnergyLevel e) {
    const std::size_t n = q.size();
    const CurveInterpolant curve(q.samples());
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double g = detail::weight_at(cfg, e, q[j], j);
        const double val = 0.5 * norm2(curve.derivative(detail::grid_point(j, n))) * g;
        lo = std::min(lo, val);
        hi = std::max(hi, val);
        sum += val;
    }
    return (hi - lo) / (sum / static_cast<double>(n));
}

/// Max-norm residual of d/dt (m v / sqrt(1 - |v|^2/c^2)) = grad V(x), with
/// the time derivative from fourth-order central differences.
inline double ode_residual(const PeriodicSolution& sol, const PotentialConfig& cfg) {
    const std::size_t n = sol.size();
    if (n < 5) throw InvalidConfig("need at least 5 time nodes");
    const double m = cfg.mass(), c = cfg.light_speed();
    std::vector<Vec2> p(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double beta2 = norm2(sol.velocities[k]) / (c * c);
        p[k] = sol.velocities[k] * (m / std::sqrt(1.0 - beta2));
    }
    const double dt = sol.period / static_cast<double>(n);
    auto at = [&](std::ptrdiff_t k) -> const Vec2& {
        const auto nn = static_cast<std::ptrdiff_t>(n);
        return p[static_cast<std::size_t>(((k % nn) + nn) % nn)];
    };
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto kk = static_cast<std::ptrdiff_t>(k);
        const Vec2 dp = (at(kk - 2) - at(kk - 1) * 8.0 + at(kk + 1) * 8.0 - at(kk + 2)) / (12.0 * dt);
        worst = std::max(worst, norm(dp - grad_V(cfg, sol.positions[k])));
    }
    return worst;
}

}  // namespace relmaup
