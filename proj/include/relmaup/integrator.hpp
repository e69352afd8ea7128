#pragma once

// Forward integration of the relativistic Hamiltonian system
//   x' = c p / sqrt(m^2 c^2 + |p|^2),   p' = grad V(x),
//   H(x, p) = m c^2 sqrt(1 + |p|^2 / (m c)^2) - V(x).
// Stepper: Dormand-Prince 5(4) with the standard FSAL tableau, PI step-size
// control and fourth-order continuous extension (Hairer, Norsett, Wanner,
// Solving ODEs I, sec. II.5/II.6).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "relmaup/errors.hpp"
#include "relmaup/potentials.hpp"
#include "relmaup/vec2.hpp"

namespace relmaup {

struct PhaseState {
    Vec2 x;
    Vec2 p;
};

inline Vec2 velocity_from_momentum(const PotentialConfig& cfg, const Vec2& p) {
    const double m = cfg.mass(), c = cfg.light_speed();
    return p / (m * std::sqrt(1.0 + norm2(p) / (m * m * c * c)));
}

inline Vec2 momentum_from_velocity(const PotentialConfig& cfg, const Vec2& v) {
    const double c = cfg.light_speed();
    const double beta2 = norm2(v) / (c * c);
    if (!(beta2 < 1.0)) throw SuperluminalInput("|v| must be < c");
    return v * (cfg.mass() / std::sqrt(1.0 - beta2));
}

inline double hamiltonian(const PotentialConfig& cfg, const PhaseState& s) {
    const double m = cfg.mass(), c = cfg.light_speed();
    return m * c * c * std::sqrt(1.0 + norm2(s.p) / (m * m * c * c)) - eval_V(cfg, s.x);
}

/// <x, J p> with J = [[0, 1], [-1, 0]], i.e. x_1 p_2 - x_2 p_1.
inline double angular_momentum(const PhaseState& s) { return cross(s.x, s.p); }

struct IntegratorTolerances {
    double rtol = 1e-11;
    double atol = 1e-11;
    double initial_step = 0.0;       // 0 picks one automatically
    double min_step = 1e-14;         // relative to t_end
    std::size_t max_steps = 10'000'000;
    double collision_epsilon = 1e-8;  // halt when closer than this to a center
};

enum class IntegrationStatus { completed, collision_approach, step_underflow };

inline const char* to_string(IntegrationStatus s) {
    switch (s) {
        case IntegrationStatus::completed: return "completed";
        case IntegrationStatus::collision_approach: return "CollisionApproach";
        case IntegrationStatus::step_underflow: return "StepUnderflow";
    }
    return "unknown";
}

struct TrajectorySample {
    double t = 0.0;
    PhaseState state;
    double energy = 0.0;
    double angular_momentum = 0.0;
};

struct IntegrationResult {
    std::vector<TrajectorySample> samples;  // every accepted step
    std::vector<double> energy_drift;       // (H - H0) / |H0| per sample
    std::vector<double> angular_momentum_drift;
    IntegrationStatus status = IntegrationStatus::completed;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    double min_center_distance = std::numeric_limits<double>::infinity();

    const PhaseState& final_state() const { return samples.back().state; }
    double max_energy_drift() const {
        double d = 0.0;
        for (double v : energy_drift) d = std::max(d, std::abs(v));
        return d;
    }
    /// Drift of L relative to max(|L0|, 1e-300).
    double max_angular_momentum_drift() const {
        double d = 0.0;
        for (double v : angular_momentum_drift) d = std::max(d, std::abs(v));
        return d;
    }
    bool ok() const { return status == IntegrationStatus::completed; }
};

namespace detail {

using State4 = std::array<double, 4>;

inline State4 pack(const PhaseState& s) { return {s.x.x, s.x.y, s.p.x, s.p.y}; }
inline PhaseState unpack(const State4& y) { return {{y[0], y[1]}, {y[2], y[3]}}; }

inline State4 rhs(const PotentialConfig& cfg, const State4& y) {
    const double m = cfg.mass(), c = cfg.light_speed();
    const Vec2 p{y[2], y[3]};
    const double k = c / std::sqrt(m * m * c * c + norm2(p));
    const Vec2 g = grad_V(cfg, {y[0], y[1]});
    return {k * p.x, k * p.y, g.x, g.y};
}

inline double min_distance(const PotentialConfig& cfg, const Vec2& x) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& s : cfg.centers()) d = std::min(d, norm(x - s));
    return d;
}

// Dormand-Prince 5(4) coefficients.
namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// error weights: fifth-order minus embedded fourth-order solution
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// continuous extension
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dp

struct DenseSegment {
    double t0 = 0.0, h = 0.0;
    std::array<State4, 5> r{};

    State4 eval(double t) const {
        const double s = (t - t0) / h;
        const double s1 = 1.0 - s;
        State4 y{};
        for (int i = 0; i < 4; ++i)
            y[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        return y;
    }
};

}  // namespace detail

/// Adaptive integrator that keeps the last step's dense output.
class Dopri5 {
public:
    Dopri5(const PotentialConfig& cfg, IntegratorTolerances tol) : cfg_(cfg), tol_(tol) {}

    /// Integrates from (t0, y0) to t_end; the optional observer sees each
    /// accepted step's dense segment.
    template <typename Observer>
    IntegrationResult run(const PhaseState& initial, double t0, double t_end, Observer&& observe) const {
        using namespace detail;
        using namespace detail::dp;
        IntegrationResult res;
        State4 y = pack(initial);
        const double dir = t_end >= t0 ? 1.0 : -1.0;
        const double span = std::abs(t_end - t0);
        const double h0val = hamiltonian(cfg_, initial);
        const double l0 = angular_momentum(initial);
        auto push = [&](double t, const State4& s) {
            const PhaseState ps = unpack(s);
            const double hv = hamiltonian(cfg_, ps);
            const double lv = angular_momentum(ps);
            res.samples.push_back({t, ps, hv, lv});
            res.energy_drift.push_back((hv - h0val) / std::max(std::abs(h0val), 1e-300));
            res.angular_momentum_drift.push_back((lv - l0) / std::max(std::abs(l0), 1e-300));
            res.min_center_distance = std::min(res.min_center_distance, min_distance(cfg_, ps.x));
        };
        push(t0, y);
        if (span == 0.0) return res;
        if (min_distance(cfg_, initial.x) < tol_.collision_epsilon) {
            res.status = IntegrationStatus::collision_approach;
            return res;
        }

        auto err_norm = [&](const State4& y0, const State4& y1, const State4& e) {
            double acc = 0.0;
            for (int i = 0; i < 4; ++i) {
                const double sc = tol_.atol + tol_.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
                acc += (e[i] / sc) * (e[i] / sc);
            }
            return std::sqrt(acc / 4.0);
        };

        State4 k1 = rhs(cfg_, y);
        double h = tol_.initial_step > 0.0 ? tol_.initial_step : initial_step(y, k1, span);
        double t = t0;
        double err_prev = 1e-4;
        const double hmin = tol_.min_step * std::max(span, 1.0);
        std::size_t steps = 0;

        while (dir * (t_end - t) > 0.0) {
            if (++steps > tol_.max_steps) {
                res.status = IntegrationStatus::step_underflow;
                return res;
            }
            if (h > std::abs(t_end - t)) h = std::abs(t_end - t);
            const double hs = dir * h;
            State4 k2, k3, k4, k5, k6, k7, y1, yt, e;
            bool finite = true;
            try {
                for (int i = 0; i < 4; ++i) yt[i] = y[i] + hs * a21 * k1[i];
                k2 = rhs(cfg_, yt);
                for (int i = 0; i < 4; ++i) yt[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
                k3 = rhs(cfg_, yt);
                for (int i = 0; i < 4; ++i) yt[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
                k4 = rhs(cfg_, yt);
                for (int i = 0; i < 4; ++i)
                    yt[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
                k5 = rhs(cfg_, yt);
                for (int i = 0; i < 4; ++i)
                    yt[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
                k6 = rhs(cfg_, yt);
                for (int i = 0; i < 4; ++i)
                    y1[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
                k7 = rhs(cfg_, y1);
                for (int i = 0; i < 4; ++i)
                    e[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                for (int i = 0; i < 4; ++i) finite = finite && std::isfinite(y1[i]) && std::isfinite(e[i]);
            } catch (const CollisionPoint&) {
                finite = false;
            }
            const double err = finite ? err_norm(y, y1, e) : std::numeric_limits<double>::infinity();
            if (err <= 1.0) {
                DenseSegment seg;
                seg.t0 = t;
                seg.h = hs;
                for (int i = 0; i < 4; ++i) {
                    const double dy = y1[i] - y[i];
                    const double bspl = hs * k1[i] - dy;
                    seg.r[0][i] = y[i];
                    seg.r[1][i] = dy;
                    seg.r[2][i] = bspl;
                    seg.r[3][i] = dy - hs * k7[i] - bspl;
                    seg.r[4][i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
                }
                t = (std::abs(t_end - (t + hs)) <= 1e-15 * std::max(span, 1.0)) ? t_end : t + hs;
                y = y1;
                k1 = k7;
                ++res.accepted_steps;
                push(t, y);
                observe(seg);
                if (res.min_center_distance < tol_.collision_epsilon) {
                    res.status = IntegrationStatus::collision_approach;
                    return res;
                }
                // PI controller
                const double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
                h *= std::clamp(fac, 0.2, 10.0);
                err_prev = std::max(err, 1e-4);
            } else {
                ++res.rejected_steps;
                const double fac = finite ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.25;
                h *= fac;
            }
            if (h < hmin) {
                res.status = IntegrationStatus::step_underflow;
                return res;
            }
        }
        return res;
    }

    IntegrationResult run(const PhaseState& initial, double t0, double t_end) const {
        return run(initial, t0, t_end, [](const detail::DenseSegment&) {});
    }

private:
    double initial_step(const detail::State4& y, const detail::State4& f, double span) const {
        double sy = 0.0, sf = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double sc = tol_.atol + tol_.rtol * std::abs(y[i]);
            sy += (y[i] / sc) * (y[i] / sc);
            sf += (f[i] / sc) * (f[i] / sc);
        }
        double h = (sy < 1e-10 || sf < 1e-10) ? 1e-6 : 0.01 * std::sqrt(sy / sf);
        return std::min(h, span);
    }

    const PotentialConfig& cfg_;
    IntegratorTolerances tol_;
};

inline IntegrationResult integrate(const PotentialConfig& cfg, const PhaseState& initial, double t_end,
                                   IntegratorTolerances tol = {}) {
    return Dopri5(cfg, tol).run(initial, 0.0, t_end);
}

/// Integrates to t_end and reports the state exactly at t_end together with
/// the full result.
struct EndpointResult {
    IntegrationResult trajectory;
    PhaseState end;
};

inline EndpointResult integrate_to(const PotentialConfig& cfg, const PhaseState& initial, double t_end,
                                   IntegratorTolerances tol = {}) {
    EndpointResult out{integrate(cfg, initial, t_end, tol), initial};
    out.end = out.trajectory.final_state();
    return out;
}

/// State at each requested time (ascending, within [0, t_end]) using the
/// continuous extension.
inline std::vector<PhaseState> integrate_dense(const PotentialConfig& cfg, const PhaseState& initial,
                                               const std::vector<double>& times, IntegratorTolerances tol,
                                               IntegrationResult* result = nullptr) {
    std::vector<PhaseState> out;
    out.reserve(times.size());
    const double t_end = times.empty() ? 0.0 : times.back();
    std::size_t next = 0;
    while (next < times.size() && times[next] <= 0.0) {
        out.push_back(initial);
        ++next;
    }
    auto res = Dopri5(cfg, tol).run(initial, 0.0, t_end, [&](const detail::DenseSegment& seg) {
        const double t1 = seg.t0 + seg.h;
        while (next < times.size() && times[next] <= t1) {
            out.push_back(detail::unpack(seg.eval(times[next])));
            ++next;
        }
    });
    if (result) *result = std::move(res);
    return out;
}

}  // namespace relmaup
