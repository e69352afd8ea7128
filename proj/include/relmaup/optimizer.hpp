#pragma once

// Minimization of the discrete Maupertuis functional over loops in a fixed
// free homotopy class, keeping every sample at distance >= epsilon from the
// centers.
//
// Descent direction: limited-memory BFGS whose starting inverse Hessian is a
// multiple of B^-1, B = N * (cyclic second difference) + I / N, so that
// high-frequency modes do not force tiny steps. Trial steps are backtracked
// until the Armijo condition holds; one that changes the homotopy word is
// rejected and halved.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relmaup/errors.hpp"
#include "relmaup/fourier.hpp"
#include "relmaup/homotopy.hpp"
#include "relmaup/loopspace.hpp"
#include "relmaup/potentials.hpp"
#include "relmaup/vec2.hpp"

namespace relmaup {

struct StepRule {
    double initial_step = 1.0;  // multiple of 1 / (2 * potential_part)
    double shrink = 0.5;
    double armijo = 1e-4;
};

struct SolveSettings {
    double epsilon = 1e-2;
    NormChoice norm_choice = NormChoice::sup_distance;
    std::size_t max_iterations = 20000;
    double gradient_tolerance = 1e-8;           // relative to the initial gradient norm
    double absolute_gradient_tolerance = 0.0;   // 0 disables
    StepRule step_rule{};
    std::vector<std::size_t> refinement_schedule{256};
    double push_off_lambda = 1.5;
    std::size_t stagnation_window = 20;
    double stagnation_tolerance = 1e-12;

    void validate() const {
        if (!(epsilon > 0.0)) throw InvalidConfig("epsilon must be > 0");
        if (!(gradient_tolerance > 0.0)) throw InvalidConfig("gradient_tolerance must be > 0");
        if (!(absolute_gradient_tolerance >= 0.0))
            throw InvalidConfig("absolute_gradient_tolerance must be >= 0");
        if (!(stagnation_tolerance > 0.0)) throw InvalidConfig("stagnation_tolerance must be > 0");
        if (max_iterations == 0) throw InvalidConfig("max_iterations must be > 0");
        if (!(step_rule.initial_step > 0.0)) throw InvalidConfig("initial_step must be > 0");
        if (!(step_rule.shrink > 0.0 && step_rule.shrink < 1.0))
            throw InvalidConfig("shrink factor must lie in (0, 1)");
        if (!(step_rule.armijo > 0.0 && step_rule.armijo < 1.0))
            throw InvalidConfig("Armijo constant must lie in (0, 1)");
        if (!(push_off_lambda > 1.0 && push_off_lambda <= 2.0))
            throw InvalidConfig("push_off_lambda must lie in (1, 2]");
        if (refinement_schedule.empty()) throw InvalidConfig("refinement_schedule is empty");
        for (std::size_t i = 0; i < refinement_schedule.size(); ++i) {
            if (refinement_schedule[i] < DiscreteLoop::kMinGridSize)
                throw InvalidConfig("grid sizes must be >= " + std::to_string(DiscreteLoop::kMinGridSize));
            if (i > 0 && refinement_schedule[i] <= refinement_schedule[i - 1])
                throw InvalidConfig("grid sizes must be strictly increasing");
        }
    }
};

struct IterationRecord {
    std::size_t grid_size = 0;
    std::size_t iteration = 0;
    double value = 0.0;
    double gradient_norm = 0.0;
    double min_margin = 0.0;
};

struct GridStage {
    std::size_t grid_size = 0;
    double maupertuis_value = 0.0;
    double gradient_norm = 0.0;
    std::size_t iterations = 0;
    std::string stop_reason;
};

struct SolveResult {
    DiscreteLoop minimizer;
    double maupertuis_value = 0.0;
    double gradient_norm = 0.0;
    double initial_gradient_norm = 0.0;
    std::size_t iterations = 0;
    HomotopyWord class_certificate;
    std::vector<double> margin_report;
    bool converged = false;
    std::string stop_reason;
    std::size_t push_offs = 0;
    std::size_t rejected_class_steps = 0;
    std::size_t poincare_violations = 0;
    std::size_t coercivity_violations = 0;
    std::vector<GridStage> stages;
    std::vector<IterationRecord> log;
};

/// Raised after max_iterations; carries the last iterate.
class NotConverged : public Error {
public:
    NotConverged(const std::string& what, SolveResult partial)
        : Error("NotConverged: " + what), partial_(std::move(partial)) {}
    const SolveResult& partial() const { return partial_; }

private:
    SolveResult partial_;
};

struct PoincareCheck {
    double lhs = 0.0;  // max_j |u_j|
    double rhs = 0.0;  // R + sqrt(kinetic)
    bool holds = false;
};

inline PoincareCheck poincare_bound_check(const DiscreteLoop& u, const PotentialConfig& cfg) {
    PoincareCheck p;
    for (const auto& x : u) p.lhs = std::max(p.lhs, norm(x));
    p.rhs = cfg.max_center_norm() + std::sqrt(kinetic_integral(u));
    p.holds = p.lhs <= p.rhs;
    return p;
}

namespace detail {

/// Solves (N * L + I / N) x = r for the cyclic second-difference matrix L,
/// i.e. diagonal 2N + 1/N and off-diagonals (including corners) -N.
class H1Preconditioner {
public:
    explicit H1Preconditioner(std::size_t n) : n_(n) {
        const double nd = static_cast<double>(n);
        diag_ = 2.0 * nd + 1.0 / nd;
        off_ = -nd;
        // Sherman-Morrison split of the cyclic corners
        gamma_ = -diag_;
        std::vector<double> u(n, 0.0);
        u[0] = gamma_;
        u[n - 1] = off_;
        z_ = tridiag(u);
    }

    std::vector<double> solve(const std::vector<double>& r) const {
        auto x = tridiag(r);
        const double fact = (x[0] + off_ * x[n_ - 1] / gamma_) / (1.0 + z_[0] + off_ * z_[n_ - 1] / gamma_);
        for (std::size_t j = 0; j < n_; ++j) x[j] -= fact * z_[j];
        return x;
    }

    std::vector<Vec2> solve(const std::vector<Vec2>& r) const {
        std::vector<double> a(n_), b(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            a[j] = r[j].x;
            b[j] = r[j].y;
        }
        const auto xa = solve(a);
        const auto xb = solve(b);
        std::vector<Vec2> out(n_);
        for (std::size_t j = 0; j < n_; ++j) out[j] = {xa[j], xb[j]};
        return out;
    }

    /// <s, B s>
    double energy(const std::vector<Vec2>& s) const {
        double acc = 0.0;
        const double nd = static_cast<double>(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            acc += norm2(s[(j + 1) % n_] - s[j]) * nd + norm2(s[j]) / nd;
        }
        return acc;
    }

private:
    // Thomas algorithm with the first and last diagonal entries modified.
    std::vector<double> tridiag(const std::vector<double>& r) const {
        const std::size_t n = n_;
        std::vector<double> c(n), x(n);
        auto diag_at = [&](std::size_t j) {
            if (j == 0) return diag_ - gamma_;
            if (j == n - 1) return diag_ - off_ * off_ / gamma_;
            return diag_;
        };
        double beta = diag_at(0);
        x[0] = r[0] / beta;
        for (std::size_t j = 1; j < n; ++j) {
            c[j] = off_ / beta;
            beta = diag_at(j) - off_ * c[j];
            x[j] = (r[j] - off_ * x[j - 1]) / beta;
        }
        for (std::size_t j = n - 1; j-- > 0;) x[j] -= c[j + 1] * x[j + 1];
        return x;
    }

    std::size_t n_;
    double diag_ = 0.0, off_ = 0.0, gamma_ = 0.0;
    std::vector<double> z_;
};

inline double grid_norm(const std::vector<Vec2>& g) {
    double acc = 0.0;
    for (const auto& v : g) acc += norm2(v);
    return std::sqrt(static_cast<double>(g.size()) * acc);
}

inline double inner(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += dot(a[j], b[j]);
    return acc;
}

inline void validate_problem(const PotentialConfig& cfg, EnergyLevel e, const HomotopyWord& word) {
    if (!(e.h > 0.0)) throw InvalidEnergy("h must be > 0, got " + std::to_string(e.h));
    if (!(cfg.alpha() > 1.0))
        throw InvalidExponent("alpha must be > 1 (strong force), got " + std::to_string(cfg.alpha()));
    if (word.empty()) throw InvalidWord("the homotopy class must be non-trivial");
    if (word.max_generator() > cfg.size())
        throw InvalidWord("word uses a generator beyond the " + std::to_string(cfg.size()) + " centers");
}

/// Resamples a polyline uniformly by arclength, starting offset * spacing
/// past its first vertex.
inline std::vector<Vec2> resample_by_arclength(const std::vector<Vec2>& path, std::size_t n,
                                               double offset) {
    const std::size_t m = path.size();
    std::vector<double> cum(m + 1, 0.0);
    for (std::size_t j = 0; j < m; ++j) cum[j + 1] = cum[j] + norm(path[(j + 1) % m] - path[j]);
    const double total = cum[m];
    std::vector<Vec2> out(n);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double target = total * (static_cast<double>(k) + offset) / static_cast<double>(n);
        while (seg + 1 < m && cum[seg + 1] < target) ++seg;
        const double len = cum[seg + 1] - cum[seg];
        const double t = len > 0.0 ? (target - cum[seg]) / len : 0.0;
        out[k] = path[seg] + (path[(seg + 1) % m] - path[seg]) * t;
    }
    return out;
}

inline void append_segment(std::vector<Vec2>& path, const Vec2& a, const Vec2& b, std::size_t pieces) {
    for (std::size_t k = 0; k < pieces; ++k)
        path.push_back(a + (b - a) * (static_cast<double>(k) / static_cast<double>(pieces)));
}

inline void append_circle(std::vector<Vec2>& path, const Vec2& center, double radius,
                          double phase, int sense, std::size_t pieces) {
    for (std::size_t k = 0; k < pieces; ++k) {
        const double th = phase + sense * 2.0 * std::numbers::pi * static_cast<double>(k) /
                                      static_cast<double>(pieces);
        path.push_back(center + Vec2{radius * std::cos(th), radius * std::sin(th)});
    }
}

}  // namespace detail

/// Initial loop realizing the word. One center: a circle of radius
/// max(2 eps, 1) traversed k times. Several centers: lassos from a common
/// basepoint, each a straight connector, a full circle about the center of
/// the letter (counter-clockwise for a positive letter) and the connector
/// back. Certified with homotopy_word before return.
inline DiscreteLoop seed_loop(const PotentialConfig& cfg, const HomotopyWord& word, double epsilon,
                              std::size_t grid_size) {
    if (word.empty()) throw InvalidWord("cannot seed the trivial class");
    if (word.max_generator() > cfg.size()) throw InvalidWord("word uses an unknown generator");
    if (!(epsilon > 0.0)) throw InvalidConfig("epsilon must be > 0");
    const auto& centers = cfg.centers();
    const CutSystem cuts = CutSystem::build(cfg);

    auto certify = [&](const DiscreteLoop& loop, double radius_floor) -> bool {
        if (min_distance_to_centers(loop, cfg) < radius_floor) return false;
        try {
            return same_class(homotopy_word(loop, cuts), word);
        } catch (const Error&) {
            return false;
        }
    };

    if (cfg.size() == 1) {
        const auto core = word.cyclically_reduced();
        const int turns = static_cast<int>(word.winding_vector(1)[0]);
        if (core.size() != static_cast<std::size_t>(std::abs(turns)) || turns == 0)
            throw SeedConstructionFailed("word is not a power of a1");
        const double radius = std::max(2.0 * epsilon, 1.0);
        for (double phase : {0.1, 0.1 + std::numbers::pi / static_cast<double>(grid_size)}) {
            auto loop = DiscreteLoop::circle(centers[0], radius, grid_size, turns, phase);
            if (certify(loop, epsilon)) return loop;
        }
        throw SeedConstructionFailed("circle seed could not be certified");
    }

    const double gap = cfg.min_center_gap();
    if (4.0 * epsilon >= gap)
        throw SeedConstructionFailed("margin disks of radius 2 eps overlap; reduce epsilon below " +
                                     std::to_string(gap / 4.0));
    const double radius = std::max(2.0 * epsilon, 0.3 * gap);

    Vec2 centroid{};
    for (const auto& s : centers) centroid += s;
    centroid /= static_cast<double>(centers.size());

    std::vector<Vec2> bases{centroid};
    const double spread = cfg.max_center_norm() + norm(centroid) + gap;
    for (double scale : {0.25, 0.5, 1.0, 1.5}) {
        for (int k = 0; k < 16; ++k) {
            const double th = 2.0 * std::numbers::pi * (k + 0.37) / 16.0;
            bases.push_back(centroid + Vec2{std::cos(th), std::sin(th)} * (scale * spread));
        }
    }

    const auto& letters = word.letters();
    for (const auto& b : bases) {
        bool outside = true;
        for (const auto& s : centers) outside = outside && norm(b - s) > radius + epsilon;
        if (!outside) continue;
        std::vector<Vec2> path;
        for (int l : letters) {
            const Vec2& s = centers[static_cast<std::size_t>(std::abs(l)) - 1];
            const Vec2 dir = (b - s) / norm(b - s);
            const Vec2 p = s + dir * radius;
            const double phase = std::atan2(dir.y, dir.x);
            detail::append_segment(path, b, p, 64);
            detail::append_circle(path, s, radius, phase, l > 0 ? 1 : -1, 256);
            detail::append_segment(path, p, b, 64);
        }
        for (double offset : {0.5, 0.25, 0.75}) {
            DiscreteLoop loop(detail::resample_by_arclength(path, grid_size, offset));
            if (certify(loop, epsilon)) return loop;
        }
    }
    throw SeedConstructionFailed("no basepoint produced a certified seed for " + word.to_string());
}

/// Upsamples a loop by trigonometric interpolation, falling back to midpoint
/// insertion when the smooth interpolant leaves the class or the margin.
inline DiscreteLoop refine_loop(const DiscreteLoop& u, std::size_t new_size, const PotentialConfig& cfg,
                                const CutSystem& cuts, const HomotopyWord& word, double epsilon) {
    auto ok = [&](const DiscreteLoop& v) {
        if (min_distance_to_centers(v, cfg) < epsilon) return false;
        try {
            return same_class(homotopy_word(v, cuts), word);
        } catch (const Error&) {
            return false;
        }
    };
    const CurveInterpolant interp(u.samples());
    std::vector<Vec2> s(new_size);
    for (std::size_t j = 0; j < new_size; ++j)
        s[j] = interp.value(static_cast<double>(j) / static_cast<double>(new_size));
    DiscreteLoop smooth(std::move(s));
    if (ok(smooth)) return smooth;

    // piecewise-linear resampling of the polyline
    std::vector<Vec2> lin(new_size);
    const double n = static_cast<double>(u.size());
    for (std::size_t j = 0; j < new_size; ++j) {
        const double pos = n * static_cast<double>(j) / static_cast<double>(new_size);
        const auto i = static_cast<std::size_t>(pos);
        const double t = pos - static_cast<double>(i);
        lin[j] = u[i] + (u.at_wrapped(static_cast<std::ptrdiff_t>(i) + 1) - u[i]) * t;
    }
    DiscreteLoop linear(std::move(lin));
    if (ok(linear)) return linear;
    throw ClassEscape("refinement to " + std::to_string(new_size) + " samples left the class");
}

namespace detail {

struct StageOutcome {
    DiscreteLoop loop;
    double value = 0.0;
    double gradient_norm = 0.0;
    double initial_gradient_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::string stop_reason;
};

class Minimizer {
public:
    Minimizer(const PotentialConfig& cfg, EnergyLevel e, const HomotopyWord& word,
              const SolveSettings& st, const CutSystem& cuts, SolveResult& out,
              const std::function<void(const IterationRecord&)>& on_iteration)
        : cfg_(cfg), e_(e), word_(word), st_(st), cuts_(cuts), out_(out), on_iteration_(on_iteration) {}

    StageOutcome run(DiscreteLoop u, std::size_t iteration_budget, double g_target_abs) {
        const std::size_t n = u.size();
        const H1Preconditioner pre(n);
        memory_.clear();
        project_margin(u);

        auto ev = maupertuis_with_gradient(u, cfg_, e_);
        auto pg = projected(u, ev.gradient);
        double gnorm = grid_norm(pg);
        StageOutcome res{u, ev.report.maupertuis, gnorm, gnorm, 0, false, ""};
        const double target = std::max(st_.gradient_tolerance * gnorm, g_target_abs);

        // accepted changes of M, each evaluated without cancellation
        std::vector<double> decrease;
        double step_scale = st_.step_rule.initial_step / (2.0 * ev.report.potential_part);
        double bb = 0.0;
        bool have_bb = false;
        std::vector<Vec2> prev_u, prev_g;

        for (std::size_t it = 0;; ++it) {
            sanity_checks(u, ev.report);
            record(n, it, ev.report.maupertuis, gnorm, u);
            if (gnorm < target) return finish(res, u, ev, gnorm, it, true, "gradient_tolerance");
            if (decrease.size() >= st_.stagnation_window) {
                double drop = 0.0;
                for (std::size_t k = decrease.size() - st_.stagnation_window; k < decrease.size(); ++k)
                    drop -= decrease[k];
                if (drop <= st_.stagnation_tolerance * std::abs(ev.report.maupertuis))
                    return finish(res, u, ev, gnorm, it, true, "stagnation");
            }
            if (it >= iteration_budget) return finish(res, u, ev, gnorm, it, false, "max_iterations");

            auto d = direction(pre, pg);
            double slope = inner(pg, d);
            if (!(slope < 0.0) && !memory_.empty()) {
                memory_.clear();
                d = direction(pre, pg);
                slope = inner(pg, d);
            }
            if (!(slope < 0.0)) return finish(res, u, ev, gnorm, it, true, "stagnation");

            double step = !memory_.empty() ? 1.0 : (have_bb ? bb : step_scale);
            // keep each sample's move well inside its distance to the centers
            double dmax = 0.0;
            for (const auto& v : d) dmax = std::max(dmax, norm(v));
            const double room = 0.25 * min_distance_to_centers(u, cfg_);
            if (dmax * step > room) step = room / dmax;

            bool accepted = false;
            bool only_class_failures = true;
            DiscreteLoop trial;
            MaupertuisEvaluation tev;
            double change = 0.0;
            for (int attempt = 0; attempt < 80; ++attempt, step *= st_.step_rule.shrink) {
                std::vector<Vec2> s(n);
                for (std::size_t j = 0; j < n; ++j) s[j] = u[j] + d[j] * step;
                trial = DiscreteLoop(std::move(s));
                project_margin(trial);
                if (st_.norm_choice == NormChoice::h1_distance && !h1_margin_ok(trial)) {
                    only_class_failures = false;
                    continue;
                }
                try {
                    if (!same_class(homotopy_word(trial, cuts_), word_)) {
                        ++out_.rejected_class_steps;
                        continue;
                    }
                    tev = maupertuis_with_gradient(trial, cfg_, e_);
                    change = maupertuis_difference(u, trial, cfg_, e_);
                } catch (const Error&) {
                    // collision, Hill-region exit or a sample on a cut ray
                    ++out_.rejected_class_steps;
                    continue;
                }
                only_class_failures = false;
                double moved = 0.0;
                for (std::size_t j = 0; j < n; ++j) moved += dot(ev.gradient[j], trial[j] - u[j]);
                if (change <= st_.step_rule.armijo * std::min(moved, 0.0) && change <= 0.0 &&
                    tev.report.maupertuis <= ev.report.maupertuis) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (only_class_failures)
                    throw ClassEscape("every trial step left the homotopy class of " + word_.to_string());
                return finish(res, u, ev, gnorm, it, true, "stagnation");
            }

            prev_u.assign(u.begin(), u.end());
            prev_g = pg;
            u = std::move(trial);
            ev = std::move(tev);
            pg = projected(u, ev.gradient);
            gnorm = grid_norm(pg);

            std::vector<Vec2> sdiff(n), ydiff(n);
            for (std::size_t j = 0; j < n; ++j) {
                sdiff[j] = u[j] - prev_u[j];
                ydiff[j] = pg[j] - prev_g[j];
            }
            const double sy = inner(sdiff, ydiff);
            have_bb = sy > 0.0;
            if (have_bb) bb = pre.energy(sdiff) / sy;
            if (sy > 1e-12 * std::sqrt(inner(sdiff, sdiff) * inner(ydiff, ydiff)) && !any_active(u)) {
                memory_.push_back({std::move(sdiff), std::move(ydiff), 1.0 / sy});
                if (memory_.size() > kMemory) memory_.erase(memory_.begin());
            } else {
                memory_.clear();
            }
            decrease.push_back(change);

            const double before = ev.report.maupertuis;
            if (try_push_off(u, ev)) {
                pg = projected(u, ev.gradient);
                gnorm = grid_norm(pg);
                have_bb = false;
                memory_.clear();
                decrease.back() += ev.report.maupertuis - before;
            }
        }
    }

private:
    static constexpr std::size_t kMemory = 8;

    struct Pair {
        std::vector<Vec2> s, y;
        double rho;
    };

    // Two-loop L-BFGS recursion with B^-1, scaled by s'y / y'B^-1 y, as the
    // initial inverse Hessian; plain -B^-1 g when the memory is empty.
    std::vector<Vec2> direction(const H1Preconditioner& pre, const std::vector<Vec2>& g) const {
        std::vector<Vec2> q = g;
        std::vector<double> alpha(memory_.size());
        for (std::size_t i = memory_.size(); i-- > 0;) {
            alpha[i] = memory_[i].rho * inner(memory_[i].s, q);
            for (std::size_t j = 0; j < q.size(); ++j) q[j] -= memory_[i].y[j] * alpha[i];
        }
        auto r = pre.solve(q);
        if (!memory_.empty()) {
            const auto& last = memory_.back();
            const double gamma = 1.0 / (last.rho * inner(last.y, pre.solve(last.y)));
            for (auto& v : r) v *= gamma;
        }
        for (std::size_t i = 0; i < memory_.size(); ++i) {
            const double beta = memory_[i].rho * inner(memory_[i].y, r);
            for (std::size_t j = 0; j < r.size(); ++j) r[j] += memory_[i].s[j] * (alpha[i] - beta);
        }
        for (auto& v : r) v = -v;
        return r;
    }

    bool any_active(const DiscreteLoop& u) const {
        if (st_.norm_choice != NormChoice::sup_distance) return false;
        return min_distance_to_centers(u, cfg_) <= st_.epsilon * (1.0 + 1e-9);
    }

    StageOutcome finish(StageOutcome& res, const DiscreteLoop& u, const MaupertuisEvaluation& ev,
                        double gnorm, std::size_t it, bool converged, const char* why) {
        res.loop = u;
        res.value = ev.report.maupertuis;
        res.gradient_norm = gnorm;
        res.iterations = it;
        res.converged = converged;
        res.stop_reason = why;
        return res;
    }

    void record(std::size_t n, std::size_t it, double value, double gnorm, const DiscreteLoop& u) {
        IterationRecord r{n, it, value, gnorm, min_distance_to_centers(u, cfg_)};
        out_.log.push_back(r);
        if (on_iteration_) on_iteration_(r);
    }

    void sanity_checks(const DiscreteLoop& u, const FunctionalReport& rep) {
        if (!poincare_bound_check(u, cfg_).holds) ++out_.poincare_violations;
        const double floor = 2.0 * e_.h * cfg_.mass() * rep.kinetic;
        if (!(rep.maupertuis >= floor * (1.0 - 1e-14)) || !(rep.maupertuis > 0.0)) ++out_.coercivity_violations;
    }

    // Samples inside an epsilon disk are moved radially onto its boundary.
    void project_margin(DiscreteLoop& u) const {
        if (st_.norm_choice != NormChoice::sup_distance) return;
        for (std::size_t j = 0; j < u.size(); ++j)
            for (const auto& s : cfg_.centers()) {
                const Vec2 d = u[j] - s;
                const double r = norm(d);
                if (r < st_.epsilon && r > 0.0) u[j] = s + d * (st_.epsilon / r);
            }
    }

    bool h1_margin_ok(const DiscreteLoop& u) const {
        for (const auto& s : cfg_.centers())
            if (h1_norm_to_center(u, s) < st_.epsilon) return false;
        return min_distance_to_centers(u, cfg_) > 0.0;
    }

    // Drops the inward normal component at samples on an active margin circle.
    std::vector<Vec2> projected(const DiscreteLoop& u, std::vector<Vec2> g) const {
        if (st_.norm_choice != NormChoice::sup_distance) return g;
        const double active = st_.epsilon * (1.0 + 1e-9);
        for (std::size_t j = 0; j < u.size(); ++j)
            for (const auto& s : cfg_.centers()) {
                const Vec2 d = u[j] - s;
                const double r = norm(d);
                if (r > active) continue;
                const Vec2 nrm = d / r;
                const double gn = dot(g[j], nrm);
                // descent along -g would push the sample inward
                if (gn > 0.0) g[j] -= nrm * gn;
            }
        return g;
    }

    bool try_push_off(DiscreteLoop& u, MaupertuisEvaluation& ev) {
        bool changed = false;
        const double lambda = st_.push_off_lambda;
        for (std::size_t i = 0; i < cfg_.size(); ++i) {
            const double dist = distance_to_center(u, cfg_.centers()[i], st_.norm_choice);
            if (!(dist < lambda * st_.epsilon)) continue;
            try {
                auto cand = push_off(u, cfg_, i, st_.epsilon, lambda, st_.norm_choice);
                if (!same_class(homotopy_word(cand, cuts_), word_)) continue;
                auto cev = maupertuis_with_gradient(cand, cfg_, e_);
                if (cev.report.maupertuis > ev.report.maupertuis) continue;
                u = std::move(cand);
                ev = std::move(cev);
                ++out_.push_offs;
                changed = true;
            } catch (const Error&) {
            }
        }
        return changed;
    }

    const PotentialConfig& cfg_;
    EnergyLevel e_;
    const HomotopyWord& word_;
    const SolveSettings& st_;
    const CutSystem& cuts_;
    SolveResult& out_;
    const std::function<void(const IterationRecord&)>& on_iteration_;
    std::vector<Pair> memory_;
};

}  // namespace detail

/// Minimizes over the class of word, starting from initial when given and
/// from seed_loop otherwise, through every grid of the refinement schedule.
inline SolveResult minimize_in_class(const PotentialConfig& cfg, EnergyLevel e, const HomotopyWord& word,
                                     const SolveSettings& settings,
                                     std::optional<DiscreteLoop> initial = std::nullopt,
                                     const std::function<void(const IterationRecord&)>& on_iteration = {}) {
    settings.validate();
    detail::validate_problem(cfg, e, word);
    const CutSystem cuts = CutSystem::build(cfg);

    DiscreteLoop u = initial ? *initial : seed_loop(cfg, word, settings.epsilon, settings.refinement_schedule.front());
    if (kinetic_integral(u) == 0.0) throw DegenerateLoop("constant loops are not admissible");
    if (!same_class(homotopy_word(u, cuts), word))
        throw ClassEscape("initial loop is not in the class of " + word.to_string());

    SolveResult out;
    std::size_t budget = settings.max_iterations;
    detail::Minimizer engine(cfg, e, word, settings, cuts, out, on_iteration);
    for (std::size_t stage = 0; stage < settings.refinement_schedule.size(); ++stage) {
        const std::size_t n = settings.refinement_schedule[stage];
        if (u.size() != n) u = refine_loop(u, n, cfg, cuts, word, settings.epsilon);
        auto res = engine.run(u, budget, settings.absolute_gradient_tolerance);
        if (stage == 0) out.initial_gradient_norm = res.initial_gradient_norm;
        out.stages.push_back({n, res.value, res.gradient_norm, res.iterations, res.stop_reason});
        out.iterations += res.iterations;
        budget -= std::min(budget, res.iterations);
        u = std::move(res.loop);
        out.minimizer = u;
        out.maupertuis_value = res.value;
        out.gradient_norm = res.gradient_norm;
        out.converged = res.converged;
        out.stop_reason = res.stop_reason;
        if (!res.converged) break;
    }
    out.class_certificate = homotopy_word(out.minimizer, cuts);
    out.margin_report.clear();
    for (const auto& s : cfg.centers()) out.margin_report.push_back(sup_distance_to_center(out.minimizer, s).min);
    if (!out.converged)
        throw NotConverged("no convergence within " + std::to_string(settings.max_iterations) + " iterations",
                           std::move(out));
    return out;
}

}  // namespace relmaup
