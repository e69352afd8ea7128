#pragma once

// Job files, the solve pipeline (seed -> minimize -> reparameterize ->
// verify) and the other batch commands. Every run returns its artifacts in
// memory; writing them to disk is left to the caller.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "relmaup/circular.hpp"
#include "relmaup/defaults.hpp"
#include "relmaup/errors.hpp"
#include "relmaup/homotopy.hpp"
#include "relmaup/integrator.hpp"
#include "relmaup/io.hpp"
#include "relmaup/loopspace.hpp"
#include "relmaup/optimizer.hpp"
#include "relmaup/potentials.hpp"
#include "relmaup/reparam.hpp"

namespace relmaup {

using io::json;

struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation;  // value <relation> threshold must hold
    bool pass = false;
};

inline Check check_less(std::string name, double value, double threshold) {
    return {std::move(name), value, threshold, "<", value < threshold};
}

inline Check check_at_least(std::string name, double value, double threshold) {
    return {std::move(name), value, threshold, ">=", value >= threshold};
}

inline Check check_true(std::string name, bool ok) { return {std::move(name), ok ? 1.0 : 0.0, 1.0, "==", ok}; }

inline json to_json(const Check& c) {
    return {{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"relation", c.relation}, {"pass", c.pass}};
}

struct RunOutcome {
    bool passed = false;
    json report;
    json summary = json::object();  // flat key/value row used by sweeps
    std::vector<std::pair<std::string, std::string>> artifacts;
};

inline void finalize(RunOutcome& out, const std::string& command, const std::vector<Check>& checks,
                     const std::string& error = "") {
    json arr = json::array();
    bool ok = error.empty();
    for (const auto& c : checks) {
        arr.push_back(to_json(c));
        ok = ok && c.pass;
    }
    out.passed = ok;
    out.report["command"] = command;
    out.report["passed"] = ok;
    out.report["checks"] = arr;
    if (!error.empty()) out.report["error"] = error;
    out.summary["passed"] = ok;
    out.artifacts.emplace_back("report.json", out.report.dump(2) + "\n");
}

struct JobSpec {
    std::string command;  // solve, integrate, circular, limit, classify, sweep
    json body;
    std::string source = "<job>";
};

namespace detail {

inline const char* const kCommands[] = {"solve", "integrate", "circular", "limit", "classify", "sweep"};

inline ModelConfig model_from_json(const json& j, const std::string& path = "/model") {
    io::require_object(j, path, {"kappa", "alpha", "m", "c"});
    ModelConfig mc{io::number_or(j, "kappa", path, 1.0), io::number(j, "alpha", path), io::number_or(j, "m", path, 1.0),
                   io::number_or(j, "c", path, 1.0)};
    try {
        mc.validate();
    } catch (const InvalidConfig& e) {
        throw InvalidConfig("field " + path + ": " + e.what());
    }
    return mc;
}

struct SolveJob {
    PotentialConfig cfg;
    EnergyLevel e;
    HomotopyWord word;
    SolveSettings settings;
    std::size_t time_samples;
    IntegratorTolerances integrator;
    ToleranceProfile limits;
};

inline SolveJob parse_solve(const json& b, const ToleranceProfile& prof) {
    io::require_object(b, "", {"command", "potential", "h", "word", "settings"});
    SolveJob job{io::potential_from_json(io::field(b, "potential", ""), "/potential"),
                 EnergyLevel{io::number(b, "h", "")},
                 {},
                 solve_settings_from(prof),
                 prof.time_samples,
                 integrator_tolerances_from(prof),
                 prof};
    if (!(job.e.h > 0.0)) throw InvalidEnergy("field /h: h > 0 is required for periodic solutions, got " + io::fmt(job.e.h));
    if (!(job.cfg.alpha() > 1.0))
        throw InvalidExponent("field /potential/alpha: the strong-force requirement alpha > 1 is violated (alpha = " +
                              io::fmt(job.cfg.alpha()) + ")");
    try {
        job.word = HomotopyWord::parse(io::text(b, "word", ""));
    } catch (const InvalidWord& e) {
        throw InvalidWord(std::string("field /word: ") + e.what());
    }
    if (job.word.empty()) throw InvalidWord("field /word: the class must be non-trivial");
    if (job.word.max_generator() > job.cfg.size()) throw InvalidWord("field /word: generator index exceeds the number of centers");

    if (b.contains("settings")) {
        const json& s = b.at("settings");
        const std::string p = "/settings";
        io::require_object(s, p, {"epsilon", "norm", "max_iterations", "gradient_tolerance", "absolute_gradient_tolerance",
                                   "step_rule", "refinement_schedule", "push_off_lambda", "stagnation_window",
                                   "stagnation_tolerance", "time_samples", "checks", "integrator"});
        auto& st = job.settings;
        st.epsilon = io::number_or(s, "epsilon", p, st.epsilon);
        if (s.contains("norm")) {
            const auto n = io::text(s, "norm", p);
            if (n == "sup_distance") st.norm_choice = NormChoice::sup_distance;
            else if (n == "h1_distance") st.norm_choice = NormChoice::h1_distance;
            else throw InvalidConfig("field /settings/norm: expected sup_distance or h1_distance");
        }
        st.max_iterations = io::count_or(s, "max_iterations", p, st.max_iterations);
        st.gradient_tolerance = io::number_or(s, "gradient_tolerance", p, st.gradient_tolerance);
        st.absolute_gradient_tolerance = io::number_or(s, "absolute_gradient_tolerance", p, st.absolute_gradient_tolerance);
        st.push_off_lambda = io::number_or(s, "push_off_lambda", p, st.push_off_lambda);
        st.stagnation_window = io::count_or(s, "stagnation_window", p, st.stagnation_window);
        st.stagnation_tolerance = io::number_or(s, "stagnation_tolerance", p, st.stagnation_tolerance);
        if (s.contains("step_rule")) {
            const json& r = s.at("step_rule");
            const std::string rp = p + "/step_rule";
            io::require_object(r, rp, {"initial_step", "shrink", "armijo"});
            st.step_rule.initial_step = io::number_or(r, "initial_step", rp, st.step_rule.initial_step);
            st.step_rule.shrink = io::number_or(r, "shrink", rp, st.step_rule.shrink);
            st.step_rule.armijo = io::number_or(r, "armijo", rp, st.step_rule.armijo);
        }
        if (s.contains("refinement_schedule")) {
            const json& r = s.at("refinement_schedule");
            if (!r.is_array() || r.empty()) throw InvalidConfig("field /settings/refinement_schedule: expected a non-empty array");
            st.refinement_schedule.clear();
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (!r[i].is_number_integer() || r[i].get<long long>() <= 0)
                    throw InvalidConfig("field /settings/refinement_schedule/" + std::to_string(i) + ": expected a positive integer");
                st.refinement_schedule.push_back(r[i].get<std::size_t>());
            }
        }
        job.time_samples = io::count_or(s, "time_samples", p, job.time_samples);
        if (s.contains("checks")) {
            const json& c = s.at("checks");
            const std::string cp = p + "/checks";
            io::require_object(c, cp, {"energy_law", "ode_residual", "periodicity", "constancy_spread"});
            job.limits.energy_law = io::number_or(c, "energy_law", cp, job.limits.energy_law);
            job.limits.ode_residual = io::number_or(c, "ode_residual", cp, job.limits.ode_residual);
            job.limits.periodicity = io::number_or(c, "periodicity", cp, job.limits.periodicity);
            job.limits.constancy_spread = io::number_or(c, "constancy_spread", cp, job.limits.constancy_spread);
        }
        if (s.contains("integrator")) {
            const json& c = s.at("integrator");
            const std::string cp = p + "/integrator";
            io::require_object(c, cp, {"rtol", "atol"});
            job.integrator.rtol = io::number_or(c, "rtol", cp, job.integrator.rtol);
            job.integrator.atol = io::number_or(c, "atol", cp, job.integrator.atol);
        }
    }
    try {
        job.settings.validate();
    } catch (const InvalidConfig& e) {
        throw InvalidConfig(std::string("field /settings: ") + e.what());
    }
    if (job.time_samples < DiscreteLoop::kMinGridSize) throw InvalidConfig("field /settings/time_samples: must be >= 8");
    return job;
}

inline std::string winding_string(const std::vector<int>& w) {
    std::string s = "(";
    for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
    return s + ")";
}

}  // namespace detail

/// Full solve: seed, minimize, reparameterize, verify by residuals and by
/// forward integration over one period.
inline RunOutcome run_solve(const JobSpec& spec, const ToleranceProfile& prof) {
    const auto job = detail::parse_solve(spec.body, prof);
    RunOutcome out;
    std::vector<Check> checks;
    out.report["word"] = job.word.to_string();
    out.report["orbit_label"] = orbit_label(job.word);
    out.report["primitive"] = job.word.is_primitive();
    out.report["h"] = job.e.h;
    out.report["E"] = job.e.relativistic(job.cfg);
    out.summary["orbit_label"] = orbit_label(job.word);

    SolveResult res;
    try {
        res = minimize_in_class(job.cfg, job.e, job.word, job.settings);
    } catch (const NotConverged& e) {
        res = e.partial();
        out.artifacts.emplace_back("solve_result.json", io::solve_result_to_json(res).dump(2) + "\n");
        out.artifacts.emplace_back("iterations.jsonl", io::iteration_log_jsonl(res.log));
        finalize(out, "solve", {check_true("converged", false)}, e.what());
        return out;
    }
    out.artifacts.emplace_back("minimizer.csv", io::loop_to_csv(res.minimizer));
    out.artifacts.emplace_back("iterations.jsonl", io::iteration_log_jsonl(res.log));
    json rj = io::solve_result_to_json(res);
    try {
        const auto wv = winding_vector(res.minimizer, job.cfg);
        rj["winding_vector"] = wv;
        out.report["winding_vector"] = detail::winding_string(wv);
    } catch (const AmbiguousWinding&) {
        rj["winding_vector"] = nullptr;
    }
    out.artifacts.emplace_back("solve_result.json", rj.dump(2) + "\n");

    checks.push_back(check_true("converged", res.converged));
    checks.push_back(check_true("class_certificate", same_class(res.class_certificate, job.word)));
    double margin = std::numeric_limits<double>::infinity();
    for (double m : res.margin_report) margin = std::min(margin, m);
    checks.push_back(check_at_least("min_margin", margin, job.settings.epsilon * (1.0 - 1e-12)));
    checks.push_back(check_less("poincare_violations", static_cast<double>(res.poincare_violations), 0.5));
    checks.push_back(check_less("coercivity_violations", static_cast<double>(res.coercivity_violations), 0.5));
    out.summary["maupertuis"] = res.maupertuis_value;
    out.summary["iterations"] = res.iterations;

    try {
        const auto q = maupertuis_to_energy_param(res.minimizer, job.cfg, job.e);
        out.artifacts.emplace_back("energy_param.csv", io::loop_to_csv(q));
        checks.push_back(check_less("constancy_spread", constancy_spread(q, job.cfg, job.e), job.limits.constancy_spread));

        const auto sol = energy_param_to_time(q, job.cfg, job.e, job.time_samples);
        out.artifacts.emplace_back("solution.csv", io::solution_to_csv(sol));
        const double law = energy_law_residual(sol, job.cfg, job.e);
        const double speed = max_speed_ratio(sol, job.cfg);
        const double ode = ode_residual(sol, job.cfg);
        checks.push_back(check_less("energy_law_residual", law, job.limits.energy_law));
        checks.push_back(check_less("max_speed_ratio", speed, 1.0));
        checks.push_back(check_less("ode_residual", ode, job.limits.ode_residual));

        const PhaseState x0{sol.positions[0], momentum_from_velocity(job.cfg, sol.velocities[0])};
        const auto traj = integrate(job.cfg, x0, sol.period, job.integrator);
        const double gap = norm(traj.final_state().x - x0.x);
        checks.push_back(check_true("integration_completed", traj.ok()));
        checks.push_back(check_less("periodicity_gap", gap, job.limits.periodicity));

        // same check split into 16 legs: separates a wrong orbit from a correct
        // but unstable one whose errors grow over the full period
        double defect = 0.0;
        const std::size_t legs = 16, stride = sol.size() / legs;
        for (std::size_t k = 0; k < legs && stride > 0; ++k) {
            const std::size_t a = k * stride, b = (k + 1) * stride % sol.size();
            const PhaseState sa{sol.positions[a], momentum_from_velocity(job.cfg, sol.velocities[a])};
            const double dt = (k + 1 == legs ? sol.period : sol.times[b]) - sol.times[a];
            defect = std::max(defect, norm(integrate(job.cfg, sa, dt, job.integrator).final_state().x - sol.positions[b]));
        }
        checks.push_back(check_less("shooting_defect", defect, job.limits.periodicity));

        json meta = io::solution_metadata(sol);
        meta["residuals"] = {{"energy_law", law}, {"ode", ode}, {"max_speed_ratio", speed},
                             {"periodicity_gap", gap}, {"shooting_defect", defect}, {"energy_drift", traj.max_energy_drift()}};
        out.artifacts.emplace_back("solution.json", meta.dump(2) + "\n");
        out.report["period"] = sol.period;
        out.summary["period"] = sol.period;
        out.summary["ode_residual"] = ode;
        out.summary["energy_law_residual"] = law;
        out.summary["periodicity_gap"] = gap;
    } catch (const Error& e) {
        finalize(out, "solve", checks, e.what());
        return out;
    }
    finalize(out, "solve", checks);
    return out;
}

inline RunOutcome run_integrate(const JobSpec& spec, const ToleranceProfile& prof) {
    const json& b = spec.body;
    io::require_object(b, "", {"command", "potential", "model", "initial", "t_end", "tolerances", "max_energy_drift"});
    const PotentialConfig cfg = b.contains("potential") ? io::potential_from_json(b.at("potential"))
                                                        : detail::model_from_json(io::field(b, "model", "")).potential();
    const json& ini = io::field(b, "initial", "");
    io::require_object(ini, "/initial", {"x", "p", "v"});
    PhaseState s0{io::point(io::field(ini, "x", "/initial"), "/initial/x"), {}};
    if (ini.contains("p") == ini.contains("v")) throw InvalidConfig("field /initial: give exactly one of p or v");
    if (ini.contains("p")) s0.p = io::point(ini.at("p"), "/initial/p");
    else s0.p = momentum_from_velocity(cfg, io::point(ini.at("v"), "/initial/v"));
    const double t_end = io::number(b, "t_end", "");
    if (!(t_end > 0.0)) throw InvalidConfig("field /t_end: must be > 0");
    auto tol = integrator_tolerances_from(prof);
    if (b.contains("tolerances")) {
        const json& t = b.at("tolerances");
        io::require_object(t, "/tolerances", {"rtol", "atol", "collision_epsilon"});
        tol.rtol = io::number_or(t, "rtol", "/tolerances", tol.rtol);
        tol.atol = io::number_or(t, "atol", "/tolerances", tol.atol);
        tol.collision_epsilon = io::number_or(t, "collision_epsilon", "/tolerances", tol.collision_epsilon);
    }
    RunOutcome out;
    const auto res = integrate(cfg, s0, t_end, tol);
    out.artifacts.emplace_back("trajectory.csv", io::trajectory_to_csv(res));
    out.report["status"] = to_string(res.status);
    out.report["accepted_steps"] = res.accepted_steps;
    out.report["rejected_steps"] = res.rejected_steps;
    out.report["max_energy_drift"] = res.max_energy_drift();
    out.report["max_angular_momentum_drift"] = res.max_angular_momentum_drift();
    out.report["min_center_distance"] = res.min_center_distance;
    out.summary["max_energy_drift"] = res.max_energy_drift();
    out.summary["status"] = to_string(res.status);
    std::vector<Check> checks{check_true("integration_completed", res.ok())};
    if (b.contains("max_energy_drift"))
        checks.push_back(check_less("energy_drift", res.max_energy_drift(), io::number(b, "max_energy_drift", "")));
    finalize(out, "integrate", checks);
    return out;
}

namespace detail {

inline json classification_to_json(const OrbitClassification& c) {
    json cps = json::array();
    for (const auto& p : c.critical_points) cps.push_back({{"r", p.r}, {"phi", p.phi}, {"minimum", p.minimum}});
    json annuli = json::array();
    for (const auto& [a, b] : c.annuli) annuli.push_back({a, b});
    json j = {{"E", c.E}, {"L", c.L}, {"alpha", c.alpha}, {"critical_points", cps}, {"zeros", c.zeros},
              {"sign_pattern", c.sign_pattern}, {"annuli", annuli}, {"verdict", to_string(c.verdict)}};
    if (c.p2) {
        j["p2"] = {{"coefficients", {c.p2->p0, c.p2->p1, c.p2->p2}}, {"positive_roots", c.p2->positive_roots},
                   {"critical_points", c.p2->critical_points},
                   {"bounded_positive_interval", c.p2->bounded_positive_interval}};
    }
    return j;
}

inline std::vector<double> values_or_single(const json& b, const char* list, const char* single) {
    if (b.contains(list)) {
        auto v = io::numbers(b, list, "");
        if (v.empty()) throw InvalidConfig(std::string("field /") + list + ": must not be empty");
        return v;
    }
    return {io::number(b, single, "")};
}

inline RunOutcome classify_grid(const ModelConfig& mc, const std::vector<double>& Es, const std::vector<double>& Ls,
                                const std::string& command) {
    RunOutcome out;
    json cells = json::array();
    std::string csv = "E,L,critical_points,verdict,zeros,annuli\n";
    std::vector<Check> checks;
    std::size_t bounded = 0, wrong_count = 0;
    for (double E : Es)
        for (double L : Ls) {
            const auto c = classify_orbits(mc, E, L);
            cells.push_back(classification_to_json(c));
            csv += io::fmt(E) + "," + io::fmt(L) + "," + std::to_string(c.critical_points.size()) + "," +
                   to_string(c.verdict) + "," + std::to_string(c.zeros.size()) + "," + std::to_string(c.annuli.size()) + "\n";
            if (mc.alpha >= 2.0) {
                if (c.verdict != OrbitVerdict::NoBoundedOrbits) ++bounded;
                if (c.critical_points.size() != 1) ++wrong_count;
            }
            if (Es.size() * Ls.size() == 1) {
                out.summary["verdict"] = to_string(c.verdict);
                out.summary["critical_points"] = c.critical_points.size();
            }
        }
    if (mc.alpha >= 2.0) {
        checks.push_back(check_less("cells_with_bounded_orbits", static_cast<double>(bounded), 0.5));
        checks.push_back(check_less("cells_without_single_critical_point", static_cast<double>(wrong_count), 0.5));
    }
    out.report["alpha"] = mc.alpha;
    out.report["cells"] = cells;
    out.artifacts.emplace_back("classification.csv", csv);
    out.artifacts.emplace_back("classification.json", cells.dump(2) + "\n");
    finalize(out, command, checks);
    return out;
}

}  // namespace detail

/// mode: profile (r, omega, E table), radius (radii for given energies) or
/// classify (effective-potential verdicts on an (E, L) grid).
inline RunOutcome run_circular(const JobSpec& spec, const ToleranceProfile&) {
    const json& b = spec.body;
    io::require_object(b, "", {"command", "mode", "model", "r_min", "r_max", "points", "E", "energies", "L", "E_values", "L_values"});
    const ModelConfig mc = detail::model_from_json(io::field(b, "model", ""));
    const std::string mode = io::text(b, "mode", "");
    RunOutcome out;
    out.report["mode"] = mode;
    if (mode == "profile") {
        const double r_min = io::number_or(b, "r_min", "", 1e-3);
        const double r_max = io::number_or(b, "r_max", "", 1e3);
        const std::size_t pts = io::count_or(b, "points", "", 200);
        if (!(r_min > 0.0 && r_max > r_min) || pts < 2) throw InvalidConfig("field /r_min, /r_max, /points: need 0 < r_min < r_max and points >= 2");
        std::string csv = "r,omega,E\n";
        double worst = 0.0;
        const auto cfg = mc.potential();
        for (std::size_t i = 0; i < pts; ++i) {
            const double r = r_min * std::pow(r_max / r_min, static_cast<double>(i) / static_cast<double>(pts - 1));
            const double w = omega_from_radius(mc, r);
            const double E = energy_of_radius(mc, r);
            worst = std::max(worst, std::abs(hamiltonian(cfg, circular_state(mc, r)) - E) / std::abs(E));
            csv += io::fmt(r) + "," + io::fmt(w) + "," + io::fmt(E) + "\n";
        }
        out.artifacts.emplace_back("profile.csv", csv);
        out.report["max_hamiltonian_mismatch"] = worst;
        finalize(out, "circular", {check_less("hamiltonian_consistency", worst, 1e-10)});
        return out;
    }
    if (mode == "radius") {
        const auto energies = detail::values_or_single(b, "energies", "E");
        json rows = json::array();
        std::string csv = "E,radius\n";
        double worst = 0.0;
        for (double E : energies) {
            try {
                const auto radii = radius_from_energy(mc, E);
                for (double r : radii) {
                    csv += io::fmt(E) + "," + io::fmt(r) + "\n";
                    worst = std::max(worst, std::abs(energy_of_radius(mc, r) - E) / std::abs(E));
                }
                rows.push_back({{"E", E}, {"radii", radii}});
                if (energies.size() == 1) out.summary["radii"] = radii;
            } catch (const NoCircularOrbit& e) {
                rows.push_back({{"E", E}, {"radii", json::array()}, {"error", e.what()}});
                if (energies.size() == 1) out.summary["radii"] = json::array();
            }
        }
        out.report["rows"] = rows;
        out.artifacts.emplace_back("radius.csv", csv);
        finalize(out, "circular", {check_less("energy_round_trip", worst, 1e-10)});
        return out;
    }
    if (mode == "classify") {
        return detail::classify_grid(mc, detail::values_or_single(b, "E_values", "E"),
                                     detail::values_or_single(b, "L_values", "L"), "circular");
    }
    throw InvalidConfig("field /mode: expected profile, radius or classify");
}

inline RunOutcome run_classify(const JobSpec& spec, const ToleranceProfile&) {
    const json& b = spec.body;
    io::require_object(b, "", {"command", "model", "E", "L", "E_values", "L_values"});
    const ModelConfig mc = detail::model_from_json(io::field(b, "model", ""));
    return detail::classify_grid(mc, detail::values_or_single(b, "E_values", "E"),
                                 detail::values_or_single(b, "L_values", "L"), "classify");
}

inline RunOutcome run_limit(const JobSpec& spec, const ToleranceProfile&) {
    const json& b = spec.body;
    io::require_object(b, "", {"command", "model", "h", "c_values", "limit_tolerance"});
    const ModelConfig mc = detail::model_from_json(io::field(b, "model", ""));
    const auto cs = io::numbers(b, "c_values", "");
    if (cs.empty()) throw InvalidConfig("field /c_values: must not be empty");
    const auto tab = nonrelativistic_limit(mc, io::number(b, "h", ""), cs);
    RunOutcome out;
    std::string csv = "c,r_h\n";
    json rows = json::array();
    for (const auto& row : tab.rows) {
        csv += io::fmt(row.c) + "," + (row.radius ? io::fmt(*row.radius) : std::string("")) + "\n";
        json r = {{"c", row.c}, {"r_h", row.radius ? json(*row.radius) : json(nullptr)}};
        if (!row.error.empty()) r["error"] = row.error;
        rows.push_back(r);
    }
    out.artifacts.emplace_back("limit.csv", csv);
    out.report["rows"] = rows;
    out.report["classical_radius"] = tab.classical_radius ? json(*tab.classical_radius) : json(nullptr);
    out.report["limit_radius"] = tab.limit_radius;
    out.report["strictly_decreasing"] = tab.strictly_decreasing;
    if (tab.rows.size() == 1 && tab.rows[0].radius) out.summary["r_h"] = *tab.rows[0].radius;
    std::vector<Check> checks{check_true("strictly_decreasing", tab.strictly_decreasing)};
    if (b.contains("limit_tolerance")) {
        const auto& last = tab.rows.back();
        const double gap = last.radius ? std::abs(*last.radius - tab.limit_radius) : std::numeric_limits<double>::infinity();
        checks.push_back(check_less("distance_to_limit", gap, io::number(b, "limit_tolerance", "")));
    }
    finalize(out, "limit", checks);
    return out;
}

RunOutcome run_job(const JobSpec& spec, const ToleranceProfile& prof, std::size_t workers = 1);

namespace detail {

struct SweepAxis {
    std::string name;
    std::vector<json> values;
};

/// Applies one axis value to a base job, following where each command keeps it.
inline void apply_axis(json& job, const std::string& command, const std::string& axis, const json& value) {
    auto set_physics = [&](const char* key) {
        if (job.contains("potential")) job["potential"][key] = value;
        else if (job.contains("model")) job["model"][key] = value;
        else throw InvalidConfig(std::string("sweep axis ") + axis + " needs a potential or model in /base");
    };
    if (axis == "alpha" || axis == "c") {
        if (axis == "c" && command == "limit") job["c_values"] = json::array({value});
        else set_physics(axis.c_str());
    } else if (axis == "h") {
        job["h"] = value;
    } else if (axis == "word") {
        job["word"] = value;
    } else if (axis == "E" || axis == "L") {
        job.erase(axis + "_values");
        job[axis] = value;
    } else {
        throw InvalidConfig("unknown sweep axis " + axis + " (h, alpha, c, L, E, word)");
    }
}

inline std::string cell_value_string(const json& v) { return v.is_string() ? v.get<std::string>() : io::fmt(v.get<double>()); }

}  // namespace detail

/// Cartesian product of the axes over a base job, run on up to `workers`
/// threads. Rows are ordered by cell index whatever the completion order.
inline RunOutcome run_sweep(const JobSpec& spec, const ToleranceProfile& prof, std::size_t workers) {
    const json& b = spec.body;
    io::require_object(b, "", {"command", "base", "axes"});
    const json& base = io::field(b, "base", "");
    if (!base.is_object()) throw InvalidConfig("field /base: expected an object");
    const std::string command = io::text(base, "command", "/base");
    if (command == "sweep") throw InvalidConfig("field /base/command: sweeps cannot nest");
    const json& axes_j = io::field(b, "axes", "");
    if (!axes_j.is_object() || axes_j.empty()) throw InvalidConfig("field /axes: expected a non-empty object");

    std::vector<detail::SweepAxis> axes;
    for (const auto& [name, vals] : axes_j.items()) {
        if (!vals.is_array() || vals.empty()) throw InvalidConfig("field /axes/" + name + ": sweep axis must be a non-empty array");
        detail::SweepAxis ax{name, {}};
        for (const auto& v : vals) {
            if (name == "word" ? !v.is_string() : !v.is_number())
                throw InvalidConfig("field /axes/" + name + ": wrong value type");
            ax.values.push_back(v);
        }
        axes.push_back(std::move(ax));
    }

    std::size_t cells = 1;
    for (const auto& ax : axes) cells *= ax.values.size();
    std::vector<JobSpec> jobs(cells);
    std::vector<std::vector<std::string>> labels(cells);
    for (std::size_t idx = 0; idx < cells; ++idx) {
        json job = base;
        std::size_t rem = idx;
        for (std::size_t a = axes.size(); a-- > 0;) {
            const auto& ax = axes[a];
            const json& v = ax.values[rem % ax.values.size()];
            rem /= ax.values.size();
            detail::apply_axis(job, command, ax.name, v);
        }
        for (const auto& ax : axes) {
            std::size_t r = idx, stride = 1;
            for (std::size_t a = axes.size(); a-- > 0;) {
                if (&axes[a] == &ax) break;
                stride *= axes[a].values.size();
            }
            r = (idx / stride) % ax.values.size();
            labels[idx].push_back(detail::cell_value_string(ax.values[r]));
        }
        jobs[idx] = JobSpec{command, job, spec.source + "#cell" + std::to_string(idx)};
    }
    // validate every cell before running any of them
    for (const auto& j : jobs) {
        if (command == "solve") detail::parse_solve(j.body, prof);
    }

    std::vector<RunOutcome> results(cells);
    std::vector<std::string> errors(cells);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells; i = next++) {
            try {
                results[i] = run_job(jobs[i], prof, 1);
            } catch (const std::exception& e) {
                errors[i] = e.what();
                results[i].passed = false;
            }
        }
    };
    const std::size_t nthreads = std::max<std::size_t>(1, std::min(workers, cells));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<std::string> metric_keys;
    for (const auto& r : results)
        for (const auto& [k, _] : r.summary.items())
            if (k != "passed" && std::find(metric_keys.begin(), metric_keys.end(), k) == metric_keys.end()) metric_keys.push_back(k);
    std::sort(metric_keys.begin(), metric_keys.end());

    // cells whose words agree up to rotation and inversion at equal other
    // axes point at the first such cell; nothing is dropped
    std::vector<std::optional<std::size_t>> duplicate_of(cells);
    const bool label_dupes = command == "solve" && std::any_of(axes.begin(), axes.end(), [](const auto& ax) { return ax.name == "word"; });
    if (label_dupes) {
        auto key = [&](std::size_t i) {
            std::string k = orbit_label(HomotopyWord::parse(jobs[i].body.at("word").get<std::string>()));
            for (std::size_t a = 0; a < axes.size(); ++a)
                if (axes[a].name != "word") k += "|" + labels[i][a];
            return k;
        };
        for (std::size_t i = 0; i < cells; ++i)
            for (std::size_t j = 0; j < i && !duplicate_of[i]; ++j)
                if (!duplicate_of[j] && key(j) == key(i)) duplicate_of[i] = j;
    }

    std::string csv = "cell";
    for (const auto& ax : axes) csv += "," + ax.name;
    csv += ",passed";
    if (label_dupes) csv += ",duplicate_of";
    for (const auto& k : metric_keys) csv += "," + k;
    csv += "\n";
    json failed = json::array();
    json rows = json::array();
    RunOutcome out;
    for (std::size_t i = 0; i < cells; ++i) {
        csv += std::to_string(i);
        for (const auto& l : labels[i]) csv += "," + l;
        csv += std::string(",") + (results[i].passed ? "true" : "false");
        if (label_dupes) csv += "," + (duplicate_of[i] ? std::to_string(*duplicate_of[i]) : std::string());
        for (const auto& k : metric_keys) {
            csv += ",";
            if (!results[i].summary.contains(k)) continue;
            const json& v = results[i].summary.at(k);
            if (v.is_number_float()) csv += io::fmt(v.get<double>());
            else if (v.is_string()) csv += v.get<std::string>();
            else csv += v.dump();
        }
        csv += "\n";
        json row = {{"cell", i}, {"axes", labels[i]}, {"passed", results[i].passed}, {"summary", results[i].summary}};
        if (label_dupes) row["duplicate_of"] = duplicate_of[i] ? json(*duplicate_of[i]) : json(nullptr);
        if (!errors[i].empty()) row["error"] = errors[i];
        else if (results[i].report.contains("error")) row["error"] = results[i].report["error"];
        rows.push_back(row);
        if (!results[i].passed) failed.push_back(i);
        out.artifacts.emplace_back("cells/" + std::to_string(i) + "/report.json",
                                   results[i].report.is_null() ? json{{"error", errors[i]}}.dump(2) + "\n"
                                                               : results[i].report.dump(2) + "\n");
    }
    out.artifacts.emplace_back("sweep.csv", csv);
    out.report["base_command"] = command;
    out.report["cells"] = rows;
    out.report["failed_cells"] = failed;
    finalize(out, "sweep", {check_less("failed_cells", static_cast<double>(failed.size()), 0.5)});
    return out;
}

inline JobSpec parse_job(const std::string& text, const std::string& source, const std::string& command_hint = "") {
    json body = io::parse_json(text, source);
    if (!body.is_object()) throw InvalidConfig(source + ": the job must be a JSON object");
    std::string command = command_hint;
    if (body.contains("command")) {
        if (!body["command"].is_string()) throw InvalidConfig(source + ": field /command: expected a string");
        const std::string c = body["command"].get<std::string>();
        if (!command.empty() && c != command)
            throw InvalidConfig(source + ": field /command: job is '" + c + "' but the subcommand is '" + command + "'");
        command = c;
    }
    if (command.empty()) throw InvalidConfig(source + ": field /command: required");
    bool known = false;
    for (const char* c : detail::kCommands) known = known || command == c;
    if (!known) throw InvalidConfig(source + ": field /command: unknown command '" + command + "'");
    return {command, body, source};
}

inline RunOutcome run_job(const JobSpec& spec, const ToleranceProfile& prof, std::size_t workers) {
    if (spec.command == "solve") return run_solve(spec, prof);
    if (spec.command == "integrate") return run_integrate(spec, prof);
    if (spec.command == "circular") return run_circular(spec, prof);
    if (spec.command == "classify") return run_classify(spec, prof);
    if (spec.command == "limit") return run_limit(spec, prof);
    if (spec.command == "sweep") return run_sweep(spec, prof, workers);
    throw InvalidConfig("unknown command " + spec.command);
}

inline void write_artifacts(const RunOutcome& out, const std::string& dir) {
    namespace fs = std::filesystem;
    for (const auto& [name, content] : out.artifacts) {
        const fs::path p = fs::path(dir) / name;
        fs::create_directories(p.parent_path());
        io::write_file(p.string(), content);
    }
}

}  // namespace relmaup
