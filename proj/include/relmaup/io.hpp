#pragma once

// JSON and CSV conversions. Numbers are written with 17 significant digits so
// that every double survives a write/read cycle unchanged.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "relmaup/errors.hpp"
#include "relmaup/integrator.hpp"
#include "relmaup/loopspace.hpp"
#include "relmaup/optimizer.hpp"
#include "relmaup/potentials.hpp"
#include "relmaup/reparam.hpp"

namespace relmaup::io {

using json = nlohmann::json;

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidConfig("cannot open " + path + " for writing");
    f << content;
    if (!f) throw InvalidConfig("failed writing " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidConfig("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// Parses JSON text, reporting syntax errors as source:line:column.
inline json parse_json(const std::string& text, const std::string& source = "<input>") {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw InvalidConfig(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
}

// ---- field access with path diagnostics ----

inline std::string child(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }

inline void require_object(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw InvalidConfig("field " + (path.empty() ? "/" : path) + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (auto a : allowed) known = known || a == key;
        if (!known) throw InvalidConfig("field " + child(path, key) + ": unknown field");
    }
}

inline const json& field(const json& j, std::string_view key, const std::string& path) {
    const auto it = j.find(std::string(key));
    if (it == j.end()) throw InvalidConfig("field " + child(path, key) + ": required");
    return *it;
}

inline double number(const json& j, std::string_view key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_number()) throw InvalidConfig("field " + child(path, key) + ": expected a number");
    return v.get<double>();
}

inline double number_or(const json& j, std::string_view key, const std::string& path, double fallback) {
    return j.contains(std::string(key)) ? number(j, key, path) : fallback;
}

inline std::size_t count_or(const json& j, std::string_view key, const std::string& path, std::size_t fallback) {
    if (!j.contains(std::string(key))) return fallback;
    const json& v = j.at(std::string(key));
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw InvalidConfig("field " + child(path, key) + ": expected a non-negative integer");
    return v.get<std::size_t>();
}

inline std::string text(const json& j, std::string_view key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_string()) throw InvalidConfig("field " + child(path, key) + ": expected a string");
    return v.get<std::string>();
}

inline std::vector<double> numbers(const json& j, std::string_view key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_array()) throw InvalidConfig("field " + child(path, key) + ": expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number())
            throw InvalidConfig("field " + child(path, key) + "/" + std::to_string(i) + ": expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

inline Vec2 point(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw InvalidConfig("field " + path + ": expected [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

inline json to_json(const Vec2& p) { return json::array({p.x, p.y}); }

// ---- potential ----

inline PerturbationSpec perturbation_from_json(const json& j, const std::string& path) {
    require_object(j, path, {"kind", "value", "amplitude", "width", "offset"});
    const std::string kind = text(j, "kind", path);
    if (kind == "zero") return perturbation::Zero{};
    if (kind == "constant") return perturbation::Constant{number(j, "value", path)};
    if (kind == "gaussian")
        return perturbation::GaussianBump{number(j, "amplitude", path), number(j, "width", path),
                                          number(j, "offset", path)};
    throw InvalidConfig("field " + child(path, "kind") + ": expected zero, constant or gaussian");
}

inline json perturbation_to_json(const PerturbationSpec& w) {
    if (const auto* c = std::get_if<perturbation::Constant>(&w)) return {{"kind", "constant"}, {"value", c->value}};
    if (const auto* g = std::get_if<perturbation::GaussianBump>(&w))
        return {{"kind", "gaussian"}, {"amplitude", g->amplitude}, {"width", g->width}, {"offset", g->offset}};
    return {{"kind", "zero"}};
}

inline PotentialConfig potential_from_json(const json& j, const std::string& path = "/potential") {
    require_object(j, path, {"centers", "strengths", "alpha", "m", "c", "perturbation", "collision_radius"});
    const json& cj = field(j, "centers", path);
    if (!cj.is_array() || cj.empty()) throw InvalidConfig("field " + child(path, "centers") + ": expected a non-empty array");
    std::vector<Vec2> centers;
    for (std::size_t i = 0; i < cj.size(); ++i) centers.push_back(point(cj[i], child(path, "centers") + "/" + std::to_string(i)));
    const auto strengths = numbers(j, "strengths", path);
    PerturbationSpec w = perturbation::Zero{};
    if (j.contains("perturbation")) w = perturbation_from_json(j.at("perturbation"), child(path, "perturbation"));
    try {
        return PotentialConfig(std::move(centers), strengths, number(j, "alpha", path), w, number_or(j, "m", path, 1.0),
                               number_or(j, "c", path, 1.0),
                               number_or(j, "collision_radius", path, PotentialConfig::kDefaultCollisionRadius));
    } catch (const InvalidConfig& e) {
        throw InvalidConfig("field " + path + ": " + e.what());
    }
}

inline json potential_to_json(const PotentialConfig& cfg) {
    json centers = json::array();
    for (const auto& s : cfg.centers()) centers.push_back(to_json(s));
    return {{"centers", centers},
            {"strengths", cfg.strengths()},
            {"alpha", cfg.alpha()},
            {"m", cfg.mass()},
            {"c", cfg.light_speed()},
            {"perturbation", perturbation_to_json(cfg.perturbation())},
            {"collision_radius", cfg.collision_radius()}};
}

// ---- loops ----

inline std::string loop_to_csv(const DiscreteLoop& u) {
    std::string out = "j,x,y\n";
    for (std::size_t j = 0; j < u.size(); ++j) out += std::to_string(j) + "," + fmt(u[j].x) + "," + fmt(u[j].y) + "\n";
    return out;
}

inline DiscreteLoop loop_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    if (line.rfind("j,x,y", 0) != 0) throw InvalidConfig("loop CSV must start with the header j,x,y");
    std::vector<Vec2> pts;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto a = line.find(',');
        const auto b = line.find(',', a + 1);
        if (a == std::string::npos || b == std::string::npos)
            throw InvalidConfig("loop CSV line " + std::to_string(lineno) + ": expected j,x,y");
        pts.push_back({std::strtod(line.c_str() + a + 1, nullptr), std::strtod(line.c_str() + b + 1, nullptr)});
    }
    return DiscreteLoop(std::move(pts));
}

inline json loop_to_json(const DiscreteLoop& u) {
    json pts = json::array();
    for (const auto& p : u) pts.push_back(to_json(p));
    return {{"grid_size", u.size()}, {"samples", pts}};
}

inline DiscreteLoop loop_from_json(const json& j, const std::string& path = "") {
    require_object(j, path, {"grid_size", "samples"});
    const json& s = field(j, "samples", path);
    if (!s.is_array()) throw InvalidConfig("field " + child(path, "samples") + ": expected an array");
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < s.size(); ++i) pts.push_back(point(s[i], child(path, "samples") + "/" + std::to_string(i)));
    return DiscreteLoop(std::move(pts));
}

// ---- solutions ----

inline std::string solution_to_csv(const PeriodicSolution& sol) {
    std::string out = "t,x,y,vx,vy\n";
    for (std::size_t k = 0; k < sol.size(); ++k)
        out += fmt(sol.times[k]) + "," + fmt(sol.positions[k].x) + "," + fmt(sol.positions[k].y) + "," +
               fmt(sol.velocities[k].x) + "," + fmt(sol.velocities[k].y) + "\n";
    return out;
}

inline json solution_metadata(const PeriodicSolution& sol) {
    return {{"T", sol.period}, {"h", sol.h}, {"E", sol.energy}, {"lambda", sol.lambda},
            {"lambda_spread", sol.lambda_spread}, {"time_samples", sol.size()}};
}

inline std::string trajectory_to_csv(const IntegrationResult& r) {
    std::string out = "t,x,y,px,py,H,L\n";
    for (const auto& s : r.samples)
        out += fmt(s.t) + "," + fmt(s.state.x.x) + "," + fmt(s.state.x.y) + "," + fmt(s.state.p.x) + "," +
               fmt(s.state.p.y) + "," + fmt(s.energy) + "," + fmt(s.angular_momentum) + "\n";
    return out;
}

inline json solve_result_to_json(const SolveResult& r) {
    json stages = json::array();
    for (const auto& s : r.stages)
        stages.push_back({{"grid_size", s.grid_size}, {"maupertuis", s.maupertuis_value},
                          {"gradient_norm", s.gradient_norm}, {"iterations", s.iterations},
                          {"stop_reason", s.stop_reason}});
    return {{"maupertuis_value", r.maupertuis_value},
            {"gradient_norm", r.gradient_norm},
            {"initial_gradient_norm", r.initial_gradient_norm},
            {"iterations", r.iterations},
            {"class_certificate", r.class_certificate.to_string()},
            {"margin_report", r.margin_report},
            {"converged", r.converged},
            {"stop_reason", r.stop_reason},
            {"push_offs", r.push_offs},
            {"rejected_steps", r.rejected_class_steps},
            {"poincare_violations", r.poincare_violations},
            {"coercivity_violations", r.coercivity_violations},
            {"stages", stages},
            {"grid_size", r.minimizer.size()}};
}

inline std::string iteration_log_jsonl(const std::vector<IterationRecord>& log) {
    std::string out;
    for (const auto& r : log)
        out += json{{"grid_size", r.grid_size}, {"iteration", r.iteration}, {"value", r.value},
                    {"gradient_norm", r.gradient_norm}, {"min_margin", r.min_margin}}
                   .dump() +
               "\n";
    return out;
}

}  // namespace relmaup::io
