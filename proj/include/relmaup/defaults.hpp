#pragma once

// Every default tolerance used by the pipeline, grouped into named profiles.
// Jobs may override individual fields; the profile only fills what a job
// leaves unset.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "relmaup/errors.hpp"
#include "relmaup/integrator.hpp"
#include "relmaup/optimizer.hpp"

namespace relmaup {

struct ToleranceProfile {
    std::string_view name;

    // optimizer
    double epsilon;
    double gradient_tolerance;
    double absolute_gradient_tolerance;
    double stagnation_tolerance;
    std::size_t max_iterations;
    std::size_t grid_size;
    std::size_t time_samples;

    // integrator
    double rtol;
    double atol;

    // verification thresholds
    double energy_law;         // relative, pointwise
    double ode_residual;       // absolute, problem units
    double periodicity;        // |x(T) - x(0)| after integrating one period
    double constancy_spread;   // relative spread of |q'|^2 (Z_h + 2hm) / 2
};

inline constexpr std::array<ToleranceProfile, 3> kToleranceProfiles{{
    //  name       eps    g_rel  g_abs  stag   iters  N    N_t   rtol   atol   law   ode   per   const
    {"default", 1e-2, 1e-8, 0.0, 1e-12, 20000, 512, 1024, 1e-11, 1e-11, 1e-8, 1e-4, 1e-4, 1e-6},
    {"strict", 1e-2, 1e-12, 1e-9, 1e-14, 50000, 1024, 2048, 1e-12, 1e-12, 1e-10, 1e-5, 1e-5, 1e-7},
    {"fast", 1e-2, 1e-6, 0.0, 1e-10, 5000, 128, 256, 1e-9, 1e-9, 1e-8, 1e-2, 1e-2, 1e-4},
}};

inline const ToleranceProfile& tolerance_profile(std::string_view name) {
    for (const auto& p : kToleranceProfiles)
        if (p.name == name) return p;
    throw InvalidConfig("unknown tolerance profile '" + std::string(name) + "' (default, strict, fast)");
}

inline SolveSettings solve_settings_from(const ToleranceProfile& p) {
    SolveSettings s;
    s.epsilon = p.epsilon;
    s.gradient_tolerance = p.gradient_tolerance;
    s.absolute_gradient_tolerance = p.absolute_gradient_tolerance;
    s.stagnation_tolerance = p.stagnation_tolerance;
    s.max_iterations = p.max_iterations;
    s.refinement_schedule = {p.grid_size};
    return s;
}

inline IntegratorTolerances integrator_tolerances_from(const ToleranceProfile& p) {
    IntegratorTolerances t;
    t.rtol = p.rtol;
    t.atol = p.atol;
    return t;
}

}  // namespace relmaup
