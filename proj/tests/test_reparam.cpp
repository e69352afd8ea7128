#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "relmaup/circular.hpp"
#include "relmaup/optimizer.hpp"
#include "relmaup/reparam.hpp"
#include "support.hpp"

using namespace relmaup;
using namespace testing_support;

namespace {

const DiscreteLoop& model_minimizer() {
    static const DiscreteLoop u = [] {
        SolveSettings s;
        s.refinement_schedule = {512};
        return minimize_in_class(model_problem(), EnergyLevel{0.5}, HomotopyWord::parse("a1"), s).minimizer;
    }();
    return u;
}

const DiscreteLoop& two_center_minimizer() {
    static const DiscreteLoop u = [] {
        SolveSettings s;
        s.refinement_schedule = {128, 256};
        s.epsilon = 0.1;
        return minimize_in_class(two_centers(), EnergyLevel{0.5}, HomotopyWord::parse("a1 a2"), s).minimizer;
    }();
    return u;
}

PeriodicSolution exact_circle(const ModelConfig& mc, double r, std::size_t n) {
    const double w = omega_from_radius(mc, r);
    PeriodicSolution sol;
    sol.period = 2.0 * std::numbers::pi / w;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = sol.period * static_cast<double>(k) / static_cast<double>(n);
        sol.times.push_back(t);
        sol.positions.push_back({r * std::cos(w * t), r * std::sin(w * t)});
        sol.velocities.push_back({-r * w * std::sin(w * t), r * w * std::cos(w * t)});
    }
    return sol;
}

}  // namespace

TEST(Reparam, ConstancyOnGenericMinimizer) {
    const auto cfg = two_centers();
    const EnergyLevel e{0.5};
    const auto q = maupertuis_to_energy_param(two_center_minimizer(), cfg, e);
    EXPECT_LT(constancy_spread(q, cfg, e), 1e-6);
    const auto sol = energy_param_to_time(q, cfg, e, 512);
    EXPECT_LT(sol.lambda_spread, 1e-6);
}

TEST(Reparam, ModelProblemPeriodMatchesCircularOrbit) {
    const auto cfg = model_problem();
    const EnergyLevel e{0.5};
    const auto q = maupertuis_to_energy_param(model_minimizer(), cfg, e);
    const auto sol = energy_param_to_time(q, cfg, e, 1024);
    const ModelConfig mc{1, 2, 1, 1};
    const double r = radius_from_energy(mc, 1.5).at(0);
    const double T = 2.0 * std::numbers::pi / omega_from_radius(mc, r);
    EXPECT_LT(rel_err(sol.period, T), 1e-5);
    EXPECT_GT(sol.period, 0.0);
    for (std::size_t k = 1; k < sol.size(); ++k) EXPECT_GT(sol.times[k], sol.times[k - 1]);
    EXPECT_LT(energy_law_residual(sol, cfg, e), 1e-8);
    EXPECT_LT(max_speed_ratio(sol, cfg), 1.0);
    EXPECT_LT(ode_residual(sol, cfg), 1e-4);
    EXPECT_DOUBLE_EQ(sol.energy, 1.5);
}

TEST(Reparam, EnergyLawAndSpeedOnTwoCenterOrbit) {
    const auto cfg = two_centers();
    const EnergyLevel e{0.5};
    const auto sol = energy_param_to_time(maupertuis_to_energy_param(two_center_minimizer(), cfg, e), cfg, e, 777);
    EXPECT_EQ(sol.size(), 777u);
    EXPECT_LT(energy_law_residual(sol, cfg, e), 1e-8);
    const double vmax = max_speed_ratio(sol, cfg);
    EXPECT_LT(vmax, 1.0);
    EXPECT_GT(vmax, 0.0);
}

TEST(Reparam, RoundTrip) {
    const auto cfg = model_problem();
    const EnergyLevel e{0.5};
    const auto q = maupertuis_to_energy_param(model_minimizer(), cfg, e, 512);
    const auto sol = energy_param_to_time(q, cfg, e, 512);
    const auto back = time_to_energy_param(sol, cfg, e, 512);
    double worst = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) worst = std::max(worst, norm(back[j] - q[j]));
    EXPECT_LT(worst, 1e-6);

    const auto cfg2 = two_centers();
    const auto q2 = maupertuis_to_energy_param(two_center_minimizer(), cfg2, e, 256);
    const auto back2 = time_to_energy_param(energy_param_to_time(q2, cfg2, e, 256), cfg2, e, 256);
    worst = 0.0;
    for (std::size_t j = 0; j < q2.size(); ++j) worst = std::max(worst, norm(back2[j] - q2[j]));
    EXPECT_LT(worst, 1e-6);
}

TEST(Reparam, OdeResidualIsFourthOrderOnExactCircle) {
    const ModelConfig mc{1, 2, 1, 1};
    const auto cfg = mc.potential();
    const double r0 = 0.8;
    const double a = ode_residual(exact_circle(mc, r0, 64), cfg);
    const double b = ode_residual(exact_circle(mc, r0, 128), cfg);
    const double c = ode_residual(exact_circle(mc, r0, 256), cfg);
    EXPECT_NEAR(a / b, 16.0, 1.0);
    EXPECT_NEAR(b / c, 16.0, 1.0);
}

TEST(Reparam, Errors) {
    const auto cfg = model_problem();
    const EnergyLevel e{0.5};
    const DiscreteLoop constant(std::vector<Vec2>(16, Vec2{1.0, 0.0}));
    EXPECT_THROW(maupertuis_to_energy_param(constant, cfg, e), DegenerateLoop);
    auto sol = energy_param_to_time(maupertuis_to_energy_param(model_minimizer(), cfg, e), cfg, e, 64);
    sol.velocities[3] = sol.velocities[3] * 0.9;
    EXPECT_THROW(time_to_energy_param(sol, cfg, e, 64), EnergyLawViolated);
}
