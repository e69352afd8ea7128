#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "relmaup/circular.hpp"
#include "relmaup/integrator.hpp"
#include "support.hpp"

using namespace relmaup;
using namespace testing_support;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// bound, non-circular orbit of a single alpha = 1.5 center: a 3% kick on the
// outer circular orbit of radius 2, which stays in r in [2, 3.17]
PhaseState eccentric_state() {
    PhaseState s = circular_state(ModelConfig{1, 1.5, 1, 1}, 2.0);
    s.p = s.p * 1.03;
    return s;
}

}  // namespace

TEST(Integrator, LorentzFactorArithmetic) {
    const auto cfg = model_problem();
    const Vec2 p = momentum_from_velocity(cfg, {0.6, 0.0});
    EXPECT_NEAR(p.x, 0.75, 1e-15);
    EXPECT_NEAR(p.y, 0.0, 1e-15);
    const Vec2 v = velocity_from_momentum(cfg, p);
    EXPECT_NEAR(v.x, 0.6, 1e-15);
    EXPECT_THROW(momentum_from_velocity(cfg, {1.0, 0.0}), SuperluminalInput);
    EXPECT_THROW(momentum_from_velocity(cfg, {0.8, 0.7}), SuperluminalInput);
}

TEST(Integrator, MomentumVariablesAreSubluminal) {
    const auto cfg = PotentialConfig({{0, 0}}, {1.0}, 2.0, perturbation::Zero{}, 2.0, 3.0);
    for (int k = 0; k < 200; ++k) {
        const double mag = std::pow(10.0, uniform(-6, 8));
        const double th = uniform(0, kTwoPi);
        const Vec2 v = velocity_from_momentum(cfg, {mag * std::cos(th), mag * std::sin(th)});
        EXPECT_LT(norm(v), cfg.light_speed());
    }
}

TEST(Integrator, CircularOrbitConservesEnergyAndAngularMomentum) {
    // alpha < 2, where circular orbits survive ten revolutions
    const std::pair<ModelConfig, double> states[] = {
        {ModelConfig{1, 1.5, 1, 1}, 2.0}, {ModelConfig{1, 1.25, 1, 1}, 1.5}, {ModelConfig{2, 1.5, 1, 2}, 0.9}};
    for (const auto& [mc, r] : states) {
        const double T = kTwoPi / omega_from_radius(mc, r);
        IntegratorTolerances tol;
        tol.rtol = tol.atol = 1e-11;
        const auto res = integrate(mc.potential(), circular_state(mc, r), 10.0 * T, tol);
        ASSERT_TRUE(res.ok());
        EXPECT_LT(res.max_energy_drift(), 1e-9);
        EXPECT_LT(res.max_angular_momentum_drift(), 1e-9);
        EXPECT_DOUBLE_EQ(res.energy_drift.front(), 0.0);
    }
}

TEST(Integrator, UnstableCircularOrbitsHoldForOneRevolution) {
    // for alpha >= 2 rounding errors grow until the orbit falls in; one
    // revolution is still clean
    for (const ModelConfig mc : {ModelConfig{1, 2, 1, 1}, ModelConfig{1, 3, 1, 1}}) {
        const double r = radius_from_energy(mc, 1.5).at(0);
        const double T = kTwoPi / omega_from_radius(mc, r);
        IntegratorTolerances tol;
        tol.rtol = tol.atol = 1e-11;
        const auto one = integrate(mc.potential(), circular_state(mc, r), T, tol);
        ASSERT_TRUE(one.ok());
        EXPECT_LT(one.max_energy_drift(), 1e-9);
        EXPECT_LT(norm(one.final_state().x - Vec2{r, 0.0}), 1e-6);
        const auto ten = integrate(mc.potential(), circular_state(mc, r), 10.0 * T, tol);
        EXPECT_EQ(ten.status, IntegrationStatus::collision_approach);
    }
}

TEST(Integrator, CircularOrbitCloses) {
    const ModelConfig mc{1, 2, 1, 1};
    const auto cfg = mc.potential();
    for (double r : {0.3, 0.66874, 1.0, 3.0}) {
        const double w = omega_from_radius(mc, r);
        const PhaseState s0{{r, 0.0}, momentum_from_velocity(cfg, {0.0, w * r})};
        const auto end = integrate_to(cfg, s0, kTwoPi / w).end;
        EXPECT_LT(norm(end.x - s0.x), 1e-6) << "r = " << r;
        // intermediate positions follow the analytic circle
        const auto mid = integrate_to(cfg, s0, 1.3 / w).end;
        EXPECT_LT(norm(mid.x - Vec2{r * std::cos(1.3), r * std::sin(1.3)}), 1e-8 * r);
    }
}

TEST(Integrator, DriftShrinksWithTolerance) {
    const auto cfg = PotentialConfig::single_center(1.0, 1.5);
    const auto s0 = eccentric_state();
    std::vector<double> drift;
    for (double t : {1e-5, 1e-7, 1e-9, 1e-11}) {
        IntegratorTolerances tol;
        tol.rtol = tol.atol = t;
        const auto res = integrate(cfg, s0, 30.0, tol);
        ASSERT_TRUE(res.ok());
        drift.push_back(res.max_energy_drift());
    }
    for (std::size_t k = 1; k < drift.size(); ++k) EXPECT_LT(drift[k], drift[k - 1]);
    EXPECT_LT(drift.back(), 1e-9);
}

TEST(Integrator, TimeReversal) {
    const auto cfg = PotentialConfig({{-1, 0}, {1, 0}}, {1, 1}, 1.5);
    // wide orbit around both centers
    const PhaseState s0 = circular_state(ModelConfig{2, 1.5, 1, 1}, 4.0);
    IntegratorTolerances tol;
    const auto fwd = integrate(cfg, s0, 5.0, tol);
    ASSERT_TRUE(fwd.ok());
    PhaseState back = fwd.final_state();
    back.p = -back.p;
    const auto bwd = integrate(cfg, back, 5.0, tol);
    ASSERT_TRUE(bwd.ok());
    // observed return error is about 2e-11 at the default tolerances
    EXPECT_LT(norm(bwd.final_state().x - s0.x), 1e-8);
    EXPECT_LT(norm(bwd.final_state().p + s0.p), 1e-8);
}

TEST(Integrator, DenseOutputMatchesEndpoints) {
    const auto cfg = PotentialConfig::single_center(1.0, 1.5);
    const auto s0 = eccentric_state();
    const std::vector<double> times = {0.0, 0.5, 1.7, 4.0, 6.25};
    IntegrationResult res;
    const auto states = integrate_dense(cfg, s0, times, IntegratorTolerances{}, &res);
    ASSERT_EQ(states.size(), times.size());
    EXPECT_TRUE(res.ok());
    for (std::size_t k = 1; k < times.size(); ++k) {
        const auto direct = integrate_to(cfg, s0, times[k]).end;
        EXPECT_LT(norm(states[k].x - direct.x), 1e-8);
    }
}

TEST(Integrator, RadialFallIsFlagged) {
    const auto cfg = model_problem();
    const auto res = integrate(cfg, {{1.0, 0.0}, {0.0, 0.0}}, 50.0);
    EXPECT_EQ(res.status, IntegrationStatus::collision_approach);
    EXPECT_FALSE(res.ok());
    EXPECT_LT(res.min_center_distance, 1e-6);
}
