#include <gtest/gtest.h>

#include <cmath>

#include "relmaup/circular.hpp"
#include "relmaup/integrator.hpp"
#include "support.hpp"

using namespace relmaup;
using namespace testing_support;

namespace {

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
    return r;
}

const ModelConfig kUnit{1, 2, 1, 1};

}  // namespace

TEST(Circular, OmegaArithmetic) {
    const double w = omega_from_radius(kUnit, 1.0);
    EXPECT_NEAR(w * w, (-1.0 + std::sqrt(5.0)) / 2.0, 1e-15);
    EXPECT_NEAR(w, 0.78615, 1e-5);
}

TEST(Circular, SubluminalOnLogGrid) {
    for (double a : {1.5, 2.0, 3.0})
        for (double r : log_grid(1e-3, 1e3, 200)) {
            const ModelConfig mc{1, a, 1, 1};
            // below r ~ 1e-2 the gap to c drops under one ulp
            if (r >= 1e-2) {
                EXPECT_LT(r * omega_from_radius(mc, r), mc.c);
            } else {
                EXPECT_LE(r * omega_from_radius(mc, r), mc.c);
            }
        }
}

TEST(Circular, EnergyMatchesHamiltonian) {
    for (const ModelConfig mc : {kUnit, ModelConfig{1, 3, 1, 1}, ModelConfig{2, 1.5, 0.5, 3}}) {
        const auto cfg = mc.potential();
        for (double r : log_grid(1e-3, 1e3, 200)) {
            const double E = energy_of_radius(mc, r);
            EXPECT_LT(rel_err(hamiltonian(cfg, circular_state(mc, r)), E), 1e-10) << "r = " << r;
        }
    }
}

TEST(Circular, ProfileShapeForStrongExponents) {
    for (double a : {2.0, 2.5, 3.0}) {
        const ModelConfig mc{1, a, 1, 1};
        double prev = energy_of_radius(mc, 1e-4);
        EXPECT_GT(prev, 1e3);
        for (double r : log_grid(1e-4, 1e2, 300)) {
            if (r == 1e-4) continue;
            const double E = energy_of_radius(mc, r);
            EXPECT_LT(E, prev);
            prev = E;
        }
        EXPECT_NEAR(energy_of_radius(mc, 1e6), mc.rest_energy(), 1e-6);
        EXPECT_GT(energy_of_radius(mc, 1e3), mc.rest_energy());
    }
}

TEST(Circular, ProfileMinimumForIntermediateExponents) {
    for (double a : {1.25, 1.5, 1.8}) {
        const ModelConfig mc{1.3, a, 0.7, 1.1};
        const double tm = t_min(mc);
        EXPECT_NEAR(tm, mc.kappa / (mc.m * mc.c * mc.c) * std::sqrt(a - 1) / (2 - a), 1e-15 * tm);
        const double fmin = energy_of_t(mc, tm);
        EXPECT_NEAR(fmin, 2.0 * mc.rest_energy() * std::sqrt(a - 1) / a, 1e-12);
        EXPECT_NEAR(fmin, eta(mc), 1e-12);
        EXPECT_GT(energy_of_t(mc, tm * 1.01), fmin);
        EXPECT_GT(energy_of_t(mc, tm * 0.99), fmin);
    }
}

TEST(Circular, Thresholds) {
    EXPECT_DOUBLE_EQ(eta(kUnit), 1.0);
    EXPECT_NEAR(eta(ModelConfig{1, 1.25, 1, 1}), 0.8, 1e-15);
    EXPECT_NEAR(eta(ModelConfig{1, 1.5, 1, 1}), 2.0 * std::sqrt(0.5) / 1.5, 1e-15);
    EXPECT_THROW(eta(ModelConfig{1, 1.0, 1, 1}), InvalidExponent);
}

TEST(Circular, RadiusRoundTrip) {
    for (double a : {2.0, 2.5, 3.0}) {
        const ModelConfig mc{1, a, 1, 1};
        // E - m c^2 falls like r^-2alpha, so beyond r ~ 10 the rounding of E
        // alone moves the root by more than 1e-10
        for (double r0 : log_grid(1e-2, 10, 25)) {
            const auto radii = radius_from_energy(mc, energy_of_radius(mc, r0));
            ASSERT_EQ(radii.size(), 1u);
            EXPECT_LT(rel_err(radii[0], r0), 1e-10);
        }
    }
}

TEST(Circular, TwoRootsBelowRestEnergy) {
    const ModelConfig mc{1, 1.5, 1, 1};
    for (double E : {0.95, 0.97, 0.99}) {
        const auto radii = radius_from_energy(mc, E);
        ASSERT_EQ(radii.size(), 2u);
        const double rm = std::pow(t_min(mc), 1.0 / mc.alpha);
        EXPECT_LT(radii[0], rm);
        EXPECT_GT(radii[1], rm);
        for (double r : radii) EXPECT_LT(rel_err(energy_of_radius(mc, r), E), 1e-10);
    }
    EXPECT_EQ(radius_from_energy(mc, 1.2).size(), 1u);
    EXPECT_THROW(radius_from_energy(mc, 0.9), NoCircularOrbit);
}

TEST(Circular, ThresholdSharpness) {
    for (double a : {2.0, 3.0}) {
        const ModelConfig mc{1, a, 1, 1};
        for (int k = 1; k <= 6; ++k) {
            EXPECT_NO_THROW(radius_from_energy(mc, 1.0 + std::pow(10.0, -k)));
            EXPECT_THROW(radius_from_energy(mc, 1.0 - std::pow(10.0, -k)), NoCircularOrbit);
        }
        EXPECT_THROW(radius_from_energy(mc, 0.5), NoCircularOrbit);
    }
}

TEST(EffectivePotential, Limits) {
    const ModelConfig mc{1, 2.5, 1, 1};
    const double E = 1.3, L = 0.7;
    EXPECT_GT(effective_potential(mc, E, L, 1e-5), 1e10);
    EXPECT_NEAR(effective_potential(mc, E, L, 1e7), (E * E - 1.0), 1e-6);
    EXPECT_NEAR(effective_potential_reduced(mc, E, L, 1e-8), -mc.kappa * mc.kappa / mc.alpha, 1e-6);
    EXPECT_GT(effective_potential_reduced(mc, E, L, 1e4), 1e3);
}

TEST(EffectivePotential, DerivativeMatchesFiniteDifferences) {
    for (double a : {1.5, 2.0, 3.0}) {
        const ModelConfig mc{1, a, 1, 1};
        for (double r : log_grid(0.05, 20, 40)) {
            const double d = 1e-6 * r;
            const double fd = (effective_potential(mc, 1.2, 0.8, r + d) - effective_potential(mc, 1.2, 0.8, r - d)) / (2 * d);
            const double an = effective_potential_derivative(mc, 1.2, 0.8, r);
            EXPECT_LT(std::abs(fd - an) / std::max(std::abs(an), 1e-3), 1e-7) << "alpha " << a << " r " << r;
        }
    }
}

TEST(EffectivePotential, QuadraticFormAtAlphaTwo) {
    for (double E : {0.5, 1.0, 1.5}) {
        for (double L : {0.1, 0.7, 1.0, 2.0}) {  // E = 0.5, L = 1 puts the critical point on a scan node
            const auto q = p2_analysis(kUnit, E, L);
            EXPECT_NEAR(q.p0, 0.25, 1e-15);  // kappa^2 / alpha^2 > 0
            for (double r : {0.3, 1.0, 2.5}) {
                const double x = r * r;
                const double p2 = q.p0 + q.p1 * x + q.p2 * x * x;
                EXPECT_NEAR(effective_potential(kUnit, E, L, r), p2 / (x * x), 1e-12 * (1 + std::abs(p2 / (x * x))));
            }
            EXPECT_FALSE(q.bounded_positive_interval);
            const auto cls = classify_orbits(kUnit, E, L);
            EXPECT_EQ(cls.critical_points.size(), q.critical_points);
            EXPECT_NE(cls.verdict, OrbitVerdict::AnnulusPresent);
            ASSERT_TRUE(cls.p2.has_value());
        }
    }
}

TEST(EffectivePotential, SingleCriticalPointAboveAlphaTwo) {
    for (double a : {2.5, 3.0}) {
        const ModelConfig mc{1, a, 1, 1};
        for (double E : {0.5, 1.0, 1.5, 2.0})
            for (double L : {0.1, 0.5, 1.0, 2.0}) {
                const auto cls = classify_orbits(mc, E, L);
                EXPECT_EQ(cls.critical_points.size(), 1u) << a << " " << E << " " << L;
                EXPECT_TRUE(cls.critical_points.at(0).minimum);
                EXPECT_EQ(cls.verdict, OrbitVerdict::NoBoundedOrbits);
            }
    }
}

TEST(EffectivePotential, IntermediateExponentScanIsConsistent) {
    // non-circular bounded motion at alpha in (1, 2) is reported, not claimed
    const ModelConfig mc{1, 1.5, 1, 1};
    int annuli = 0;
    for (double L = 0.05; L < 3.0; L *= 1.15) {
        const auto cls = classify_orbits(mc, 0.97, L);
        EXPECT_EQ(cls.verdict == OrbitVerdict::AnnulusPresent, !cls.annuli.empty());
        for (const auto& [a, b] : cls.annuli) {
            EXPECT_LT(a, b);
            EXPECT_GT(effective_potential(mc, 0.97, L, std::sqrt(a * b)), 0.0);
        }
        annuli += cls.annuli.empty() ? 0 : 1;
    }
    RecordProperty("annulus_cells", annuli);
}

TEST(Limit, ClassicalRadius) {
    EXPECT_NEAR(classical_radius(1, 3, 1), std::cbrt(1.0 / 6.0), 1e-15);
    EXPECT_NEAR(classical_radius(1, 3, 1), 0.55032, 1e-5);
    EXPECT_THROW(classical_radius(1, 2, 1), NoCircularOrbit);
}

TEST(Limit, ConvergesToClassicalRadius) {
    std::vector<double> cs;
    for (int k = 0; k <= 10; ++k) cs.push_back(std::ldexp(1.0, k));
    const auto tab = nonrelativistic_limit(ModelConfig{1, 3, 1, 1}, 1.0, cs);
    EXPECT_TRUE(tab.strictly_decreasing);
    ASSERT_TRUE(tab.rows.back().radius.has_value());
    EXPECT_LT(std::abs(*tab.rows.back().radius - std::cbrt(1.0 / 6.0)), 1e-4);
    // the psi/Theta root agrees with the direct energy inversion
    for (const auto& row : tab.rows) {
        ModelConfig mc{1, 3, 1, row.c};
        EXPECT_LT(rel_err(*row.radius, radius_from_energy(mc, 1.0 + mc.rest_energy()).at(0)), 1e-9);
    }
    const auto weak = nonrelativistic_limit(ModelConfig{1, 1.5, 1, 1}, 1.0, cs);
    EXPECT_TRUE(weak.strictly_decreasing);
    EXPECT_LT(*weak.rows.back().radius, 1e-2);
    EXPECT_EQ(weak.limit_radius, 0.0);
    EXPECT_THROW(nonrelativistic_limit(ModelConfig{1, 3, 1, 1}, 1.0, {2.0, 1.0}), InvalidConfig);
}

TEST(Limit, PsiShape) {
    const ModelConfig mc{1.7, 3, 1, 1};
    EXPECT_NEAR(psi(mc, 1e-12), mc.kappa, 1e-10);
    EXPECT_NEAR(psi(mc, 1e12), mc.kappa / 2, 1e-10);
    double prev = psi(mc, 1e-6);
    for (double x : log_grid(1e-6, 1e6, 200)) {
        if (x == 1e-6) continue;
        const double v = psi(mc, x);
        EXPECT_LT(v, prev);
        prev = v;
    }
    // agrees with the raw form where that form is accurate
    const double x = 0.8, k = mc.kappa;
    EXPECT_NEAR(psi(mc, x), 2 * x * x / (-k + std::sqrt(k * k + 4 * x * x)) - x, 1e-12);
}

TEST(Circular, UnitExponentEnergyRange) {
    // outside the existence theory; profile energies stay inside (0, m c^2)
    const ModelConfig mc{1, 1.0, 1, 1};
    for (double t : log_grid(1e-6, 1e6, 120)) {
        const double E = energy_of_t(mc, t);
        EXPECT_GT(E, 0.0);
        EXPECT_LT(E, mc.rest_energy());
    }
}
