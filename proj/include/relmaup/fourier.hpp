#pragma once

// Trigonometric interpolation of periodic samples f_j = f(j/N) on [0,1).
// A plain O(N^2) DFT is used; grids here are at most a few thousand points.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "relmaup/vec2.hpp"

namespace relmaup {

class TrigInterpolant {
public:
    TrigInterpolant() = default;

    explicit TrigInterpolant(std::span<const double> samples) : n_(samples.size()) {
        const std::size_t n = n_;
        coeff_.assign(n, {});
        std::vector<std::complex<double>> tw(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double th = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
            tw[j] = {std::cos(th), std::sin(th)};
        }
        for (std::size_t k = 0; k < n; ++k) {
            std::complex<double> acc{};
            for (std::size_t j = 0; j < n; ++j) acc += samples[j] * tw[(j * k) % n];
            coeff_[k] = acc / static_cast<double>(n);
        }
    }

    std::size_t size() const { return n_; }
    double mean() const { return coeff_.empty() ? 0.0 : coeff_[0].real(); }

    double value(double s) const { return eval(s, 0); }
    double derivative(double s) const { return eval(s, 1); }
    double second_derivative(double s) const { return eval(s, 2); }

    /// int_0^s f; the mean contributes linearly so the result is not periodic.
    double integral(double s) const { return mean() * s + eval(s, -1); }

private:
    // Real samples give c_{-k} = conj(c_k), so only k <= N/2 is visited. The
    // Nyquist mode of an even grid is taken as c cos(pi N s). order -1 is the
    // zero-mean antiderivative vanishing at s = 0.
    double eval(double s, int order) const {
        const std::size_t n = n_;
        if (n == 0) return 0.0;
        double acc = order == 0 ? mean() : 0.0;
        const double two_pi = 2.0 * std::numbers::pi;
        const std::complex<double> base{std::cos(two_pi * s), std::sin(two_pi * s)};
        std::complex<double> e = 1.0;
        for (std::size_t k = 1; 2 * k <= n; ++k) {
            // recompute periodically to keep the recurrence from drifting
            if (k % 64 == 0) {
                const double th = two_pi * static_cast<double>(k) * s;
                e = {std::cos(th), std::sin(th)};
            } else {
                e *= base;
            }
            const double w = two_pi * static_cast<double>(k);
            std::complex<double> term = coeff_[k] * e;
            if (order == -1) {
                term = coeff_[k] * (e - 1.0) / std::complex<double>(0.0, w);
            } else {
                for (int o = 0; o < order; ++o) term *= std::complex<double>(0.0, w);
            }
            acc += (2 * k == n ? 1.0 : 2.0) * term.real();
        }
        return acc;
    }

    std::size_t n_ = 0;
    std::vector<std::complex<double>> coeff_;
};

/// Componentwise interpolant of a periodic planar curve.
class CurveInterpolant {
public:
    CurveInterpolant() = default;

    explicit CurveInterpolant(std::span<const Vec2> pts) {
        std::vector<double> xs(pts.size()), ys(pts.size());
        for (std::size_t j = 0; j < pts.size(); ++j) {
            xs[j] = pts[j].x;
            ys[j] = pts[j].y;
        }
        x_ = TrigInterpolant(xs);
        y_ = TrigInterpolant(ys);
    }

    Vec2 value(double s) const { return {x_.value(s), y_.value(s)}; }
    Vec2 derivative(double s) const { return {x_.derivative(s), y_.derivative(s)}; }
    std::size_t size() const { return x_.size(); }

private:
    TrigInterpolant x_, y_;
};

}  // namespace relmaup
