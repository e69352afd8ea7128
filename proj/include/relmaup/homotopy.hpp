#pragma once

// Homotopy classes of loops in the N-punctured plane. The fundamental group is
// free on generators a_1..a_N; a loop's class is read off from the ordered,
// signed crossings of one cut ray per center (a_i for a counter-clockwise
// crossing of ray i). Loops are compared up to cyclic permutation of the
// reduced word (free homotopy).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relmaup/errors.hpp"
#include "relmaup/loopspace.hpp"
#include "relmaup/potentials.hpp"
#include "relmaup/vec2.hpp"

namespace relmaup {

/// Freely reduced word; letters are signed 1-based generator indices.
class HomotopyWord {
public:
    HomotopyWord() = default;

    explicit HomotopyWord(std::vector<int> letters) : letters_(free_reduce(std::move(letters))) {
        for (int l : letters_)
            if (l == 0) throw InvalidWord("generator index 0 is not allowed");
    }

    /// Parses "a1 a2^-1", "a1a2^-1" or "a1^2 a2"; "e" or "" is the empty word.
    static HomotopyWord parse(std::string_view text) {
        std::vector<int> letters;
        std::size_t i = 0;
        auto skip_space = [&] {
            while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        };
        auto read_int = [&](bool allow_sign) -> long {
            const std::size_t start = i;
            if (allow_sign && i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
            const std::size_t digits = i;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            if (i == digits) throw InvalidWord("expected an integer in '" + std::string(text) + "'");
            return std::strtol(std::string(text.substr(start, i - start)).c_str(), nullptr, 10);
        };
        skip_space();
        if (text.substr(i) == "e" || text.substr(i) == "1") return {};
        while (skip_space(), i < text.size()) {
            if (text[i] != 'a') throw InvalidWord("unexpected character in '" + std::string(text) + "'");
            ++i;
            const long g = read_int(false);
            long power = 1;
            if (i < text.size() && text[i] == '^') {
                ++i;
                power = read_int(true);
            }
            if (g <= 0) throw InvalidWord("generator indices start at 1");
            for (long k = 0; k < std::labs(power); ++k)
                letters.push_back(power > 0 ? static_cast<int>(g) : -static_cast<int>(g));
        }
        return HomotopyWord(std::move(letters));
    }

    const std::vector<int>& letters() const { return letters_; }
    bool empty() const { return letters_.empty(); }
    std::size_t length() const { return letters_.size(); }

    /// Signed letter count per generator (abelianization).
    std::vector<int> winding_vector(std::size_t generators) const {
        std::vector<int> w(generators, 0);
        for (int l : letters_) {
            const auto g = static_cast<std::size_t>(std::abs(l));
            if (g > generators) throw InvalidWord("letter a" + std::to_string(g) + " exceeds generator count");
            w[g - 1] += l > 0 ? 1 : -1;
        }
        return w;
    }

    std::size_t max_generator() const {
        std::size_t g = 0;
        for (int l : letters_) g = std::max(g, static_cast<std::size_t>(std::abs(l)));
        return g;
    }

    HomotopyWord inverse() const {
        std::vector<int> inv(letters_.rbegin(), letters_.rend());
        for (int& l : inv) l = -l;
        return HomotopyWord(std::move(inv));
    }

    /// Strips inverse pairs at the two ends (conjugation-invariant core).
    std::vector<int> cyclically_reduced() const {
        std::size_t lo = 0;
        std::size_t hi = letters_.size();
        while (hi - lo >= 2 && letters_[lo] == -letters_[hi - 1]) {
            ++lo;
            --hi;
        }
        return {letters_.begin() + static_cast<std::ptrdiff_t>(lo),
                letters_.begin() + static_cast<std::ptrdiff_t>(hi)};
    }

    /// False when the cyclic word is a proper power v^k, k >= 2.
    bool is_primitive() const {
        const auto w = cyclically_reduced();
        const std::size_t n = w.size();
        for (std::size_t p = 1; p < n; ++p) {
            if (n % p != 0) continue;
            bool periodic = true;
            for (std::size_t j = p; j < n && periodic; ++j) periodic = w[j] == w[j - p];
            if (periodic) return false;
        }
        return n > 0;
    }

    std::string to_string() const {
        if (letters_.empty()) return "e";
        std::string s;
        for (std::size_t j = 0; j < letters_.size(); ++j) {
            if (j) s += ' ';
            s += 'a' + std::to_string(std::abs(letters_[j]));
            if (letters_[j] < 0) s += "^-1";
        }
        return s;
    }

    friend bool operator==(const HomotopyWord&, const HomotopyWord&) = default;

    static std::vector<int> free_reduce(std::vector<int> in) {
        std::vector<int> out;
        out.reserve(in.size());
        for (int l : in) {
            if (!out.empty() && out.back() == -l) out.pop_back();
            else out.push_back(l);
        }
        return out;
    }

private:
    std::vector<int> letters_;
};

/// Free homotopy: equal cyclically reduced words up to rotation.
inline bool same_class(const HomotopyWord& a, const HomotopyWord& b) {
    const auto x = a.cyclically_reduced();
    const auto y = b.cyclically_reduced();
    if (x.size() != y.size()) return false;
    if (x.empty()) return true;
    const std::size_t n = x.size();
    for (std::size_t shift = 0; shift < n; ++shift) {
        bool eq = true;
        for (std::size_t j = 0; j < n && eq; ++j) eq = x[j] == y[(j + shift) % n];
        if (eq) return true;
    }
    return false;
}

/// Label shared by a class, its rotations and its inverse; used to tag
/// solutions that may coincide up to time reversal.
inline std::string orbit_label(const HomotopyWord& w) {
    auto best = [](std::vector<int> v) {
        std::vector<int> m = v;
        for (std::size_t s = 1; s < v.size(); ++s) {
            std::rotate(v.begin(), v.begin() + 1, v.end());
            m = std::min(m, v);
        }
        return m;
    };
    const auto a = best(w.cyclically_reduced());
    const auto b = best(w.inverse().cyclically_reduced());
    return HomotopyWord(std::min(a, b)).to_string();
}

/// One cut ray per center; together they make the plane minus the rays
/// simply connected, so crossing sequences spell free-group words.
class CutSystem {
public:
    struct Ray {
        Vec2 base;
        Vec2 direction;  // unit
    };

    static constexpr double kAngleIncrement = 0.05;

    /// Rays point away from the centroid of the centers, rotated in steps of
    /// kAngleIncrement (0, +d, -d, +2d, ...) until disjoint and clear of
    /// other centers.
    static CutSystem build(const std::vector<Vec2>& centers) {
        if (centers.empty()) throw InvalidConfig("cut system needs at least one center");
        Vec2 centroid{};
        for (const auto& s : centers) centroid += s;
        centroid /= static_cast<double>(centers.size());

        double scale = 1.0;
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < centers.size(); ++i)
            for (std::size_t j = i + 1; j < centers.size(); ++j)
                gap = std::min(gap, norm(centers[i] - centers[j]));
        if (std::isfinite(gap)) scale = gap;
        const double clearance = 1e-3 * scale;

        CutSystem cuts;
        for (std::size_t i = 0; i < centers.size(); ++i) {
            Vec2 outward = centers[i] - centroid;
            const double len = norm(outward);
            const double theta0 = len > 1e-9 * scale ? std::atan2(outward.y, outward.x) : 0.0;
            bool placed = false;
            for (int k = 0; k < 2 * static_cast<int>(std::numbers::pi / kAngleIncrement) && !placed; ++k) {
                const int step = (k + 1) / 2 * (k % 2 == 1 ? 1 : -1);
                const double th = theta0 + step * kAngleIncrement;
                const Ray ray{centers[i], Vec2{std::cos(th), std::sin(th)}};
                bool ok = true;
                for (std::size_t j = 0; j < centers.size() && ok; ++j)
                    if (j != i && distance_to_ray(ray, centers[j]) <= clearance) ok = false;
                for (const auto& other : cuts.rays_)
                    if (ok && rays_intersect(ray, other)) ok = false;
                if (ok) {
                    cuts.rays_.push_back(ray);
                    placed = true;
                }
            }
            if (!placed) throw InvalidConfig("could not place disjoint cut rays");
        }
        return cuts;
    }

    static CutSystem build(const PotentialConfig& cfg) { return build(cfg.centers()); }

    const std::vector<Ray>& rays() const { return rays_; }
    std::size_t size() const { return rays_.size(); }

    static double distance_to_ray(const Ray& r, const Vec2& p) {
        const double t = dot(p - r.base, r.direction);
        if (t <= 0.0) return norm(p - r.base);
        return std::abs(cross(r.direction, p - r.base));
    }

    static bool rays_intersect(const Ray& a, const Ray& b) {
        const double denom = cross(a.direction, b.direction);
        const Vec2 d = b.base - a.base;
        if (std::abs(denom) < 1e-14) {
            // parallel: overlap only if collinear and pointing at each other or the same way
            if (std::abs(cross(d, a.direction)) > 1e-12 * (1.0 + norm(d))) return false;
            return dot(d, a.direction) >= 0.0 || dot(-d, b.direction) >= 0.0;
        }
        const double ta = cross(d, b.direction) / denom;
        const double tb = cross(d, a.direction) / denom;
        return ta >= 0.0 && tb >= 0.0;
    }

private:
    std::vector<Ray> rays_;
};

namespace detail {

inline double loop_scale(const DiscreteLoop& loop) {
    double s = 0.0;
    for (const auto& p : loop) s = std::max(s, std::max(std::abs(p.x), std::abs(p.y)));
    return std::max(s, 1.0);
}

}  // namespace detail

/// Signed turning number of the loop about center.
inline int winding_number(const DiscreteLoop& loop, const Vec2& center, double delta_angle = 0.1) {
    const std::size_t n = loop.size();
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const Vec2 a = loop[j] - center;
        const Vec2 b = loop[(j + 1) % n] - center;
        if (norm2(a) == 0.0) throw CollisionPoint("sample " + std::to_string(j) + " on the center");
        const double ang = std::atan2(cross(a, b), dot(a, b));
        if (std::abs(ang) >= std::numbers::pi - delta_angle)
            throw AmbiguousWinding("segment " + std::to_string(j) +
                                   " subtends too large an angle; refine the grid");
        total += ang;
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

inline std::vector<int> winding_vector(const DiscreteLoop& loop, const PotentialConfig& cfg,
                                       double delta_angle = 0.1) {
    std::vector<int> w;
    for (const auto& s : cfg.centers()) w.push_back(winding_number(loop, s, delta_angle));
    return w;
}

/// Reads the reduced word of signed cut crossings, starting at sample 0.
inline HomotopyWord homotopy_word(const DiscreteLoop& loop, const CutSystem& cuts) {
    const std::size_t n = loop.size();
    const double tol = 1e-13 * detail::loop_scale(loop);
    const auto& rays = cuts.rays();

    for (std::size_t j = 0; j < n; ++j)
        for (const auto& r : rays) {
            const Vec2 rel = loop[j] - r.base;
            if (norm(rel) <= tol)
                throw CollisionPoint("sample " + std::to_string(j) + " on a center");
            if (dot(rel, r.direction) >= 0.0 && std::abs(cross(r.direction, rel)) <= tol)
                throw SampleOnCut("sample " + std::to_string(j) + " lies on a cut ray");
        }

    std::vector<int> letters;
    struct Hit {
        double t;
        int letter;
    };
    std::vector<Hit> hits;
    for (std::size_t j = 0; j < n; ++j) {
        const Vec2 a = loop[j];
        const Vec2 seg = loop[(j + 1) % n] - a;
        hits.clear();
        for (std::size_t i = 0; i < rays.size(); ++i) {
            const auto& r = rays[i];
            const double denom = cross(seg, r.direction);
            if (denom == 0.0) continue;
            const Vec2 d = r.base - a;
            const double t = cross(d, r.direction) / denom;
            const double tau = cross(d, seg) / denom;
            if (t <= 0.0 || t >= 1.0 || tau < 0.0) continue;
            if (tau == 0.0)
                throw CollisionPoint("segment " + std::to_string(j) + " passes through a center");
            const int sign = cross(r.direction, seg) > 0.0 ? 1 : -1;
            hits.push_back({t, sign * static_cast<int>(i + 1)});
        }
        std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) { return x.t < y.t; });
        for (std::size_t k = 1; k < hits.size(); ++k)
            if (hits[k].t - hits[k - 1].t < 1e-12)
                throw AmbiguousCrossing("segment " + std::to_string(j) +
                                        " crosses two rays at nearly the same point");
        for (const auto& h : hits) letters.push_back(h.letter);
    }
    return HomotopyWord(std::move(letters));
}

/// Radial dilation sigma_i + k (u - sigma_i) with k = lambda eps / ||u - sigma_i||.
inline DiscreteLoop push_off(const DiscreteLoop& loop, const Vec2& center, double epsilon,
                             double lambda, NormChoice choice) {
    if (!(lambda > 1.0 && lambda <= 2.0)) throw InvalidDilation("lambda must lie in (1, 2]");
    if (!(epsilon > 0.0)) throw InvalidDilation("epsilon must be > 0");
    const double dist = distance_to_center(loop, center, choice);
    if (!(dist > 0.0)) throw InvalidDilation("loop touches the center");
    const double k = lambda * epsilon / dist;
    if (!(k > 1.0)) throw InvalidDilation("loop is already at distance >= lambda * epsilon");
    std::vector<Vec2> s(loop.begin(), loop.end());
    for (auto& p : s) p = center + (p - center) * k;
    return DiscreteLoop(std::move(s));
}

inline DiscreteLoop push_off(const DiscreteLoop& loop, const PotentialConfig& cfg,
                             std::size_t center_index, double epsilon, double lambda,
                             NormChoice choice) {
    if (center_index >= cfg.size()) throw InvalidConfig("center index out of range");
    return push_off(loop, cfg.centers()[center_index], epsilon, lambda, choice);
}

}  // namespace relmaup
