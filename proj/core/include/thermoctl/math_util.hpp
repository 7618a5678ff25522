// math_util.hpp — small numeric helpers shared across the library.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>

namespace thermoctl {

/// sin(pi * t) with argument reduction carried out in units of pi.
///
/// Integer t maps to exactly 0 and half-integer t to exactly +/-1, so
/// trigonometric antiderivatives evaluated at rational multiples of the
/// period come out bit-exact instead of O(eps) noise.
inline double sin_pi(double t) noexcept {
    double r = std::fmod(t, 2.0);  // exact: fmod of representable values
    if (r < -1.0) r += 2.0;
    if (r > 1.0) r -= 2.0;
    // fold into [-1/2, 1/2] where sin(pi r) is monotone
    if (r > 0.5) r = 1.0 - r;
    else if (r < -0.5) r = -1.0 - r;
    if (r == 0.0) return 0.0;
    return std::sin(std::numbers::pi * r);
}

/// (1 - e^{-x}) / x, accurate near x = 0.
inline double expm1_ratio(double x) noexcept {
    if (x == 0.0) return 1.0;
    return -std::expm1(-x) / x;
}

// 16-node Gauss-Legendre rule on [-1, 1].
struct GaussLegendre16 {
    static constexpr int n = 16;
    static constexpr std::array<double, 16> node = {
        -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
        -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
        -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
        0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
        0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
        0.9894009349916499};
    static constexpr std::array<double, 16> weight = {
        0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
        0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
        0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
        0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
        0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
        0.0271524594117541};
};

/// Integrate f over [a, b] with a single 16-node Gauss-Legendre panel.
template <typename F>
double gauss16(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (int q = 0; q < GaussLegendre16::n; ++q) {
        acc += GaussLegendre16::weight[q] * f(mid + half * GaussLegendre16::node[q]);
    }
    return acc * half;
}

/// Root of f in a bracketing interval [lo, hi] (f(lo), f(hi) of opposite
/// sign), by bisection with a secant acceleration step.  Tolerance is
/// absolute on the abscissa.
template <typename F>
double refine_root(F&& f, double lo, double hi, double flo, double fhi,
                   double tol = 1e-15) {
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    for (int it = 0; it < 200 && (hi - lo) > tol; ++it) {
        // secant proposal, clamped to the strict interior of the bracket
        double mid = lo + (hi - lo) * (flo / (flo - fhi));
        const double safety = 0.01 * (hi - lo);
        if (!(mid > lo + safety) || !(mid < hi - safety)) mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((flo < 0.0) != (fm < 0.0)) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

/// Deterministic uniform doubles in [0, 1): fixed 64-bit generator and a
/// fixed bits-to-double mapping, so seeded sequences are identical across
/// platforms and standard libraries.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    double next() {
        // splitmix64 step
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }

    /// uniform in [lo, hi)
    double next(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    std::uint64_t state_;
};

}  // namespace thermoctl
