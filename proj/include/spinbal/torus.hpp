#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>

namespace spinbal {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;

template <int Dim>
using Mat = Eigen::Matrix<double, Dim, Dim>;

/// Canonical representative of an angle in [0, 2pi).
inline double wrap_angle(double x) {
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    // fmod of a tiny negative value can round up to exactly 2pi
    if (r >= kTwoPi) r = 0.0;
    return r;
}

/// Signed shortest displacement from `from` to `to` on the circle, in [-pi, pi).
inline double angle_delta(double from, double to) {
    double d = std::fmod(to - from + kPi, kTwoPi);
    if (d < 0.0) d += kTwoPi;
    return d - kPi;
}

/// Per-coordinate shortest displacement on the flat torus.
template <int Dim>
Vec<Dim> torus_delta(const Vec<Dim>& from, const Vec<Dim>& to) {
    Vec<Dim> d;
    for (int i = 0; i < Dim; ++i) d[i] = angle_delta(from[i], to[i]);
    return d;
}

/// Flat geodesic distance on T^Dim.
template <int Dim>
double torus_distance(const Vec<Dim>& a, const Vec<Dim>& b) {
    return torus_delta<Dim>(a, b).norm();
}

template <int Dim>
Vec<Dim> wrap(const Vec<Dim>& x) {
    Vec<Dim> r;
    for (int i = 0; i < Dim; ++i) r[i] = wrap_angle(x[i]);
    return r;
}

/// Diameter bound 2 pi sqrt(n) entering the stabilization constants
/// (the exact flat-torus diameter is pi sqrt(n)).
inline double diameter_bound(int n) { return kTwoPi * std::sqrt(static_cast<double>(n)); }

}  // namespace spinbal
