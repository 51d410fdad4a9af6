#pragma once

// Rigid rotor with two balancing heads: imbalance split into the two
// correction planes, centrifugal balancing forces, the imbalance indicator
// and the per-head nondimensional potentials.

#include "spinbal/errors.hpp"
#include "spinbal/torus.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace spinbal {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;

/// Physical parameters of the rotor and both balancing heads (SI units).
struct RotorConfig {
    double m1 = 0.0;     ///< mass of each balancing mass in head 1 [kg]
    double m2 = 0.0;     ///< mass of each balancing mass in head 2 [kg]
    double r1 = 0.0;     ///< radius of head 1 [m]
    double r2 = 0.0;     ///< radius of head 2 [m]
    double a = 0.0;      ///< head-1 plane sits at z = -a [m]
    double b = 0.0;      ///< head-2 plane sits at z = b [m]
    double omega = 0.0;  ///< angular velocity [rad/s]
    Vec2 F = Vec2::Zero();  ///< imbalance force at O, z-component zero [N]
    Vec2 N = Vec2::Zero();  ///< imbalance moment about O, z-component zero [N m]
    double beta = 1.0;      ///< weight of the imbalance term in the cost

    double mass(int head) const { return head == 1 ? m1 : m2; }
    double radius(int head) const { return head == 1 ? r1 : r2; }

    /// Force magnitude 2 m r omega^2 one head produces with both masses aligned.
    double head_scale(int head) const { return 2.0 * mass(head) * radius(head) * omega * omega; }

    /// Throws InvalidArgument naming the first offending field.
    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(name, "must be finite and > 0");
        };
        auto nonnegative = [](double v, const char* name) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(name, "must be finite and >= 0");
        };
        positive(m1, "m1");
        positive(m2, "m2");
        positive(r1, "r1");
        positive(r2, "r2");
        nonnegative(a, "a");
        nonnegative(b, "b");
        if (!(a + b > 0.0)) throw InvalidArgument("a", "a + b must be > 0");
        positive(omega, "omega");
        if (!F.allFinite()) throw InvalidArgument("F", "must be finite");
        if (!N.allFinite()) throw InvalidArgument("N", "must be finite");
        positive(beta, "beta");
    }
};

/// Head angles (alpha1, gamma1; alpha2, gamma2), stored in [0, 2pi).
class AngleState {
public:
    AngleState() = default;
    AngleState(double alpha1, double gamma1, double alpha2, double gamma2)
        : v_(wrap_angle(alpha1), wrap_angle(gamma1), wrap_angle(alpha2), wrap_angle(gamma2)) {}
    explicit AngleState(const Vec4& v) : AngleState(v[0], v[1], v[2], v[3]) {}

    double alpha1() const { return v_[0]; }
    double gamma1() const { return v_[1]; }
    double alpha2() const { return v_[2]; }
    double gamma2() const { return v_[3]; }

    /// (alpha_i, gamma_i) for head i in {1, 2}.
    Vec2 head(int i) const { return v_.segment<2>(2 * (i - 1)); }
    const Vec4& vector() const { return v_; }

    double distance(const AngleState& other) const { return torus_distance<4>(v_, other.v_); }

private:
    Vec4 v_ = Vec4::Zero();
};

/// Loads equivalent to (F, N) acting in the two correction planes.
struct PlaneForces {
    Vec2 F1;
    Vec2 F2;

    const Vec2& operator[](int head) const { return head == 1 ? F1 : F2; }
};

/// Splits (F, N) into F1 at P1 = (0,0,-a) and F2 at P2 = (0,0,b) with the same
/// resultant force and the same moment about O.
inline PlaneForces decompose_imbalance(const RotorConfig& cfg) {
    const double span = cfg.a + cfg.b;
    if (!(span > 0.0)) throw DegenerateGeometry("plane offsets a + b must be > 0");
    const double Fx = cfg.F.x(), Fy = cfg.F.y(), Nx = cfg.N.x(), Ny = cfg.N.y();
    PlaneForces out;
    out.F1 = Vec2(cfg.b * Fx - Ny, cfg.b * Fy + Nx) / span;
    out.F2 = Vec2(cfg.a * Fx + Ny, cfg.a * Fy - Nx) / span;
    return out;
}

/// Resultant centrifugal force of two masses m at radius r placed at angles
/// alpha -/+ gamma: 2 m r omega^2 cos(gamma) (cos alpha, sin alpha).
inline Vec2 balancing_force(double m, double r, double omega, double alpha, double gamma) {
    if (!(m > 0.0)) throw InvalidArgument("m", "must be > 0");
    if (!(r > 0.0)) throw InvalidArgument("r", "must be > 0");
    const double k = 2.0 * m * r * omega * omega * std::cos(gamma);
    return Vec2(k * std::cos(alpha), k * std::sin(alpha));
}

/// Imbalance indicator and its per-head parts [N^2].
struct Imbalance {
    double G = 0.0;
    double G1 = 0.0;
    double G2 = 0.0;
};

inline Imbalance imbalance_indicator(const RotorConfig& cfg, const AngleState& s) {
    const PlaneForces pf = decompose_imbalance(cfg);
    Imbalance out;
    const Vec2 B1 = balancing_force(cfg.m1, cfg.r1, cfg.omega, s.alpha1(), s.gamma1());
    const Vec2 B2 = balancing_force(cfg.m2, cfg.r2, cfg.omega, s.alpha2(), s.gamma2());
    out.G1 = (B1 + pf.F1).squaredNorm();
    out.G2 = (B2 + pf.F2).squaredNorm();
    out.G = out.G1 + out.G2;
    return out;
}

/// Nondimensional reduced problem of one head.
///
/// With c = -F_i / (2 m_i r_i omega^2) the head potential is
///   Q_i(alpha, gamma) = beta/2 * |cos(gamma) e^{i alpha} - c|^2
/// so that Q_i = beta/2 * G_i / scale^2: the zeros of Q_i are exactly the
/// configurations where B_i cancels F_i.
struct HeadProblem {
    int index = 1;
    Vec2 c = Vec2::Zero();
    double scale = 1.0;  ///< 2 m_i r_i omega^2 [N]
    double beta = 1.0;
};

inline HeadProblem head_problem(const RotorConfig& cfg, int index) {
    if (index != 1 && index != 2) throw InvalidArgument("index", "head index must be 1 or 2");
    const PlaneForces pf = decompose_imbalance(cfg);
    HeadProblem h;
    h.index = index;
    h.scale = cfg.head_scale(index);
    h.c = -pf[index] / h.scale;
    h.beta = cfg.beta;
    return h;
}

/// Unshifted head potential Q_i.
inline double potential(const HeadProblem& h, double alpha, double gamma) {
    const double cg = std::cos(gamma);
    const double ex = cg * std::cos(alpha) - h.c.x();
    const double ey = cg * std::sin(alpha) - h.c.y();
    return 0.5 * h.beta * (ex * ex + ey * ey);
}

inline Vec2 potential_grad(const HeadProblem& h, double alpha, double gamma) {
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    const double cg = std::cos(gamma), sg = std::sin(gamma);
    const double c1 = h.c.x(), c2 = h.c.y();
    return Vec2(h.beta * cg * (c1 * sa - c2 * ca),
                h.beta * sg * (c1 * ca + c2 * sa - cg));
}

inline Mat2 potential_hessian(const HeadProblem& h, double alpha, double gamma) {
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    const double cg = std::cos(gamma), sg = std::sin(gamma);
    const double c1 = h.c.x(), c2 = h.c.y();
    const double proj = c1 * ca + c2 * sa;
    Mat2 H;
    H(0, 0) = h.beta * cg * proj;
    H(1, 1) = h.beta * cg * (proj - cg) + h.beta * sg * sg;
    H(0, 1) = H(1, 0) = h.beta * sg * (-c1 * sa + c2 * ca);
    return H;
}

/// Q_i(x) - Q_i(y) in factored form; accurate when x and y are close.
inline double potential_difference(const HeadProblem& h, const Vec2& x, const Vec2& y) {
    const double cx = std::cos(x[1]), cy = std::cos(y[1]);
    const Vec2 ux(cx * std::cos(x[0]), cx * std::sin(x[0]));
    const Vec2 uy(cy * std::cos(y[0]), cy * std::sin(y[0]));
    return 0.5 * h.beta * (ux - uy).dot(ux + uy - 2.0 * h.c);
}

/// inf over the torus of Q_i: beta/2 * max(0, |c| - 1)^2.
inline double potential_infimum(const HeadProblem& h) {
    const double excess = std::max(0.0, h.c.norm() - 1.0);
    return 0.5 * h.beta * excess * excess;
}

/// Physical per-head imbalance G_i [N^2] recovered from the head potential.
inline double head_imbalance(const HeadProblem& h, double alpha, double gamma) {
    return 2.0 * h.scale * h.scale * potential(h, alpha, gamma) / h.beta;
}

}  // namespace spinbal
