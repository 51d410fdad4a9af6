#pragma once

// Closed-form steady optima: minimizers of
//   g(alpha, gamma; c) = |cos(gamma) e^{i alpha} - c|^2
// per head, and balanceability predicates for the whole rotor.

#include "spinbal/rotor_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace spinbal {

/// Canonical minimizer of g with alpha in [0, 2pi), gamma in [0, pi/2].
struct SteadyOptimum {
    double alpha_bar = 0.0;
    double gamma_bar = 0.5 * kPi;
    double residual = 0.0;    ///< inf g, in c-units
    bool degenerate = false;  ///< c = 0: minimizers form the circles gamma = pi/2, 3pi/2
};

inline double steady_g(const Vec2& c, double alpha, double gamma) {
    const double cg = std::cos(gamma);
    const double ex = cg * std::cos(alpha) - c.x();
    const double ey = cg * std::sin(alpha) - c.y();
    return ex * ex + ey * ey;
}

inline SteadyOptimum steady_argmin(const Vec2& c) {
    SteadyOptimum out;
    const double norm = c.norm();
    if (norm == 0.0) {
        out.degenerate = true;
        out.alpha_bar = 0.0;
        out.gamma_bar = 0.5 * kPi;
        out.residual = 0.0;
        return out;
    }
    out.alpha_bar = wrap_angle(std::atan2(c.y(), c.x()));
    out.gamma_bar = std::acos(std::min(1.0, norm));
    const double excess = std::max(0.0, norm - 1.0);
    out.residual = excess * excess;
    return out;
}

/// Every minimizer of one head's potential on T^2.
///
/// For c != 0 these are (a, +-g) and (a + pi, pi -+ g) with (a, g) the
/// canonical optimum (two distinct points when g = 0). For c = 0 the set is
/// the pair of circles gamma = pi/2 and gamma = 3pi/2.
class ZeroSet {
public:
    ZeroSet() = default;

    static ZeroSet of(const Vec2& c) {
        ZeroSet z;
        const SteadyOptimum opt = steady_argmin(c);
        if (opt.degenerate) {
            z.circles_ = {0.5 * kPi, 1.5 * kPi};
            return z;
        }
        const double a = opt.alpha_bar, g = opt.gamma_bar;
        const std::array<Vec2, 4> candidates = {Vec2(a, g), Vec2(a, -g), Vec2(a + kPi, kPi - g),
                                                Vec2(a + kPi, kPi + g)};
        for (const Vec2& p : candidates) {
            const Vec2 w = wrap<2>(p);
            const bool dup = std::any_of(z.points_.begin(), z.points_.end(),
                                         [&](const Vec2& q) { return torus_distance<2>(q, w) < 1e-14; });
            if (!dup) z.points_.push_back(w);
        }
        return z;
    }

    const std::vector<Vec2>& points() const { return points_; }
    /// gamma levels of the circles of minimizers (empty unless degenerate).
    const std::vector<double>& circles() const { return circles_; }
    bool degenerate() const { return !circles_.empty(); }

    /// Nearest minimizer to x, expressed as a displacement from x (torus lift).
    Vec2 displacement(const Vec2& x) const {
        Vec2 best = Vec2::Zero();
        double best_d = std::numeric_limits<double>::infinity();
        for (const Vec2& p : points_) {
            const Vec2 d = torus_delta<2>(x, p);
            if (d.norm() < best_d) {
                best_d = d.norm();
                best = d;
            }
        }
        for (double level : circles_) {
            const Vec2 d(0.0, angle_delta(x[1], level));
            if (d.norm() < best_d) {
                best_d = d.norm();
                best = d;
            }
        }
        return best;
    }

    double distance(const Vec2& x) const { return displacement(x).norm(); }

private:
    std::vector<Vec2> points_;
    std::vector<double> circles_;
};

/// Cartesian position (x, y, z) of one balancing mass.
using MassPosition = Eigen::Vector3d;

struct SteadyState {
    SteadyOptimum head1;
    SteadyOptimum head2;
    /// P_{1,1}, P_{1,2}, P_{2,1}, P_{2,2}.
    std::array<MassPosition, 4> masses;

    double total_residual() const { return head1.residual + head2.residual; }
    AngleState angles() const { return {head1.alpha_bar, head1.gamma_bar, head2.alpha_bar, head2.gamma_bar}; }
};

inline SteadyState steady_state(const RotorConfig& cfg) {
    SteadyState out;
    out.head1 = steady_argmin(head_problem(cfg, 1).c);
    out.head2 = steady_argmin(head_problem(cfg, 2).c);
    auto place = [](double r, double angle, double z) {
        return MassPosition(r * std::cos(angle), r * std::sin(angle), z);
    };
    out.masses[0] = place(cfg.r1, out.head1.alpha_bar - out.head1.gamma_bar, -cfg.a);
    out.masses[1] = place(cfg.r1, out.head1.alpha_bar + out.head1.gamma_bar, -cfg.a);
    out.masses[2] = place(cfg.r2, out.head2.alpha_bar - out.head2.gamma_bar, cfg.b);
    out.masses[3] = place(cfg.r2, out.head2.alpha_bar + out.head2.gamma_bar, cfg.b);
    return out;
}

struct Balanceability {
    bool head1 = false;
    bool head2 = false;
    bool overall() const { return head1 && head2; }
};

/// Full compensation is possible in plane i iff m_i r_i >= |F_i| / (2 omega^2).
inline Balanceability can_fully_balance(const RotorConfig& cfg) {
    const PlaneForces pf = decompose_imbalance(cfg);
    auto ok = [&](int i) {
        return cfg.mass(i) * cfg.radius(i) >= pf[i].norm() / (2.0 * cfg.omega * cfg.omega);
    };
    return {ok(1), ok(2)};
}

/// Strict version of can_fully_balance on both heads; gates exponential decay.
inline bool exp_threshold(const RotorConfig& cfg) {
    const PlaneForces pf = decompose_imbalance(cfg);
    auto strict = [&](int i) {
        return cfg.mass(i) * cfg.radius(i) > pf[i].norm() / (2.0 * cfg.omega * cfg.omega);
    };
    return strict(1) && strict(2);
}

}  // namespace spinbal
