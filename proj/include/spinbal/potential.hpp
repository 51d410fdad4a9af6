#pragma once

// Inf-shifted potentials Q^ = Q - inf Q on T^n together with their zero sets.
// These are the running costs consumed by the solvers; every type exposes
//   static constexpr int dim;
//   value, difference, gradient, hessian, displacement, distance, imbalance.

#include "spinbal/rotor_model.hpp"
#include "spinbal/steady.hpp"

#include <cmath>

namespace spinbal {

/// One balancing head on T^2, coordinates (alpha, gamma).
class HeadPotential {
public:
    static constexpr int dim = 2;
    using Point = Vec<2>;

    HeadPotential() = default;
    explicit HeadPotential(const HeadProblem& h)
        : head_(h), inf_(potential_infimum(h)), zeros_(ZeroSet::of(h.c)) {}

    const HeadProblem& head() const { return head_; }
    const ZeroSet& zeros() const { return zeros_; }
    double beta() const { return head_.beta; }

    double value(const Point& x) const { return std::max(0.0, potential(head_, x[0], x[1]) - inf_); }
    double difference(const Point& x, const Point& y) const { return potential_difference(head_, x, y); }
    Point gradient(const Point& x) const { return potential_grad(head_, x[0], x[1]); }
    Mat<2> hessian(const Point& x) const { return potential_hessian(head_, x[0], x[1]); }

    Point displacement(const Point& x) const { return zeros_.displacement(x); }
    double distance(const Point& x) const { return zeros_.distance(x); }

    /// Physical G_i - inf G_i [N^2].
    double imbalance(const Point& x) const { return 2.0 * head_.scale * head_.scale * value(x) / head_.beta; }

    /// Canonical steady optimum of this head.
    Point optimum() const {
        const SteadyOptimum o = steady_argmin(head_.c);
        return Point(o.alpha_bar, o.gamma_bar);
    }

private:
    HeadProblem head_;
    double inf_ = 0.0;
    ZeroSet zeros_;
};

/// Both heads on T^4; Q^ = Q^_1(alpha1, gamma1) + Q^_2(alpha2, gamma2).
class RotorPotential {
public:
    static constexpr int dim = 4;
    using Point = Vec<4>;

    RotorPotential() = default;
    explicit RotorPotential(const RotorConfig& cfg)
        : heads_{HeadPotential(head_problem(cfg, 1)), HeadPotential(head_problem(cfg, 2))} {}

    const HeadPotential& head(int i) const { return heads_[i - 1]; }
    double beta() const { return heads_[0].beta(); }

    double value(const Point& x) const { return heads_[0].value(x.head<2>()) + heads_[1].value(x.tail<2>()); }
    double difference(const Point& x, const Point& y) const {
        return heads_[0].difference(x.head<2>(), y.head<2>()) + heads_[1].difference(x.tail<2>(), y.tail<2>());
    }
    Point gradient(const Point& x) const {
        Point g;
        g << heads_[0].gradient(x.head<2>()), heads_[1].gradient(x.tail<2>());
        return g;
    }
    Mat<4> hessian(const Point& x) const {
        Mat<4> H = Mat<4>::Zero();
        H.topLeftCorner<2, 2>() = heads_[0].hessian(x.head<2>());
        H.bottomRightCorner<2, 2>() = heads_[1].hessian(x.tail<2>());
        return H;
    }
    Point displacement(const Point& x) const {
        Point d;
        d << heads_[0].displacement(x.head<2>()), heads_[1].displacement(x.tail<2>());
        return d;
    }
    double distance(const Point& x) const { return displacement(x).norm(); }
    double imbalance(const Point& x) const {
        return heads_[0].imbalance(x.head<2>()) + heads_[1].imbalance(x.tail<2>());
    }
    Point optimum() const {
        Point p;
        p << heads_[0].optimum(), heads_[1].optimum();
        return p;
    }

private:
    HeadPotential heads_[2];
};

/// Gap angle of a head without imbalance (c = 0): Q^(gamma) = beta/2 cos^2(gamma).
/// The intermediate angle decouples and stays constant.
class PendulumPotential {
public:
    static constexpr int dim = 1;
    using Point = Vec<1>;

    explicit PendulumPotential(double beta) : beta_(beta) {}

    double beta() const { return beta_; }
    double value(const Point& x) const {
        const double c = std::cos(x[0]);
        return 0.5 * beta_ * c * c;
    }
    double difference(const Point& x, const Point& y) const {
        // cos^2 x - cos^2 y = sin(y - x) sin(y + x)
        return 0.5 * beta_ * std::sin(y[0] - x[0]) * std::sin(y[0] + x[0]);
    }
    Point gradient(const Point& x) const { return Point(-0.5 * beta_ * std::sin(2.0 * x[0])); }
    Mat<1> hessian(const Point& x) const { return Mat<1>(-beta_ * std::cos(2.0 * x[0])); }
    Point displacement(const Point& x) const {
        const double a = angle_delta(x[0], 0.5 * kPi);
        const double b = angle_delta(x[0], 1.5 * kPi);
        return Point(std::abs(a) <= std::abs(b) ? a : b);
    }
    double distance(const Point& x) const { return std::abs(displacement(x)[0]); }
    double imbalance(const Point& x) const { return 2.0 * value(x) / beta_; }
    Point optimum() const { return Point(0.5 * kPi); }

private:
    double beta_ = 1.0;
};

}  // namespace spinbal
