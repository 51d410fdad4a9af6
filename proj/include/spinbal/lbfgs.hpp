#pragma once

// Limited-memory BFGS with a user-supplied initial inverse-Hessian
// (preconditioner) and backtracking Armijo line search.
//
// The objective decrease is requested from the problem directly instead of
// being formed as f(x_new) - f(x_old); problems with an accurate difference
// formula can then keep making verified progress long after the absolute
// objective value has stopped resolving it.

#include <Eigen/Core>

#include <cmath>
#include <deque>
#include <string>
#include <vector>

namespace spinbal {

struct LbfgsOptions {
    int memory = 10;
    int max_iterations = 20000;
    double tolerance = 1e-8;  ///< on Problem::stationarity(g)
    double armijo = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 60;
};

struct LbfgsResult {
    int iterations = 0;
    bool converged = false;
    double stationarity = 0.0;
    std::string stop_reason;
    /// Objective after each accepted step, accumulated from verified decreases.
    std::vector<double> history;
};

/// Problem requirements:
///   double value(const VectorXd& x);
///   void gradient(const VectorXd& x, VectorXd& g);
///   double decrease(const VectorXd& x_new, const VectorXd& x_old);  // f(x_new) - f(x_old)
///   double stationarity(const VectorXd& g);
///   void precondition(const VectorXd& r, VectorXd& z);               // z = M^{-1} r
template <class Problem>
LbfgsResult minimize_lbfgs(Problem& problem, Eigen::VectorXd& x, const LbfgsOptions& opts) {
    using Eigen::VectorXd;
    LbfgsResult result;

    struct Pair {
        VectorXd s, y;
        double rho;
    };
    std::deque<Pair> pairs;

    double f = problem.value(x);
    result.history.push_back(f);
    VectorXd g(x.size()), g_new(x.size()), p(x.size()), z(x.size()), x_trial(x.size());
    problem.gradient(x, g);
    std::vector<double> alpha_coef;

    auto two_loop = [&](const VectorXd& grad, VectorXd& dir) {
        VectorXd q = grad;
        alpha_coef.assign(pairs.size(), 0.0);
        for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
            alpha_coef[i] = pairs[i].rho * pairs[i].s.dot(q);
            q -= alpha_coef[i] * pairs[i].y;
        }
        problem.precondition(q, z);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const double b = pairs[i].rho * pairs[i].y.dot(z);
            z += (alpha_coef[i] - b) * pairs[i].s;
        }
        dir = -z;
    };

    for (int it = 0; it < opts.max_iterations; ++it) {
        result.stationarity = problem.stationarity(g);
        if (result.stationarity <= opts.tolerance) {
            result.converged = true;
            result.stop_reason = "tolerance reached";
            result.iterations = it;
            return result;
        }

        two_loop(g, p);
        double slope = g.dot(p);
        if (!(slope < 0.0)) {
            pairs.clear();
            two_loop(g, p);
            slope = g.dot(p);
        }

        bool accepted = false;
        double step = 1.0;
        double delta = 0.0;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            step = 1.0;
            for (int k = 0; k < opts.max_backtracks; ++k) {
                x_trial = x + step * p;
                delta = problem.decrease(x_trial, x);
                if (std::isfinite(delta) && delta <= opts.armijo * step * slope) {
                    accepted = true;
                    break;
                }
                step *= opts.backtrack;
            }
            if (!accepted && !pairs.empty()) {
                // memory produced a poor direction; restart from the preconditioned gradient
                pairs.clear();
                two_loop(g, p);
                slope = g.dot(p);
            } else {
                break;
            }
        }
        if (!accepted) {
            result.iterations = it;
            result.stop_reason = "line search failed";
            return result;
        }

        problem.gradient(x_trial, g_new);
        VectorXd s = x_trial - x;
        VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-300 && sy > 1e-12 * s.norm() * y.norm()) {
            pairs.push_back({std::move(s), std::move(y), 1.0 / sy});
            if (static_cast<int>(pairs.size()) > opts.memory) pairs.pop_front();
        }
        x.swap(x_trial);
        g.swap(g_new);
        f += delta;
        result.history.push_back(f);
    }
    result.stationarity = problem.stationarity(g);
    result.converged = result.stationarity <= opts.tolerance;
    result.iterations = opts.max_iterations;
    result.stop_reason = result.converged ? "tolerance reached" : "iteration limit";
    return result;
}

/// Factored symmetric tridiagonal system (Thomas algorithm), reused across solves.
class Tridiagonal {
public:
    Tridiagonal() = default;
    /// diag has n entries; off holds the n-1 sub/super-diagonal entries.
    Tridiagonal(const std::vector<double>& diag, const std::vector<double>& off)
        : off_(off), denom_(diag.size()), upper_(diag.size()) {
        const std::size_t n = diag.size();
        denom_[0] = diag[0];
        for (std::size_t i = 1; i < n; ++i) {
            upper_[i - 1] = off_[i - 1] / denom_[i - 1];
            denom_[i] = diag[i] - off_[i - 1] * upper_[i - 1];
        }
    }

    std::size_t size() const { return denom_.size(); }

    /// Solves in place for a strided right-hand side: entries data[i * stride].
    void solve(double* data, std::size_t stride) const {
        const std::size_t n = denom_.size();
        data[0] /= denom_[0];
        for (std::size_t i = 1; i < n; ++i)
            data[i * stride] = (data[i * stride] - off_[i - 1] * data[(i - 1) * stride]) / denom_[i];
        for (std::size_t i = n - 1; i-- > 0;) data[i * stride] -= upper_[i] * data[(i + 1) * stride];
    }

private:
    std::vector<double> off_;
    std::vector<double> denom_;
    std::vector<double> upper_;
};

}  // namespace spinbal
