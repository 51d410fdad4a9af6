#pragma once

// Direct transcription of the infinite-horizon problem
//   minimize  int_0^inf 1/2 |Phi'|^2 + Q^(Phi) dt,   Phi(0) = Phi0
// on a finite horizon [0, T] with Nt nodes:
//   K_d = dt * ( sum_{k=0}^{Nt-2} 1/2 |psi_k|^2 + sum_{k=0}^{Nt-1} Q^(Phi_k) ),
//   psi_k = (Phi_{k+1} - Phi_k) / dt.
// The controls are eliminated, states are optimized in the universal cover
// anchored at Phi0, and the terminal node is free.

#include "spinbal/certificate.hpp"
#include "spinbal/errors.hpp"
#include "spinbal/lbfgs.hpp"
#include "spinbal/potential.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace spinbal {

struct Horizon {
    double T = 1.0;
    int Nt = 2;
    double dt = 1.0;

    /// Smallest node count with dt <= dt_max.
    static Horizon make(double T, double dt_max) {
        if (!(T > 0.0)) throw InvalidArgument("T", "must be > 0");
        if (!(dt_max > 0.0)) throw InvalidArgument("dt_max", "must be > 0");
        Horizon h;
        h.T = T;
        h.Nt = std::max(2, static_cast<int>(std::ceil(T / dt_max - 1e-9)) + 1);
        h.dt = T / (h.Nt - 1);
        return h;
    }

    double time(int k) const { return k * dt; }
};

struct HorizonOptions {
    double dt_max = 0.01;
    double T_min = 1.0;
    double T_cap = 40.0;
    double margin = 0.05;  ///< T = (1 + margin) * bound
};

struct HorizonChoice {
    Horizon horizon;
    double bound = 0.0;   ///< sigma2 dist(Phi0, Z) / eps^(N Ntilde)
    bool capped = false;  ///< T_cap replaced the theoretical horizon
};

/// Horizon after which dist(Phi(T), Z) < eps is guaranteed by the polynomial
/// decay estimate.
inline HorizonChoice select_horizon(double dist0, double eps, const DecayCertificate& cert,
                                    const HorizonOptions& opts = {}) {
    if (!(eps > 0.0)) throw InvalidArgument("eps", "must be > 0");
    if (!(cert.d > 0.0)) throw EstimationFailure("horizon bound undefined: Lojasiewicz constant d is 0");
    HorizonChoice out;
    out.bound = cert.sigma2 * dist0 / std::pow(eps, cert.decay_exponent());
    if (!std::isfinite(out.bound)) throw EstimationFailure("horizon bound is not finite");
    double T = out.bound > 0.0 ? (1.0 + opts.margin) * out.bound : opts.T_min;
    T = std::max(T, opts.T_min);
    if (T > opts.T_cap) {
        T = opts.T_cap;
        out.capped = true;
    }
    out.horizon = Horizon::make(T, opts.dt_max);
    return out;
}

template <class Potential>
HorizonChoice select_horizon(const Potential& pot, const typename Potential::Point& phi0, double eps,
                             const DecayCertificate& cert, const HorizonOptions& opts = {}) {
    return select_horizon(pot.distance(phi0), eps, cert, opts);
}

template <int Dim>
struct Trajectory {
    Horizon horizon;
    std::vector<Vec<Dim>> states;    ///< Nt lifted states, states[0] = Phi0
    std::vector<Vec<Dim>> controls;  ///< Nt - 1 velocities
    std::vector<double> imbalance;   ///< physical G - inf G per node
    std::vector<double> energy;      ///< per node, see node_energy
    std::vector<double> distance;    ///< dist(Phi_k, Z)

    int size() const { return static_cast<int>(states.size()); }
    Vec<Dim> canonical(int k) const { return wrap<Dim>(states[k]); }
};

struct SolveReport {
    double objective = 0.0;
    int iterations = 0;
    double grad_norm = 0.0;  ///< max_k |dK_d/dPhi_k|_inf / dt, i.e. in EL-residual units
    double el_residual = 0.0;
    double terminal_velocity = 0.0;
    bool converged = false;
    std::string stop_reason;
    std::vector<double> history;  ///< objective after each accepted step
};

enum class Initializer { StraightLine, Constant };

struct SolveOptions {
    double tol = 1e-8;
    int max_iters = 20000;
    int memory = 10;
    Initializer init = Initializer::StraightLine;
    double t_reach = 1.0;        ///< straight-line initializer reaches Z at min(t_reach, T)
    double precond_shift = 0.0;  ///< 0 selects a value from the Hessian at the steady optimum
    double terminal_velocity_max = 1e-3;
};

/// K_d for a full list of Nt lifted states.
template <class Potential>
double objective(const Potential& pot, const std::vector<Vec<Potential::dim>>& states, double dt) {
    double kinetic = 0.0, running = 0.0;
    for (std::size_t k = 0; k + 1 < states.size(); ++k) kinetic += (states[k + 1] - states[k]).squaredNorm();
    for (const auto& s : states) running += pot.value(s);
    return 0.5 * kinetic / dt + dt * running;
}

/// Gradient of K_d with respect to Phi_1 .. Phi_{Nt-1}, packed node-major.
template <class Potential>
Eigen::VectorXd objective_gradient(const Potential& pot, const std::vector<Vec<Potential::dim>>& states,
                                   double dt) {
    constexpr int D = Potential::dim;
    const int Nt = static_cast<int>(states.size());
    Eigen::VectorXd g(D * (Nt - 1));
    for (int k = 1; k < Nt; ++k) {
        Vec<D> gk = (states[k] - states[k - 1]) / dt + dt * pot.gradient(states[k]);
        if (k + 1 < Nt) gk -= (states[k + 1] - states[k]) / dt;
        g.segment<D>(D * (k - 1)) = gk;
    }
    return g;
}

template <class Potential>
std::pair<double, Eigen::VectorXd> objective_and_gradient(const Potential& pot,
                                                          const Trajectory<Potential::dim>& traj) {
    return {objective(pot, traj.states, traj.horizon.dt), objective_gradient(pot, traj.states, traj.horizon.dt)};
}

/// |(Phi_{k+1} - 2 Phi_k + Phi_{k-1}) / dt^2 - grad Q(Phi_k)| at interior nodes (0 elsewhere).
template <class Potential>
std::vector<double> el_residuals(const Potential& pot, const std::vector<Vec<Potential::dim>>& states, double dt) {
    std::vector<double> r(states.size(), 0.0);
    for (std::size_t k = 1; k + 1 < states.size(); ++k) {
        const auto accel = (states[k + 1] - 2.0 * states[k] + states[k - 1]) / (dt * dt);
        r[k] = (accel - pot.gradient(states[k])).norm();
    }
    return r;
}

/// Discrete energy attached to node k: 1/2 |psi_k|^2 minus the mean of Q^ over
/// the interval [k, k+1] that psi_k spans. The last node uses psi_{Nt-2} and Q^(Phi_{Nt-1}).
template <class Potential>
double node_energy(const Potential& pot, const Trajectory<Potential::dim>& traj, int k) {
    const int last = traj.size() - 1;
    if (k >= last) return 0.5 * traj.controls.back().squaredNorm() - pot.value(traj.states[last]);
    return 0.5 * traj.controls[k].squaredNorm() - 0.5 * (pot.value(traj.states[k]) + pot.value(traj.states[k + 1]));
}

/// Controls and per-node diagnostics for a list of lifted states.
template <class Potential>
Trajectory<Potential::dim> make_trajectory(const Potential& pot, const Horizon& horizon,
                                           std::vector<Vec<Potential::dim>> states) {
    Trajectory<Potential::dim> traj;
    traj.horizon = horizon;
    traj.states = std::move(states);
    const int Nt = traj.size();
    traj.controls.resize(Nt - 1);
    for (int k = 0; k + 1 < Nt; ++k) traj.controls[k] = (traj.states[k + 1] - traj.states[k]) / horizon.dt;
    traj.imbalance.resize(Nt);
    traj.energy.resize(Nt);
    traj.distance.resize(Nt);
    for (int k = 0; k < Nt; ++k) {
        traj.imbalance[k] = pot.imbalance(traj.states[k]);
        traj.distance[k] = pot.distance(traj.states[k]);
        traj.energy[k] = node_energy(pot, traj, k);
    }
    return traj;
}

namespace detail {

template <class Potential>
class TranscriptionProblem {
public:
    static constexpr int D = Potential::dim;

    TranscriptionProblem(const Potential& pot, const Vec<D>& phi0, const Horizon& horizon, double shift)
        : pot_(pot), phi0_(phi0), dt_(horizon.dt), n_(horizon.Nt - 1) {
        std::vector<double> diag(n_, 2.0 / dt_ + dt_ * shift), off(n_ > 0 ? n_ - 1 : 0, -1.0 / dt_);
        diag.back() = 1.0 / dt_ + dt_ * shift;
        precond_ = Tridiagonal(diag, off);
    }

    Vec<D> node(const Eigen::VectorXd& x, int k) const {
        return k == 0 ? phi0_ : Vec<D>(x.segment<D>(D * (k - 1)));
    }

    double value(const Eigen::VectorXd& x) const {
        double kinetic = 0.0, running = pot_.value(phi0_);
        Vec<D> prev = phi0_;
        for (int k = 1; k <= n_; ++k) {
            const Vec<D> cur = node(x, k);
            kinetic += (cur - prev).squaredNorm();
            running += pot_.value(cur);
            prev = cur;
        }
        return 0.5 * kinetic / dt_ + dt_ * running;
    }

    void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
        g.resize(x.size());
        for (int k = 1; k <= n_; ++k) {
            const Vec<D> cur = node(x, k);
            Vec<D> gk = (cur - node(x, k - 1)) / dt_ + dt_ * pot_.gradient(cur);
            if (k < n_) gk -= (node(x, k + 1) - cur) / dt_;
            g.segment<D>(D * (k - 1)) = gk;
        }
    }

    double decrease(const Eigen::VectorXd& xn, const Eigen::VectorXd& xo) const {
        // Each term is differenced analytically so that cancellation only
        // affects the (small) difference, not the full objective.
        double kinetic = 0.0, running = 0.0;
        Vec<D> step_prev = Vec<D>::Zero();  // node 0 is fixed
        for (int k = 1; k <= n_; ++k) {
            const Vec<D> a = xn.segment<D>(D * (k - 1));
            const Vec<D> b = xo.segment<D>(D * (k - 1));
            const Vec<D> step = a - b;
            const Vec<D> dn = a - node(xn, k - 1);
            const Vec<D> dd = step - step_prev;
            kinetic += dd.dot(2.0 * dn - dd);
            running += pot_.difference(a, b);
            step_prev = step;
        }
        return 0.5 * kinetic / dt_ + dt_ * running;
    }

    double stationarity(const Eigen::VectorXd& g) const { return g.lpNorm<Eigen::Infinity>() / dt_; }

    void precondition(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
        z = r;
        for (int c = 0; c < D; ++c) precond_.solve(z.data() + c, D);
    }

private:
    const Potential& pot_;
    Vec<D> phi0_;
    double dt_;
    int n_;
    Tridiagonal precond_;
};

template <class Potential>
double default_shift(const Potential& pot) {
    constexpr int D = Potential::dim;
    Eigen::SelfAdjointEigenSolver<Mat<D>> eig(pot.hessian(pot.optimum()));
    const double mean = eig.eigenvalues().cwiseMax(0.0).mean();
    return std::clamp(mean, 0.05 * pot.beta(), pot.beta());
}

}  // namespace detail

/// Initial lifted states: straight line from Phi0 to its nearest minimizer,
/// reached at min(t_reach, T), then held.
template <class Potential>
std::vector<Vec<Potential::dim>> initial_states(const Potential& pot, const Vec<Potential::dim>& phi0,
                                                const Horizon& horizon, const SolveOptions& opts) {
    std::vector<Vec<Potential::dim>> states(horizon.Nt, phi0);
    if (opts.init == Initializer::Constant) return states;
    const Vec<Potential::dim> target_shift = pot.displacement(phi0);
    const double t_reach = std::min(opts.t_reach, horizon.T);
    for (int k = 0; k < horizon.Nt; ++k) {
        const double s = std::min(1.0, horizon.time(k) / t_reach);
        states[k] = phi0 + s * target_shift;
    }
    return states;
}

template <class Potential>
struct OpenLoopSolution {
    Trajectory<Potential::dim> trajectory;
    SolveReport report;
};

/// Minimizes K_d over the given horizon starting from explicit lifted states;
/// init[0] is the fixed initial configuration.
template <class Potential>
OpenLoopSolution<Potential> solve_open_loop_from(const Potential& pot, const Horizon& horizon,
                                                 const std::vector<Vec<Potential::dim>>& init,
                                                 const SolveOptions& opts = {}) {
    constexpr int D = Potential::dim;
    if (horizon.Nt < 2) throw InvalidArgument("Nt", "must be >= 2");
    if (static_cast<int>(init.size()) != horizon.Nt) throw InvalidArgument("init", "needs Nt states");
    if (!(opts.tol > 0.0)) throw InvalidArgument("tol", "must be > 0");

    const Vec<D> anchor = init[0];
    const double shift = opts.precond_shift > 0.0 ? opts.precond_shift : detail::default_shift(pot);
    detail::TranscriptionProblem<Potential> problem(pot, anchor, horizon, shift);

    Eigen::VectorXd x(D * (horizon.Nt - 1));
    for (int k = 1; k < horizon.Nt; ++k) x.segment<D>(D * (k - 1)) = init[k];

    LbfgsOptions lopts;
    lopts.memory = opts.memory;
    lopts.max_iterations = opts.max_iters;
    lopts.tolerance = opts.tol;
    LbfgsResult res = minimize_lbfgs(problem, x, lopts);

    std::vector<Vec<D>> states(horizon.Nt);
    states[0] = anchor;
    for (int k = 1; k < horizon.Nt; ++k) states[k] = x.segment<D>(D * (k - 1));

    OpenLoopSolution<Potential> out;
    out.trajectory = make_trajectory(pot, horizon, std::move(states));
    SolveReport& rep = out.report;
    rep.objective = objective(pot, out.trajectory.states, horizon.dt);
    rep.iterations = res.iterations;
    rep.grad_norm = res.stationarity;
    const auto el = el_residuals(pot, out.trajectory.states, horizon.dt);
    rep.el_residual = el.empty() ? 0.0 : *std::max_element(el.begin(), el.end());
    rep.terminal_velocity = out.trajectory.controls.back().norm();
    rep.converged = res.converged && rep.terminal_velocity <= opts.terminal_velocity_max;
    rep.stop_reason = res.stop_reason;
    if (res.converged && !rep.converged) rep.stop_reason = "terminal velocity above threshold";
    rep.history = std::move(res.history);
    return out;
}

/// Minimizes K_d from Phi0 over the given horizon.
template <class Potential>
OpenLoopSolution<Potential> solve_open_loop(const Potential& pot, const Vec<Potential::dim>& phi0,
                                            const Horizon& horizon, const SolveOptions& opts = {}) {
    if (horizon.Nt < 2) throw InvalidArgument("Nt", "must be >= 2");
    return solve_open_loop_from(pot, horizon, initial_states(pot, wrap<Potential::dim>(phi0), horizon, opts), opts);
}

}  // namespace spinbal
