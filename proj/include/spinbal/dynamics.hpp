#pragma once

// Euler-Lagrange flow Phi'' = grad Q^(Phi), its energy, the Pontryagin
// residual of a discrete optimum and the pendulum phase portrait.

#include "spinbal/errors.hpp"
#include "spinbal/potential.hpp"
#include "spinbal/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace spinbal {

template <int Dim>
struct ELState {
    Vec<Dim> phi = Vec<Dim>::Zero();  ///< cover-lifted angles
    Vec<Dim> phidot = Vec<Dim>::Zero();
};

template <int Dim>
struct ELSample {
    double t = 0.0;
    ELState<Dim> state;
    double energy = 0.0;
};

template <int Dim>
using ELPath = std::vector<ELSample<Dim>>;

/// 1/2 |Phi'|^2 - Q^(Phi); identically zero along optimal arcs.
template <class Potential>
double energy(const Potential& pot, const ELState<Potential::dim>& s) {
    return 0.5 * s.phidot.squaredNorm() - pot.value(s.phi);
}

/// One classical Runge-Kutta step of (Phi, Phi') for Phi'' = grad Q^(Phi).
template <class Potential>
ELState<Potential::dim> rk4_step(const Potential& pot, const ELState<Potential::dim>& s, double dt) {
    using V = Vec<Potential::dim>;
    const V k1x = s.phidot;
    const V k1v = pot.gradient(s.phi);
    const V k2x = s.phidot + 0.5 * dt * k1v;
    const V k2v = pot.gradient(V(s.phi + 0.5 * dt * k1x));
    const V k3x = s.phidot + 0.5 * dt * k2v;
    const V k3v = pot.gradient(V(s.phi + 0.5 * dt * k2x));
    const V k4x = s.phidot + dt * k3v;
    const V k4v = pot.gradient(V(s.phi + dt * k3x));
    ELState<Potential::dim> out;
    out.phi = s.phi + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    out.phidot = s.phidot + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    return out;
}

/// Fixed-step integration on [0, t_end]; the last step is shortened to land on
/// t_end. Every sample_every-th step is recorded, plus the endpoints.
template <class Potential>
ELPath<Potential::dim> integrate_el(const Potential& pot, const ELState<Potential::dim>& init, double t_end,
                                    double dt = 1e-3, int sample_every = 1) {
    if (!(dt > 0.0)) throw InvalidArgument("dt", "step must be > 0");
    if (!(t_end > 0.0)) throw InvalidArgument("t_end", "must be > 0");
    if (sample_every < 1) throw InvalidArgument("sample_every", "must be >= 1");
    const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
    ELPath<Potential::dim> path;
    path.reserve(steps / sample_every + 2);
    ELState<Potential::dim> s = init;
    path.push_back({0.0, s, energy(pot, s)});
    for (long i = 1; i <= steps; ++i) {
        const double t_prev = (i - 1) * dt;
        const double h = i == steps ? t_end - t_prev : dt;
        s = rk4_step(pot, s, h);
        if (i % sample_every == 0 || i == steps) path.push_back({i == steps ? t_end : i * dt, s, energy(pot, s)});
    }
    return path;
}

/// Per-node |(q_k - q_{k-1})/dt + grad Q^(Phi_k)| with q_k = -psi_k, at interior
/// nodes k = 1..Nt-2 (0 elsewhere). Equal to the discrete EL residual.
template <class Potential>
std::vector<double> pontryagin_residual(const Potential& pot, const Trajectory<Potential::dim>& traj) {
    std::vector<double> r(traj.states.size(), 0.0);
    const double dt = traj.horizon.dt;
    for (std::size_t k = 1; k + 1 < traj.states.size(); ++k) {
        const Vec<Potential::dim> q_prev = -traj.controls[k - 1];
        const Vec<Potential::dim> q = -traj.controls[k];
        r[k] = ((q - q_prev) / dt + pot.gradient(traj.states[k])).norm();
    }
    return r;
}

struct ShootingReport {
    double max_deviation = 0.0;  ///< max torus distance to the transcribed states on the window
    double window_end = 0.0;     ///< compared on t in [0, window_end]
    int nodes = 0;
};

/// Integrates the EL flow from (Phi_0, Phi'(0)) with Phi'(0) recovered from the
/// first discrete velocity to second order, and compares with the transcribed
/// states on [0, fraction * T].
template <class Potential>
ShootingReport shooting_check(const Potential& pot, const Trajectory<Potential::dim>& traj, double fraction = 0.5,
                              int substeps = 10) {
    constexpr int D = Potential::dim;
    if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("fraction", "must lie in (0, 1]");
    const double dt = traj.horizon.dt;
    ELState<D> s;
    s.phi = traj.states[0];
    s.phidot = traj.controls[0] - 0.5 * dt * pot.gradient(traj.states[0]);
    ShootingReport rep;
    const int last = static_cast<int>(std::floor(fraction * (traj.size() - 1) + 1e-9));
    rep.window_end = last * dt;
    for (int k = 0; k <= last; ++k) {
        if (k > 0)
            for (int j = 0; j < substeps; ++j) s = rk4_step(pot, s, dt / substeps);
        rep.max_deviation = std::max(rep.max_deviation, torus_distance<D>(s.phi, traj.states[k]));
        ++rep.nodes;
    }
    return rep;
}

struct PhaseGrid {
    double gamma_min = -kPi;
    double gamma_max = kPi;
    int n_gamma = 41;
    double rate_min = -1.5;
    double rate_max = 1.5;
    int n_rate = 31;
};

struct PhaseSample {
    double gamma = 0.0;
    double rate = 0.0;   ///< gamma'
    double accel = 0.0;  ///< gamma''
    double energy = 0.0;
};

struct PhasePortrait {
    std::vector<PhaseSample> field;
    /// The separatrix is the level e = separatrix_energy of
    /// e(gamma, gamma') = 1/2 gamma'^2 - beta/2 cos^2 gamma.
    double separatrix_energy = 0.0;
    /// Upper branch gamma' = sqrt(beta) |cos gamma| sampled on the gamma grid.
    std::vector<std::pair<double, double>> separatrix;
};

inline double pendulum_energy(double beta, double gamma, double rate) {
    const double c = std::cos(gamma);
    return 0.5 * rate * rate - 0.5 * beta * c * c;
}

/// Phase portrait of the gap-angle equation gamma'' = -(beta/2) sin 2 gamma for a
/// head without imbalance.
inline PhasePortrait phase_portrait(const HeadProblem& head, const PhaseGrid& grid = {}) {
    if (head.c.squaredNorm() != 0.0) throw InvalidArgument("c", "phase portrait requires c = 0");
    if (grid.n_gamma < 2 || grid.n_rate < 2) throw InvalidArgument("grid", "needs at least 2 nodes per axis");
    const double beta = head.beta;
    PhasePortrait out;
    out.field.reserve(static_cast<std::size_t>(grid.n_gamma) * grid.n_rate);
    for (int i = 0; i < grid.n_gamma; ++i) {
        const double g = grid.gamma_min + (grid.gamma_max - grid.gamma_min) * i / (grid.n_gamma - 1);
        for (int j = 0; j < grid.n_rate; ++j) {
            const double v = grid.rate_min + (grid.rate_max - grid.rate_min) * j / (grid.n_rate - 1);
            out.field.push_back({g, v, -0.5 * beta * std::sin(2.0 * g), pendulum_energy(beta, g, v)});
        }
        out.separatrix.emplace_back(g, std::sqrt(beta) * std::abs(std::cos(g)));
    }
    return out;
}

}  // namespace spinbal
