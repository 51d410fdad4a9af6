#pragma once

// Stabilization analysis: Lipschitz and Lojasiewicz constants of Q^, the
// decay certificate built from them, bound checks along a trajectory and
// exponential-rate prediction and fitting.

#include "spinbal/certificate.hpp"
#include "spinbal/errors.hpp"
#include "spinbal/potential.hpp"
#include "spinbal/transcription.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace spinbal {

/// Calls f(point) on the uniform grid with n nodes per coordinate, shifted by
/// offset cells, covering [0, 2pi)^Dim.
template <int Dim, class F>
void for_each_grid_node(int n, double offset, F&& f) {
    static_assert(Dim == 1 || Dim == 2, "grid scans are per head");
    const double h = kTwoPi / n;
    Vec<Dim> x;
    if constexpr (Dim == 1) {
        for (int i = 0; i < n; ++i) {
            x[0] = (i + offset) * h;
            f(x);
        }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                x[0] = (i + offset) * h;
                x[1] = (j + offset) * h;
                f(x);
            }
    }
}

// ---------------------------------------------------------------------------
// Lipschitz constant L = max |grad Q|

struct LipschitzEstimate {
    double L = 0.0;       ///< refined value
    double grid_L = 0.0;  ///< best grid node
    int resolution = 0;
};

template <class Potential>
LipschitzEstimate estimate_lipschitz(const Potential& pot, int resolution = 256) {
    constexpr int D = Potential::dim;
    if (resolution < 4) throw InvalidArgument("resolution", "must be >= 4");
    LipschitzEstimate out;
    out.resolution = resolution;
    Vec<D> best = Vec<D>::Zero();
    double best_sq = -1.0;
    for_each_grid_node<D>(resolution, 0.0, [&](const Vec<D>& x) {
        const double s = pot.gradient(x).squaredNorm();
        if (s > best_sq) {
            best_sq = s;
            best = x;
        }
    });
    out.grid_L = std::sqrt(best_sq);

    // ascent on 1/2 |grad Q|^2, whose gradient is H grad Q
    double f = 0.5 * best_sq;
    double step = 1.0;
    for (int it = 0; it < 200; ++it) {
        const Vec<D> dir = pot.hessian(best) * pot.gradient(best);
        if (dir.norm() < 1e-14) break;
        bool moved = false;
        for (int k = 0; k < 40; ++k) {
            const Vec<D> trial = best + step * dir;
            const double ft = 0.5 * pot.gradient(trial).squaredNorm();
            if (ft > f) {
                best = trial;
                f = ft;
                moved = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    out.L = std::max(out.grid_L, std::sqrt(2.0 * f));
    return out;
}

/// For independent heads, max |grad Q|^2 is the sum of the per-head maxima.
inline LipschitzEstimate estimate_lipschitz(const RotorPotential& pot, int resolution = 256) {
    const LipschitzEstimate a = estimate_lipschitz(pot.head(1), resolution);
    const LipschitzEstimate b = estimate_lipschitz(pot.head(2), resolution);
    return {std::hypot(a.L, b.L), std::hypot(a.grid_L, b.grid_L), resolution};
}

// ---------------------------------------------------------------------------
// Lojasiewicz data Q^ >= d dist(., Z)^N

struct LojasiewiczEstimate {
    double d = 0.0;
    double Nloj = 2.0;
    double grid_min = 0.0;   ///< min of Q^/dist^N over grid nodes off Z
    double local_min = 0.0;  ///< min over rays leaving Z at the finest radius
    std::string method;
};

struct LojasiewiczOptions {
    int resolution = 256;
    double safety = 0.9;  ///< d = safety * min(grid_min, local_min)
    double floor = 1e-9;  ///< d must exceed this
    int directions = 64;
};

/// Unit rays (base point on Z, direction) used to probe Q^ next to Z.
inline std::vector<std::pair<Vec<2>, Vec<2>>> zero_rays(const HeadPotential& pot, int directions) {
    std::vector<std::pair<Vec<2>, Vec<2>>> rays;
    const ZeroSet& z = pot.zeros();
    for (const Vec<2>& p : z.points())
        for (int k = 0; k < directions; ++k) {
            const double th = kTwoPi * k / directions;
            rays.emplace_back(p, Vec<2>(std::cos(th), std::sin(th)));
        }
    for (double level : z.circles())
        for (int k = 0; k < 16; ++k) {
            const Vec<2> base(kTwoPi * k / 16, level);
            rays.emplace_back(base, Vec<2>(0.0, 1.0));
            rays.emplace_back(base, Vec<2>(0.0, -1.0));
        }
    return rays;
}

inline std::vector<std::pair<Vec<1>, Vec<1>>> zero_rays(const PendulumPotential&, int) {
    std::vector<std::pair<Vec<1>, Vec<1>>> rays;
    for (double level : {0.5 * kPi, 1.5 * kPi}) {
        rays.emplace_back(Vec<1>(level), Vec<1>(1.0));
        rays.emplace_back(Vec<1>(level), Vec<1>(-1.0));
    }
    return rays;
}

inline bool has_positive_definite_optimum(const HeadPotential& pot) {
    if (pot.zeros().degenerate()) return false;
    return Eigen::SelfAdjointEigenSolver<Mat2>(pot.hessian(pot.optimum())).eigenvalues().minCoeff() > 0.0;
}

inline bool has_positive_definite_optimum(const PendulumPotential& pot) { return pot.beta() > 0.0; }

/// min over nodes (dist > 0) of Q^/dist^N on a grid shifted by offset cells.
template <class Potential>
double lojasiewicz_grid_min(const Potential& pot, double N, int resolution, double offset) {
    double m = std::numeric_limits<double>::infinity();
    for_each_grid_node<Potential::dim>(resolution, offset, [&](const auto& x) {
        const double dist = pot.distance(x);
        if (dist > 1e-12) m = std::min(m, pot.value(x) / std::pow(dist, N));
    });
    return m;
}

template <class Potential>
LojasiewiczEstimate estimate_lojasiewicz(const Potential& pot, const LojasiewiczOptions& opts = {}) {
    const auto rays = zero_rays(pot, opts.directions);
    const double radii[] = {1e-2, 1e-3, 1e-4};

    auto local_mins = [&](double N) {
        std::vector<double> mins;
        for (double r : radii) {
            double m = std::numeric_limits<double>::infinity();
            for (const auto& [base, dir] : rays) {
                const auto x = (base + r * dir).eval();
                const double dist = pot.distance(x);
                if (dist > 0.0) m = std::min(m, pot.value(x) / std::pow(dist, N));
            }
            mins.push_back(m);
        }
        return mins;
    };

    std::vector<double> exponents;
    std::string method = "grid scan";
    if (has_positive_definite_optimum(pot)) {
        exponents = {2.0};
        method = "positive definite Hessian, grid scan for d";
    } else {
        bool residual = false;
        if constexpr (std::is_same_v<Potential, HeadPotential>) residual = potential_infimum(pot.head()) > 0.0;
        if (residual) exponents.push_back(1.0);
        exponents.push_back(2.0);
        exponents.push_back(4.0);
    }

    for (double N : exponents) {
        const std::vector<double> loc = local_mins(N);
        // ratios must not decay as the rays shrink toward Z
        const bool stable = loc.back() >= 0.5 * loc.front();
        LojasiewiczEstimate est;
        est.Nloj = N;
        est.grid_min = lojasiewicz_grid_min(pot, N, opts.resolution, 0.0);
        est.local_min = loc.back();
        est.d = opts.safety * std::min(est.grid_min, est.local_min);
        est.method = method;
        if (stable && est.d > opts.floor) return est;
    }
    throw EstimationFailure("no scanned Lojasiewicz exponent gives d > floor");
}

// ---------------------------------------------------------------------------
// Certificate

/// sigma1, sigma2 for given (L, d, N) on T^n.
inline DecayCertificate build_certificate(double L, double d, double Nloj, int n, std::string method = {}) {
    if (!(d > 0.0)) throw EstimationFailure("certificate requires d > 0");
    DecayCertificate c;
    c.L = L;
    c.d = d;
    c.Nloj = Nloj;
    c.Ntilde = std::max(2.0, Nloj);
    c.n = n;
    c.method = std::move(method);
    const double diam = diameter_bound(n);
    const double Nt = c.Ntilde;
    const double a = std::pow(2.0, Nt + 1.0) * std::pow(diam, Nt - 2.0);
    const double b = std::pow(2.0, Nt) * std::pow(diam, Nt - Nloj) / d;
    c.sigma1 = 0.5 * (diam + L) * std::max(a, b);
    c.sigma2 = (diam + L) * std::pow(c.sigma1, Nloj) / (2.0 * d);
    return c;
}

template <class Potential>
DecayCertificate build_certificate(const Potential& pot, const LojasiewiczOptions& opts = {}) {
    const LipschitzEstimate lip = estimate_lipschitz(pot, opts.resolution);
    const LojasiewiczEstimate loj = estimate_lojasiewicz(pot, opts);
    return build_certificate(lip.L, loj.d, loj.Nloj, Potential::dim, loj.method);
}

/// Joint certificate on T^4 from the two head estimates. With N = max(N1, N2),
/// Q^ >= min_i d_i' (dist1^N + dist2^N) >= 2^{1 - N/2} min_i d_i' dist^N, where
/// d_i' = d_i / R^{N - N_i} and R = pi sqrt(2) bounds dist_i.
inline DecayCertificate build_certificate(const RotorPotential& pot, const LojasiewiczOptions& opts = {}) {
    const LipschitzEstimate lip = estimate_lipschitz(pot, opts.resolution);
    const LojasiewiczEstimate e1 = estimate_lojasiewicz(pot.head(1), opts);
    const LojasiewiczEstimate e2 = estimate_lojasiewicz(pot.head(2), opts);
    const double N = std::max(e1.Nloj, e2.Nloj);
    const double R = kPi * std::sqrt(2.0);
    const double d1 = e1.d / std::pow(R, N - e1.Nloj);
    const double d2 = e2.d / std::pow(R, N - e2.Nloj);
    const double d = std::pow(2.0, 1.0 - 0.5 * N) * std::min(d1, d2);
    return build_certificate(lip.L, d, N, 4, "joint from heads: " + e1.method);
}

/// Signed slack min over verification-grid nodes of Q^ - d dist^N.
template <class Potential>
double certificate_grid_slack(const Potential& pot, const DecayCertificate& cert, int resolution, double offset) {
    double slack = std::numeric_limits<double>::infinity();
    for_each_grid_node<Potential::dim>(resolution, offset, [&](const auto& x) {
        slack = std::min(slack, pot.value(x) - cert.d * std::pow(pot.distance(x), cert.Nloj));
    });
    return slack;
}

// ---------------------------------------------------------------------------
// Bound checks along a trajectory

struct DecayBoundReport {
    double dist0 = 0.0;
    double uniform_bound = 0.0;     ///< (sigma1 dist0)^{1/Ntilde}
    double min_uniform_slack = 0.0;
    double min_decay_slack = 0.0;   ///< over t > 0 of (sigma2 dist0 / t)^{1/(N Ntilde)} - dist
    double saturation_bound = 0.0;  ///< sqrt(2L) (sigma1 dist0)^{1/(2 Ntilde)}
    double max_speed = 0.0;
    double saturation_slack = 0.0;
    std::vector<double> uniform_margin;  ///< per node
    std::vector<double> decay_margin;    ///< per node, +inf at t = 0

    bool holds() const { return min_uniform_slack >= 0.0 && min_decay_slack >= 0.0 && saturation_slack >= 0.0; }
};

template <int Dim>
DecayBoundReport check_decay_bounds(const DecayCertificate& cert, const Trajectory<Dim>& traj) {
    DecayBoundReport rep;
    rep.dist0 = traj.distance.front();
    rep.uniform_bound = std::pow(cert.sigma1 * rep.dist0, 1.0 / cert.Ntilde);
    rep.saturation_bound = std::sqrt(2.0 * cert.L) * std::pow(cert.sigma1 * rep.dist0, 0.5 / cert.Ntilde);
    rep.min_uniform_slack = std::numeric_limits<double>::infinity();
    rep.min_decay_slack = std::numeric_limits<double>::infinity();
    const int n = traj.size();
    rep.uniform_margin.resize(n);
    rep.decay_margin.resize(n);
    for (int k = 0; k < n; ++k) {
        const double dist = traj.distance[k];
        rep.uniform_margin[k] = rep.uniform_bound - dist;
        rep.min_uniform_slack = std::min(rep.min_uniform_slack, rep.uniform_margin[k]);
        const double t = traj.horizon.time(k);
        if (t > 0.0) {
            rep.decay_margin[k] = std::pow(cert.sigma2 * rep.dist0 / t, 1.0 / cert.decay_exponent()) - dist;
            rep.min_decay_slack = std::min(rep.min_decay_slack, rep.decay_margin[k]);
        } else {
            rep.decay_margin[k] = std::numeric_limits<double>::infinity();
        }
    }
    for (const auto& psi : traj.controls) rep.max_speed = std::max(rep.max_speed, psi.norm());
    rep.saturation_slack = rep.saturation_bound - rep.max_speed;
    return rep;
}

// ---------------------------------------------------------------------------
// Exponential rate

/// sqrt of the smallest Hessian eigenvalue at the steady optimum. A head with
/// c = 0 has a circle of minimizers; its rate is that of the normal direction,
/// sqrt(beta).
inline double predict_rate(const HeadPotential& pot) {
    const double cn = pot.head().c.norm();
    if (cn >= 1.0) throw EstimationFailure("exponential rate requires |c| < 1 (strict threshold)");
    if (pot.zeros().degenerate()) return std::sqrt(pot.beta());
    const double lmin = Eigen::SelfAdjointEigenSolver<Mat2>(pot.hessian(pot.optimum())).eigenvalues().minCoeff();
    return std::sqrt(std::max(0.0, lmin));
}

inline double predict_rate(const RotorPotential& pot) {
    return std::min(predict_rate(pot.head(1)), predict_rate(pot.head(2)));
}

struct RateReport {
    double mu_fit = 0.0;
    double mu_pred = 0.0;
    double r2 = 0.0;
    double window_begin = 0.0;  ///< [s]
    double window_end = 0.0;
    int samples = 0;
    bool ok = false;  ///< at least 3 positive samples in the window
};

struct FitWindow {
    double begin = 0.6;  ///< fractions of T
    double end = 0.95;
};

/// Least-squares fit log y = a - mu t over samples with t in the window and y > 0.
inline RateReport fit_exponential(const std::vector<double>& t, const std::vector<double>& y, double t_begin,
                                  double t_end) {
    RateReport rep;
    rep.window_begin = t_begin;
    rep.window_end = t_end;
    double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
    int m = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] < t_begin || t[k] > t_end || !(y[k] > 0.0)) continue;
        const double ly = std::log(y[k]);
        st += t[k];
        sy += ly;
        stt += t[k] * t[k];
        sty += t[k] * ly;
        syy += ly * ly;
        ++m;
    }
    rep.samples = m;
    if (m < 3) return rep;
    const double vt = stt - st * st / m, vy = syy - sy * sy / m, cty = sty - st * sy / m;
    if (!(vt > 0.0)) return rep;
    const double slope = cty / vt;
    rep.mu_fit = -slope;
    rep.r2 = vy > 0.0 ? std::clamp(cty * cty / (vt * vy), 0.0, 1.0) : 1.0;
    rep.ok = true;
    return rep;
}

struct TrajectoryRates {
    RateReport dist;       ///< fit of dist(Phi(t), Z)
    RateReport sqrt_imbalance;  ///< fit of sqrt(G - inf G)
};

template <int Dim>
TrajectoryRates fit_rate(const Trajectory<Dim>& traj, const FitWindow& window = {}) {
    std::vector<double> t(traj.size()), sg(traj.size());
    for (int k = 0; k < traj.size(); ++k) {
        t[k] = traj.horizon.time(k);
        sg[k] = std::sqrt(std::max(0.0, traj.imbalance[k]));
    }
    const double T = traj.horizon.T;
    TrajectoryRates out;
    out.dist = fit_exponential(t, traj.distance, window.begin * T, window.end * T);
    out.sqrt_imbalance = fit_exponential(t, sg, window.begin * T, window.end * T);
    return out;
}

// ---------------------------------------------------------------------------
// Hyperbolicity of the linearized EL system at the optimum

/// Lambda = [[I, -C^{-1}/2], [C, I/2]] for C = sqrt(H), H positive definite.
inline Eigen::Matrix4d lambda_matrix(const Mat2& C) {
    Eigen::Matrix4d L;
    L << Mat2::Identity(), -0.5 * C.inverse(), C, 0.5 * Mat2::Identity();
    return L;
}

/// max-norm of Lambda^{-1} [[0, I], [H, 0]] Lambda - diag(C, -C).
inline double lambda_conjugacy_error(const Mat2& H) {
    Eigen::SelfAdjointEigenSolver<Mat2> eig(H);
    if (eig.eigenvalues().minCoeff() <= 0.0) throw InvalidArgument("H", "must be positive definite");
    const Mat2 C = eig.operatorSqrt();
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    A.topRightCorner<2, 2>() = Mat2::Identity();
    A.bottomLeftCorner<2, 2>() = H;
    const Eigen::Matrix4d Lam = lambda_matrix(C);
    Eigen::Matrix4d target = Eigen::Matrix4d::Zero();
    target.topLeftCorner<2, 2>() = C;
    target.bottomRightCorner<2, 2>() = -C;
    return (Lam.inverse() * A * Lam - target).cwiseAbs().maxCoeff();
}

}  // namespace spinbal
