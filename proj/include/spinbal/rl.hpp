#pragma once

// Value iteration on a periodic grid: semi-Lagrangian Bellman sweeps
//   V_{i+1}(x) = min_{u in U} delta (1/2 |u|^2 + Q^(x)) + V~_i(x + delta u),
// the feedback law Phi' = -grad V and the Hamilton-Jacobi residual
// | |grad V|^2 - 2 Q^ |. Tables are per head (Dim 2) or for the gap angle of
// a head without imbalance (Dim 1).

#include "spinbal/certificate.hpp"
#include "spinbal/errors.hpp"
#include "spinbal/potential.hpp"
#include "spinbal/transcription.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace spinbal {

inline constexpr std::uint64_t kValueTableFormat = 1;

/// Sampled value function on the uniform grid x_i = i * 2pi / n per axis,
/// row-major (last axis fastest), multilinear interpolation with wraparound.
template <int Dim>
class ValueTable {
public:
    using Point = Vec<Dim>;
    using Index = std::array<int, Dim>;

    ValueTable() { dims_.fill(0); }
    explicit ValueTable(const Index& dims, double delta = 0.0) : dims_(dims), delta_(delta) {
        std::size_t n = 1;
        for (int d : dims_) {
            if (d < 4) throw InvalidArgument("dims", "need at least 4 nodes per axis");
            n *= static_cast<std::size_t>(d);
        }
        values_.assign(n, 0.0);
    }

    const Index& dims() const { return dims_; }
    std::size_t size() const { return values_.size(); }
    double cell(int axis) const { return kTwoPi / dims_[axis]; }
    double max_cell() const {
        double h = 0.0;
        for (int a = 0; a < Dim; ++a) h = std::max(h, cell(a));
        return h;
    }

    double delta() const { return delta_; }
    void set_delta(double d) { delta_ = d; }
    std::uint64_t iteration() const { return iteration_; }
    void set_iteration(std::uint64_t i) { iteration_ = i; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::size_t flat(const Index& idx) const {
        std::size_t f = 0;
        for (int a = 0; a < Dim; ++a) {
            const int n = dims_[a];
            f = f * n + static_cast<std::size_t>(((idx[a] % n) + n) % n);
        }
        return f;
    }

    Index unflat(std::size_t f) const {
        Index idx;
        for (int a = Dim - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(f % dims_[a]);
            f /= dims_[a];
        }
        return idx;
    }

    Point node(std::size_t f) const {
        const Index idx = unflat(f);
        Point x;
        for (int a = 0; a < Dim; ++a) x[a] = idx[a] * cell(a);
        return x;
    }

    double at(const Index& idx) const { return values_[flat(idx)]; }

    double interpolate(const Point& x) const {
        Index base;
        std::array<double, Dim> frac;
        for (int a = 0; a < Dim; ++a) {
            const double s = wrap_angle(x[a]) / cell(a);
            const double fl = std::floor(s);
            base[a] = static_cast<int>(fl);
            frac[a] = s - fl;
        }
        double v = 0.0;
        for (int corner = 0; corner < (1 << Dim); ++corner) {
            double w = 1.0;
            Index idx = base;
            for (int a = 0; a < Dim; ++a) {
                const bool up = (corner >> a) & 1;
                w *= up ? frac[a] : 1.0 - frac[a];
                idx[a] += up ? 1 : 0;
            }
            if (w != 0.0) v += w * at(idx);
        }
        return v;
    }

    /// Central differences of the interpolant with a one-cell half-width.
    Point gradient(const Point& x) const {
        Point g;
        for (int a = 0; a < Dim; ++a) {
            Point e = Point::Zero();
            e[a] = cell(a);
            g[a] = (interpolate(Point(x + e)) - interpolate(Point(x - e))) / (2.0 * cell(a));
        }
        return g;
    }

    double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

private:
    Index dims_;
    std::vector<double> values_;
    double delta_ = 0.0;
    std::uint64_t iteration_ = 0;
};

template <int Dim>
typename ValueTable<Dim>::Index uniform_dims(int n) {
    typename ValueTable<Dim>::Index d;
    d.fill(n);
    return d;
}

/// V_0 = 1/2 dist(x, Z)^2 + L/2 dist(x, Z).
template <class Potential>
ValueTable<Potential::dim> initial_guess(const Potential& pot, double L,
                                         const typename ValueTable<Potential::dim>::Index& dims) {
    ValueTable<Potential::dim> table(dims);
    for (std::size_t f = 0; f < table.size(); ++f) {
        const double dist = pot.distance(table.node(f));
        table[f] = 0.5 * dist * dist + 0.5 * L * dist;
    }
    return table;
}

// ---------------------------------------------------------------------------
// Control lattice and sweeps

struct ControlLattice {
    int angles = 16;      ///< directions (Dim 2); Dim 1 always uses +-1
    int speeds = 8;       ///< nonzero speed levels
    double u_max = 1.0;
    double power = 1.0;   ///< speed_j = u_max (j / speeds)^power
};

template <int Dim>
std::vector<Vec<Dim>> control_set(const ControlLattice& lat) {
    if (lat.speeds < 1 || !(lat.u_max > 0.0)) throw InvalidArgument("controls", "need speeds >= 1 and u_max > 0");
    std::vector<Vec<Dim>> u{Vec<Dim>::Zero()};
    for (int j = 1; j <= lat.speeds; ++j) {
        const double s = lat.u_max * std::pow(static_cast<double>(j) / lat.speeds, lat.power);
        if constexpr (Dim == 1) {
            u.push_back(Vec<1>(s));
            u.push_back(Vec<1>(-s));
        } else {
            static_assert(Dim == 2, "control lattices are built for Dim 1 or 2");
            if (lat.angles < 1) throw InvalidArgument("angles", "must be >= 1");
            for (int k = 0; k < lat.angles; ++k) {
                const double th = kTwoPi * k / lat.angles;
                u.push_back(Vec<2>(s * std::cos(th), s * std::sin(th)));
            }
        }
    }
    return u;
}

/// Largest speed an optimal arc can reach: the saturation bound
/// sqrt(2L) (sigma1 dist)^{1/(2 Ntilde)} at the farthest point, clipped by
/// sqrt(2 max Q^) from the zero-energy identity.
template <class Potential>
double speed_bound(const Potential& pot, const DecayCertificate& cert, double max_dist, int resolution = 128) {
    double qmax = 0.0;
    ValueTable<Potential::dim> probe(uniform_dims<Potential::dim>(resolution));
    for (std::size_t f = 0; f < probe.size(); ++f) qmax = std::max(qmax, pot.value(probe.node(f)));
    const double saturation = std::sqrt(2.0 * cert.L) * std::pow(cert.sigma1 * max_dist, 0.5 / cert.Ntilde);
    return std::min(saturation, std::sqrt(2.0 * qmax));
}

enum class Quadrature { Left, Trapezoid };

struct SweepOptions {
    /// Running cost over one step: delta Q^(x) (Left) or
    /// delta (Q^(x) + Q^(x + delta u)) / 2 (Trapezoid).
    Quadrature quadrature = Quadrature::Trapezoid;
};

/// Nodes of the grid cells that contain a point of Z (for circles of
/// minimizers: the two node rows bracketing each circle). The value is pinned
/// to 0 there; without a target set the undiscounted sweep keeps paying
/// delta Q^ > 0 at off-grid minimizers and never settles.
template <int Dim>
std::vector<std::size_t> target_nodes(const ValueTable<Dim>& table, const std::vector<Vec<Dim>>& zero_points,
                                      const std::vector<double>& zero_levels = {}) {
    std::vector<std::size_t> out;
    auto bracket = [&](double x, int axis) {
        const double s = wrap_angle(x) / table.cell(axis);
        const int lo = static_cast<int>(std::floor(s));
        return std::array<int, 2>{lo, lo + 1};
    };
    for (const auto& z : zero_points) {
        std::array<std::array<int, 2>, Dim> br;
        for (int a = 0; a < Dim; ++a) br[a] = bracket(z[a], a);
        for (int corner = 0; corner < (1 << Dim); ++corner) {
            typename ValueTable<Dim>::Index idx;
            for (int a = 0; a < Dim; ++a) idx[a] = br[a][(corner >> a) & 1];
            out.push_back(table.flat(idx));
        }
    }
    for (double level : zero_levels) {
        // circles gamma = level: all nodes of the last axis' bracketing rows
        const auto br = bracket(level, Dim - 1);
        for (std::size_t f = 0; f < table.size(); ++f) {
            const auto idx = table.unflat(f);
            const int g = idx[Dim - 1];
            const int n = table.dims()[Dim - 1];
            if (g == ((br[0] % n) + n) % n || g == ((br[1] % n) + n) % n) out.push_back(f);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline std::vector<std::size_t> target_nodes(const ValueTable<2>& table, const HeadPotential& pot) {
    return target_nodes<2>(table, pot.zeros().points(), pot.zeros().circles());
}

inline std::vector<std::size_t> target_nodes(const ValueTable<1>& table, const PendulumPotential&) {
    return target_nodes<1>(table, {Vec<1>(0.5 * kPi), Vec<1>(1.5 * kPi)});
}

/// Precomputed data of the sweep operator for one table geometry, control
/// set and potential. Grid-aligned feet share their interpolation weights: the
/// foot of node i under control u is i + delta u / h per axis, so each control
/// reduces to a fixed stencil of 2^Dim (offset, weight) pairs.
template <int Dim>
class SweepPlan {
public:
    template <class Potential>
    SweepPlan(const Potential& pot, const ValueTable<Dim>& table, const std::vector<Vec<Dim>>& controls,
              const SweepOptions& opts = {})
        : dims_(table.dims()), nodes_(table.size()), controls_(controls.size()) {
        const double delta = table.delta();
        if (!(delta > 0.0)) throw InvalidArgument("delta", "must be > 0");
        int pad = 1;
        stencils_.reserve(controls.size());
        for (const auto& u : controls) {
            Stencil st;
            std::array<int, Dim> base;
            std::array<double, Dim> frac;
            for (int a = 0; a < Dim; ++a) {
                const double sh = delta * u[a] / table.cell(a);
                const double fl = std::floor(sh);
                base[a] = static_cast<int>(fl);
                frac[a] = sh - fl;
            }
            for (int corner = 0; corner < kCorners; ++corner) {
                double w = 1.0;
                for (int a = 0; a < Dim; ++a) {
                    const bool up = (corner >> a) & 1;
                    w *= up ? frac[a] : 1.0 - frac[a];
                    st.offset[corner][a] = base[a] + (up ? 1 : 0);
                    pad = std::max(pad, std::abs(st.offset[corner][a]));
                }
                st.weight[corner] = w;
            }
            stencils_.push_back(st);
        }
        pad_ = pad;
        for (int a = 0; a < Dim; ++a) {
            const int n = dims_[a];
            wrapped_[a].resize(n + 2 * pad);
            for (int i = 0; i < n + 2 * pad; ++i) wrapped_[a][i] = (((i - pad) % n) + n) % n;
        }
        running_.resize(nodes_ * controls_);
        for (std::size_t f = 0; f < nodes_; ++f) {
            const auto x = table.node(f);
            const double qx = pot.value(x);
            for (std::size_t c = 0; c < controls_; ++c) {
                const auto& u = controls[c];
                const double q = opts.quadrature == Quadrature::Trapezoid
                                     ? 0.5 * (qx + pot.value((x + delta * u).eval()))
                                     : qx;
                running_[f * controls_ + c] = delta * (0.5 * u.squaredNorm() + q);
            }
        }
        targets_ = target_nodes(table, pot);
    }

    /// Applies the operator to `in`, writing into `out` (distinct tables).
    void apply(const ValueTable<Dim>& in, ValueTable<Dim>& out) const {
        const auto& v = in.values();
        auto& w = out.values();
        for (std::size_t f = 0; f < nodes_; ++f) {
            const auto idx = in.unflat(f);
            const double* run = &running_[f * controls_];
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < controls_; ++c) {
                const Stencil& st = stencils_[c];
                double cost = run[c];
                for (int corner = 0; corner < kCorners; ++corner) {
                    std::size_t g = 0;
                    for (int a = 0; a < Dim; ++a) g = g * dims_[a] + wrapped_[a][idx[a] + st.offset[corner][a] + pad_];
                    cost += st.weight[corner] * v[g];
                }
                best = std::min(best, cost);
            }
            w[f] = best;
        }
        for (std::size_t f : targets_) w[f] = 0.0;
        out.set_delta(in.delta());
        out.set_iteration(in.iteration() + 1);
    }

    const std::vector<std::size_t>& targets() const { return targets_; }

private:
    static constexpr int kCorners = 1 << Dim;
    struct Stencil {
        std::array<std::array<int, Dim>, kCorners> offset;
        std::array<double, kCorners> weight;
    };

    std::array<int, Dim> dims_;
    std::size_t nodes_;
    std::size_t controls_;
    int pad_ = 1;
    std::vector<Stencil> stencils_;
    std::array<std::vector<int>, Dim> wrapped_;
    std::vector<double> running_;  ///< node-major, one entry per control
    std::vector<std::size_t> targets_;
};

/// One semi-Lagrangian sweep; reads `table`, returns a fresh table with the
/// target nodes held at 0.
template <class Potential>
ValueTable<Potential::dim> bellman_sweep(const Potential& pot, const ValueTable<Potential::dim>& table,
                                         const std::vector<Vec<Potential::dim>>& controls,
                                         const SweepOptions& opts = {}) {
    SweepPlan<Potential::dim> plan(pot, table, controls, opts);
    ValueTable<Potential::dim> next = table;
    plan.apply(table, next);
    return next;
}

struct ValueIterationOptions {
    int max_sweeps = 5000;
    double tol = 1e-10;  ///< stop when max |V_{i+1} - V_i| <= tol
    SweepOptions sweep;
};

template <int Dim>
struct ValueIterationResult {
    ValueTable<Dim> table;
    int sweeps = 0;
    bool converged = false;
    double last_change = 0.0;
    double max_increase = 0.0;      ///< largest V_{i+1} - V_i seen at any node
    std::vector<double> table_max;  ///< max of the table after each sweep, starting with V_0
};

template <class Potential>
ValueIterationResult<Potential::dim> value_iteration(const Potential& pot, ValueTable<Potential::dim> table,
                                                     const ControlLattice& lattice,
                                                     const ValueIterationOptions& opts = {}) {
    const SweepPlan<Potential::dim> plan(pot, table, control_set<Potential::dim>(lattice), opts.sweep);
    ValueIterationResult<Potential::dim> out;
    out.table_max.push_back(table.max_value());
    ValueTable<Potential::dim> next = table;
    for (int s = 0; s < opts.max_sweeps; ++s) {
        plan.apply(table, next);
        double change = 0.0;
        for (std::size_t f = 0; f < next.size(); ++f) {
            const double diff = next[f] - table[f];
            change = std::max(change, std::abs(diff));
            out.max_increase = std::max(out.max_increase, diff);
        }
        std::swap(table, next);
        out.table_max.push_back(table.max_value());
        out.sweeps = s + 1;
        out.last_change = change;
        if (change <= opts.tol) {
            out.converged = true;
            break;
        }
    }
    out.table = std::move(table);
    return out;
}

/// Sweeps needed by the convergence estimate for accuracy eps:
/// i > t_eps / delta, t_eps = 2 pi sqrt(n) sigma2 / rho^{N Ntilde},
/// rho = (-L + sqrt(L^2 + 8 eps)) / 2.
struct IterationBound {
    double t_eps = 0.0;
    double bound = 0.0;          ///< t_eps / delta
    std::uint64_t count = 0;     ///< smallest integer > bound, or cap on overflow
    bool overflow = false;
};

inline IterationBound required_iterations(const DecayCertificate& cert, double delta, double eps,
                                          double cap = 1e12) {
    if (!(eps > 0.0)) throw InvalidArgument("eps", "must be > 0");
    if (!(delta > 0.0)) throw InvalidArgument("delta", "must be > 0");
    IterationBound out;
    const double rho = 0.5 * (-cert.L + std::sqrt(cert.L * cert.L + 8.0 * eps));
    out.t_eps = diameter_bound(cert.n) * cert.sigma2 / std::pow(rho, cert.decay_exponent());
    out.bound = out.t_eps / delta;
    if (!std::isfinite(out.bound) || out.bound >= cap) {
        out.overflow = true;
        out.count = static_cast<std::uint64_t>(cap);
    } else {
        out.count = static_cast<std::uint64_t>(std::floor(out.bound)) + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Feedback rollout

template <int Dim>
struct RolloutPath {
    std::vector<double> t;
    std::vector<Vec<Dim>> states;  ///< cover-lifted
    std::vector<double> imbalance;
    double cost = 0.0;  ///< sum dt (1/2 |u_k|^2 + Q^(x_k))
    bool stalled = false;
};

/// Explicit Euler integration of Phi' = -grad V~(Phi).
template <class Potential>
RolloutPath<Potential::dim> feedback_rollout(const Potential& pot, const ValueTable<Potential::dim>& table,
                                             const Vec<Potential::dim>& theta0, double t_end, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("dt", "must be > 0");
    if (!(t_end > 0.0)) throw InvalidArgument("t_end", "must be > 0");
    const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
    RolloutPath<Potential::dim> path;
    Vec<Potential::dim> x = theta0;
    const double near = 2.0 * table.max_cell();
    for (long k = 0; k <= steps; ++k) {
        path.t.push_back(k * dt);
        path.states.push_back(x);
        path.imbalance.push_back(pot.imbalance(x));
        if (k == steps) break;
        const Vec<Potential::dim> u = -table.gradient(x);
        if (u.norm() < 1e-10 && pot.distance(x) > near) path.stalled = true;
        path.cost += dt * (0.5 * u.squaredNorm() + pot.value(x));
        x += dt * u;
    }
    return path;
}

// ---------------------------------------------------------------------------
// Hamilton-Jacobi residual

struct HJReport {
    std::vector<double> residual;  ///< per node; NaN within the excluded band around Z
    double max_residual = 0.0;
    double mean_residual = 0.0;
    double interpolation_error = 0.0;  ///< max |second difference| / 8 over nodes and axes
    double tolerance = 0.0;            ///< 10 * interpolation_error
    int evaluated = 0;

    /// The maximum sits on the cut locus, where V is not differentiable, and
    /// does not shrink with refinement; the mean does.
    bool pass() const { return mean_residual <= tolerance; }
};

/// | |grad V|^2 - 2 Q^ | with the Godunov upwind gradient
/// (p_a^2 = max(max(D-_a V, 0)^2, min(D+_a V, 0)^2)), over nodes farther than
/// `band` cells from Z.
template <class Potential>
HJReport hj_residual(const Potential& pot, const ValueTable<Potential::dim>& table, double band = 2.0) {
    constexpr int D = Potential::dim;
    HJReport rep;
    rep.residual.assign(table.size(), std::numeric_limits<double>::quiet_NaN());
    const double exclude = band * table.max_cell();
    for (std::size_t f = 0; f < table.size(); ++f) {
        const auto idx = table.unflat(f);
        double grad_sq = 0.0;
        for (int a = 0; a < D; ++a) {
            auto lo = idx, hi = idx;
            --lo[a];
            ++hi[a];
            const double v = table[f], vl = table.at(lo), vh = table.at(hi);
            const double h = table.cell(a);
            const double dm = (v - vl) / h, dp = (vh - v) / h;
            const double p = std::max(std::max(dm, 0.0), -std::min(dp, 0.0));
            grad_sq += p * p;
            rep.interpolation_error = std::max(rep.interpolation_error, std::abs(vh - 2.0 * v + vl) / 8.0);
        }
        const auto x = table.node(f);
        if (pot.distance(x) <= exclude) continue;
        rep.residual[f] = std::abs(grad_sq - 2.0 * pot.value(x));
        rep.max_residual = std::max(rep.max_residual, rep.residual[f]);
        rep.mean_residual += rep.residual[f];
        ++rep.evaluated;
    }
    if (rep.evaluated > 0) rep.mean_residual /= rep.evaluated;
    rep.tolerance = 10.0 * rep.interpolation_error;
    return rep;
}

// ---------------------------------------------------------------------------
// Direct value oracle

/// Cost of the open-loop optimum from theta, minimized over initializations
/// toward each point of Z. Every candidate is a feasible discrete path, so a
/// candidate stopped by the iteration limit can only overestimate.
inline double direct_value(const HeadPotential& pot, const Vec<2>& theta, const Horizon& horizon,
                           const SolveOptions& opts = {}) {
    const Vec<2> x0 = wrap<2>(theta);
    double best = std::numeric_limits<double>::infinity();
    std::vector<Vec<2>> targets;
    for (const Vec<2>& p : pot.zeros().points()) targets.push_back(x0 + torus_delta<2>(x0, p));
    for (double level : pot.zeros().circles()) targets.push_back(Vec<2>(x0[0], x0[1] + angle_delta(x0[1], level)));
    for (const Vec<2>& target : targets) {
        std::vector<Vec<2>> init(horizon.Nt, x0);
        const double t_reach = std::min(opts.t_reach, horizon.T);
        for (int k = 0; k < horizon.Nt; ++k)
            init[k] = x0 + std::min(1.0, horizon.time(k) / t_reach) * (target - x0);
        const auto sol = solve_open_loop_from(pot, horizon, init, opts);
        best = std::min(best, sol.report.objective);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Persistence: little-endian
//   u64 format_version, u64 ndims, u64 dims[ndims], f64 delta, u64 iteration,
//   f64 values[prod(dims)] (row-major)

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw ParseError("value table: truncated stream", 0, 0);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace detail

template <int Dim>
void write_table(std::ostream& os, const ValueTable<Dim>& table) {
    detail::put_u64(os, kValueTableFormat);
    detail::put_u64(os, Dim);
    for (int d : table.dims()) detail::put_u64(os, static_cast<std::uint64_t>(d));
    detail::put_f64(os, table.delta());
    detail::put_u64(os, table.iteration());
    for (double v : table.values()) detail::put_f64(os, v);
}

template <int Dim>
ValueTable<Dim> read_table(std::istream& is) {
    const std::uint64_t version = detail::get_u64(is);
    if (version != kValueTableFormat)
        throw ParseError("value table: unsupported format version " + std::to_string(version), 0, 0);
    const std::uint64_t ndims = detail::get_u64(is);
    if (ndims != static_cast<std::uint64_t>(Dim))
        throw ParseError("value table: expected " + std::to_string(Dim) + " dims, got " + std::to_string(ndims), 0, 0);
    typename ValueTable<Dim>::Index dims;
    for (int a = 0; a < Dim; ++a) {
        const std::uint64_t n = detail::get_u64(is);
        if (n < 4 || n > (1u << 20)) throw ParseError("value table: bad dimension", 0, 0);
        dims[a] = static_cast<int>(n);
    }
    ValueTable<Dim> table(dims, detail::get_f64(is));
    table.set_iteration(detail::get_u64(is));
    for (double& v : table.values()) v = detail::get_f64(is);
    return table;
}

/// CSV with one row per node: the node coordinates followed by V.
template <int Dim>
void write_table_csv(std::ostream& os, const ValueTable<Dim>& table) {
    static const char* names2[] = {"alpha", "gamma"};
    os << "# format_version=" << kValueTableFormat << " delta=" << table.delta() << " iteration=" << table.iteration()
       << '\n';
    for (int a = 0; a < Dim; ++a) os << (Dim == 1 ? "gamma" : names2[a]) << ',';
    os << "V\n";
    char buf[64];
    for (std::size_t f = 0; f < table.size(); ++f) {
        const auto x = table.node(f);
        for (int a = 0; a < Dim; ++a) {
            std::snprintf(buf, sizeof buf, "%.17g,", x[a]);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g\n", table[f]);
        os << buf;
    }
}

}  // namespace spinbal
