// Acceptance gate: one PASS/FAIL line per criterion; exit status 0 iff all pass.

#include "spinbal/analysis.hpp"
#include "spinbal/config.hpp"
#include "spinbal/dynamics.hpp"
#include "spinbal/potential.hpp"
#include "spinbal/rl.hpp"
#include "spinbal/steady.hpp"
#include "spinbal/transcription.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace spinbal;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

RunConfig demo_config() { return load_config(std::string(SPINBAL_SOURCE_DIR) + "/configs/demo.json"); }

Vec4 phi0_of(const RunConfig& c) { return Vec4(c.phi0[0], c.phi0[1], c.phi0[2], c.phi0[3]); }

SolveOptions solve_options_of(const RunConfig& c) {
    SolveOptions so;
    so.tol = c.solver.tol;
    so.max_iters = c.solver.max_iters;
    so.memory = c.solver.memory;
    so.terminal_velocity_max = c.solver.terminal_velocity_max;
    return so;
}

LojasiewiczOptions loj_options_of(const RunConfig& c) {
    LojasiewiczOptions lo;
    lo.resolution = c.analysis.grid;
    lo.safety = c.analysis.safety;
    return lo;
}

struct Scenario {
    RunConfig cfg;
    RotorPotential pot;
    DecayCertificate cert;
    Horizon horizon;
    OpenLoopSolution<RotorPotential> sol;
};

/// The demo open-loop solve shared by criteria 4 and 5.
const Scenario& scenario() {
    static const Scenario s = [] {
        Scenario out{demo_config(), RotorPotential(demo_config().rotor), {}, {}, {}};
        out.cert = build_certificate(out.pot, loj_options_of(out.cfg));
        HorizonOptions ho;
        ho.dt_max = out.cfg.solver.dt_max;
        ho.T_min = out.cfg.solver.T_min;
        ho.T_cap = out.cfg.solver.T_cap;
        out.horizon = select_horizon(out.pot, phi0_of(out.cfg), out.cfg.solver.eps, out.cert, ho).horizon;
        out.sol = solve_open_loop(out.pot, phi0_of(out.cfg), out.horizon, solve_options_of(out.cfg));
        return out;
    }();
    return s;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi), radius(0.0, 3.0);
    const int n = 400;
    const double h = kTwoPi / n;
    const double hc = 0.5 * kPi / (n - 1);  // canonical gamma range [0, pi/2], both ends included
    std::vector<double> ca(n), sa(n), cg(n), cgc(n);
    for (int i = 0; i < n; ++i) {
        ca[i] = std::cos(i * h);
        sa[i] = std::sin(i * h);
        cg[i] = std::cos(i * h);
        cgc[i] = std::cos(i * hc);
    }
    // argmin of g over the grid alpha_i x gamma_j with cos(gamma_j) = cgam[j]
    auto grid_min = [&](const Vec2& c, const std::vector<double>& cgam, int& bi, int& bj) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double ex = cgam[j] * ca[i] - c.x(), ey = cgam[j] * sa[i] - c.y();
                const double g = ex * ex + ey * ey;
                if (g < best) {
                    best = g;
                    bi = i;
                    bj = j;
                }
            }
        return best;
    };
    double worst_dist = 0.0, worst_res = 0.0, worst_dom = 0.0;
    bool ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const double r = radius(rng), th = angle(rng);
        const Vec2 c(r * std::cos(th), r * std::sin(th));
        const SteadyOptimum o = steady_argmin(c);
        const double g_opt = steady_g(c, o.alpha_bar, o.gamma_bar);
        int bi = 0, bj = 0;
        const double full = grid_min(c, cg, bi, bj);
        grid_min(c, cgc, bi, bj);
        const double dist = torus_distance(Vec2(bi * h, bj * hc), Vec2(o.alpha_bar, o.gamma_bar));
        const double excess = std::max(0.0, c.norm() - 1.0);
        const double res_err = std::max(std::abs(o.residual - excess * excess), std::abs(g_opt - excess * excess));
        worst_dist = std::max(worst_dist, dist / h);
        worst_res = std::max(worst_res, res_err);
        worst_dom = std::max(worst_dom, g_opt - full);
        ok = ok && dist <= 2.0 * h && res_err <= 1e-12 && g_opt - full <= 1e-9;
    }
    return {ok, fmt("1000 c-vectors, max argmin distance %.3f grid steps, max residual error %.2e, ", worst_dist,
                    worst_res) +
                    fmt("dominance margin %.2e", -worst_dom)};
}

Outcome criterion2() {
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> len(0.01, 3.0), load(-100.0, 100.0);
    double worst_f = 0.0, worst_m = 0.0;
    for (int i = 0; i < 10000; ++i) {
        RotorConfig cfg;
        cfg.a = len(rng);
        cfg.b = len(rng);
        cfg.F = Vec2(load(rng), load(rng));
        cfg.N = Vec2(load(rng), load(rng));
        const PlaneForces pf = decompose_imbalance(cfg);
        const double ref_f = std::max(cfg.F.norm(), pf.F1.norm() + pf.F2.norm());
        worst_f = std::max(worst_f, (pf.F1 + pf.F2 - cfg.F).norm() / ref_f);
        // moment about O: r_i x F_i with r_1 = (0,0,-a), r_2 = (0,0,b)
        const Eigen::Vector3d r1(0, 0, -cfg.a), r2(0, 0, cfg.b);
        const Eigen::Vector3d M = r1.cross(Eigen::Vector3d(pf.F1.x(), pf.F1.y(), 0)) +
                                  r2.cross(Eigen::Vector3d(pf.F2.x(), pf.F2.y(), 0));
        const double ref_m = std::max(cfg.N.norm(), cfg.a * pf.F1.norm() + cfg.b * pf.F2.norm());
        worst_m = std::max(worst_m, (M - Eigen::Vector3d(cfg.N.x(), cfg.N.y(), 0)).norm() / ref_m);
    }
    return {worst_f <= 1e-12 && worst_m <= 1e-12,
            fmt("10^4 samples, force rel err %.2e, moment rel err %.2e", worst_f, worst_m)};
}

Outcome criterion3() {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi), cc(-1.5, 1.5), beta(0.2, 3.0);
    const double h = 1e-5;
    double worst_g = 0.0, worst_h = 0.0;
    for (int i = 0; i < 1000; ++i) {
        RotorConfig cfg = demo_config().rotor;
        cfg.beta = beta(rng);
        cfg.F = Vec2(60.0 * cc(rng), 60.0 * cc(rng));
        cfg.N = Vec2(30.0 * cc(rng), 30.0 * cc(rng));
        const RotorPotential pot(cfg);
        const Vec4 x(angle(rng), angle(rng), angle(rng), angle(rng));
        const Vec4 g = pot.gradient(x);
        const Mat<4> H = pot.hessian(x);
        Vec4 gfd;
        Mat<4> Hfd;
        // unshifted Q: the inf-shift is constant, so differences of Q^ without clipping
        auto q = [&](const Vec4& y) {
            return potential(pot.head(1).head(), y[0], y[1]) + potential(pot.head(2).head(), y[2], y[3]);
        };
        for (int a = 0; a < 4; ++a) {
            Vec4 e = Vec4::Zero();
            e[a] = h;
            gfd[a] = (q(x + e) - q(x - e)) / (2 * h);
            Hfd.col(a) = (pot.gradient(x + e) - pot.gradient(x - e)) / (2 * h);
        }
        worst_g = std::max(worst_g, (g - gfd).norm() / std::max(1.0, g.norm()));
        worst_h = std::max(worst_h, (H - Hfd).norm() / std::max(1.0, H.norm()));
    }
    return {worst_g <= 1e-6 && worst_h <= 1e-5,
            fmt("1000 points, gradient rel err %.2e, Hessian rel err %.2e", worst_g, worst_h)};
}

Outcome criterion4() {
    const Scenario& s = scenario();
    const auto& traj = s.sol.trajectory;
    const SolveReport& rep = s.sol.report;
    double emax = 0.0;
    for (int k = 1; k + 1 < traj.size(); ++k) emax = std::max(emax, std::abs(traj.energy[k]));
    // tail fit of log G on the configured window
    std::vector<double> t(traj.size()), G(traj.size());
    for (int k = 0; k < traj.size(); ++k) {
        t[k] = traj.horizon.time(k);
        G[k] = traj.imbalance[k];
    }
    const double T = traj.horizon.T;
    const RateReport fit = fit_exponential(t, G, s.cfg.analysis.fit_begin * T, s.cfg.analysis.fit_end * T);
    const double mu_fit = 0.5 * fit.mu_fit;  // G decays at twice the rate of the state
    const double lmin = Eigen::SelfAdjointEigenSolver<Mat<4>>(s.pot.hessian(s.pot.optimum())).eigenvalues().minCoeff();
    const double mu_pred = std::sqrt(lmin);
    const bool threshold = exp_threshold(s.cfg.rotor);
    const bool ok = threshold && rep.converged && rep.grad_norm <= 1e-8 && rep.el_residual <= 1e-5 && emax <= 1e-3 &&
                    fit.ok && fit.r2 >= 0.99 && mu_fit >= 0.5 * mu_pred && mu_fit <= 2.0 * mu_pred;
    return {ok, fmt("T=%g iters=%g EL=%.2e |E|max=%.2e", T, rep.iterations, rep.el_residual, emax) +
                    fmt(" r2=%.5f mu_fit=%.4f mu_pred=%.4f", fit.r2, mu_fit, mu_pred)};
}

Outcome criterion5() {
    const Scenario& s = scenario();
    const auto& traj = s.sol.trajectory;
    const RunConfig& cfg = s.cfg;
    // (d, N) per head validated on a grid shifted by verify_offset cells
    double head_slack = std::numeric_limits<double>::infinity();
    for (int h = 1; h <= 2; ++h) {
        const DecayCertificate hc = build_certificate(s.pot.head(h), loj_options_of(cfg));
        head_slack = std::min(head_slack, certificate_grid_slack(s.pot.head(h), hc, cfg.analysis.grid,
                                                                 cfg.analysis.verify_offset));
    }
    // the joint inequality at random points of T^4
    const DecayCertificate& c = s.cert;
    std::mt19937_64 rng(105);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    double joint_slack = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100000; ++i) {
        const Vec4 x(angle(rng), angle(rng), angle(rng), angle(rng));
        joint_slack = std::min(joint_slack, s.pot.value(x) - c.d * std::pow(s.pot.distance(x), c.Nloj));
    }
    // the three bounds, node by node
    const double d0 = traj.distance.front();
    const double uniform = std::pow(c.sigma1 * d0, 1.0 / c.Ntilde);
    const double saturation = std::sqrt(2.0 * c.L) * std::pow(c.sigma1 * d0, 1.0 / (2.0 * c.Ntilde));
    double su = std::numeric_limits<double>::infinity(), sd = su, ss = su;
    for (int k = 0; k < traj.size(); ++k) {
        const double t = traj.horizon.time(k);
        su = std::min(su, uniform - traj.distance[k]);
        if (t > 0.0) sd = std::min(sd, std::pow(c.sigma2 * d0 / t, 1.0 / (c.Nloj * c.Ntilde)) - traj.distance[k]);
        if (k + 1 < traj.size()) ss = std::min(ss, saturation - traj.controls[k].norm());
    }
    const bool ok = head_slack >= 0.0 && joint_slack >= 0.0 && su >= 0.0 && sd >= 0.0 && ss >= 0.0;
    return {ok, fmt("offset-grid slack %.2e, joint slack %.2e, ", head_slack, joint_slack) +
                    fmt("bound slacks uniform %.3f decay %.3f saturation %.3f", su, sd, ss)};
}

Outcome criterion6() {
    RunConfig cfg = demo_config();
    cfg.rotor.F = Vec2::Zero();
    cfg.rotor.N = Vec2::Zero();
    cfg.rotor.beta = 1.7;
    const RotorPotential pot(cfg.rotor);
    const Vec4 phi0(1.0, 0.5 * kPi + 0.7, 2.0, 0.5 * kPi - 0.5);
    const auto sol = solve_open_loop(pot, phi0, Horizon::make(15.0, cfg.solver.dt_max), solve_options_of(cfg));
    double alpha_dev = 0.0;
    for (const auto& x : sol.trajectory.states)
        alpha_dev = std::max({alpha_dev, std::abs(x[0] - phi0[0]), std::abs(x[2] - phi0[2])});
    const Vec4& end = sol.trajectory.states.back();
    const double gap_end = std::max(std::abs(angle_delta(end[1], 0.5 * kPi)), std::abs(angle_delta(end[3], 0.5 * kPi)));
    bool monotone = true;
    for (int k = 1; k < sol.trajectory.size(); ++k)
        monotone = monotone && sol.trajectory.distance[k] <= sol.trajectory.distance[k - 1] + 1e-12;

    // small oscillations of the free flow about the center gamma = 0
    ELState<4> s;
    s.phi = Vec4(1.0, 1e-3, 2.0, 0.0);
    const double dt = 1e-3;
    std::vector<double> crossings;
    double t = 0.0;
    while (crossings.size() < 3 && t < 100.0) {
        const ELState<4> next = rk4_step(pot, s, dt);
        if (s.phi[1] > 0.0 && next.phi[1] <= 0.0) crossings.push_back(t + dt * s.phi[1] / (s.phi[1] - next.phi[1]));
        s = next;
        t += dt;
    }
    const double expected = kTwoPi / std::sqrt(cfg.rotor.beta);
    const double period = crossings.size() == 3 ? 0.5 * (crossings[2] - crossings[0]) : 0.0;
    const double rel = std::abs(period - expected) / expected;
    const bool ok = alpha_dev <= 1e-10 && gap_end <= 1e-3 && monotone && rel <= 0.01;
    return {ok, fmt("alpha drift %.2e, final |gamma - pi/2| %.2e, period %.5f vs %.5f", alpha_dev, gap_end, period,
                    expected)};
}

Outcome criterion7() {
    const RunConfig cfg = demo_config();
    const RotorPotential rp(cfg.rotor);
    bool ok = true;
    std::string detail;
    for (int h = 1; h <= 2; ++h) {
        const HeadPotential& pot = rp.head(h);
        const DecayCertificate cert = build_certificate(pot, loj_options_of(cfg));
        const double u_max = speed_bound(pot, cert, kPi * std::sqrt(2.0));
        ControlLattice lat;
        lat.angles = cfg.rl.angles;
        lat.speeds = cfg.rl.speeds;
        lat.u_max = u_max;
        lat.power = cfg.rl.speed_power;
        ValueTable<2> V0 = initial_guess(pot, cert.L, uniform_dims<2>(cfg.rl.grid));
        V0.set_delta(cfg.rl.cfl * V0.max_cell() / u_max);
        ValueIterationOptions vo;
        vo.max_sweeps = cfg.rl.max_sweeps;
        vo.tol = cfg.rl.tol;
        const auto res = value_iteration(pot, V0, lat, vo);
        const ValueTable<2>& V = res.table;

        bool monotone = res.max_increase <= 1e-9;
        for (std::size_t i = 1; i < res.table_max.size(); ++i)
            monotone = monotone && res.table_max[i] <= res.table_max[i - 1] + 1e-9;
        double v_at_z = 0.0;
        for (const Vec2& z : pot.zeros().points()) v_at_z = std::max(v_at_z, V.interpolate(z));
        const double interp_bound = hj_residual(pot, V).interpolation_error;

        std::mt19937_64 rng(cfg.seed * 1000 + static_cast<std::uint64_t>(h));
        std::uniform_real_distribution<double> angle(0.0, kTwoPi);
        SolveOptions oracle = solve_options_of(cfg);
        oracle.max_iters = cfg.rl.probe_max_iters;
        const Horizon probe_h = Horizon::make(cfg.rl.probe_T, cfg.solver.dt_max);
        double worst = 0.0;
        for (int p = 0; p < 50; ++p) {
            const Vec2 th(angle(rng), angle(rng));
            const double vd = direct_value(pot, th, probe_h, oracle);
            worst = std::max(worst, std::abs(V.interpolate(th) - vd) / std::max(0.05 * vd, 0.02));
        }

        const Vec2 th0 = phi0_of(cfg).segment<2>(2 * (h - 1));
        const auto path = feedback_rollout(pot, V, th0, cfg.rl.rollout_t_end, cfg.rl.rollout_dt);
        const double open =
            solve_open_loop(pot, th0, Horizon::make(cfg.rl.rollout_t_end, cfg.solver.dt_max), solve_options_of(cfg))
                .report.objective;
        const double end_dist = pot.distance(path.states.back());
        const bool head_ok = res.converged && monotone && v_at_z <= interp_bound && worst <= 1.0 &&
                             end_dist <= 2.0 * V.max_cell() && path.cost <= 1.1 * open;
        ok = ok && head_ok;
        if (!detail.empty()) detail += "; ";
        detail += fmt("head%g: sweeps=%g probe ratio=%.3f", h, res.sweeps, worst) +
                  fmt(" end=%.3f cells cost/open=%.4f", end_dist / V.max_cell(), path.cost / open);
    }
    return {ok, detail};
}

Outcome criterion8() {
    const RunConfig cfg = demo_config();
    // 1-D pendulum head against V(gamma) = int sqrt(2 Q^) by composite Simpson
    const double beta = 1.3;
    const PendulumPotential pend(beta);
    const DecayCertificate pc = build_certificate(pend);
    const double u_max = speed_bound(pend, pc, 0.5 * kPi);
    ControlLattice lat1;
    lat1.u_max = u_max;
    lat1.speeds = cfg.rl.speeds;
    lat1.power = cfg.rl.speed_power;
    ValueTable<1> V0 = initial_guess(pend, pc.L, uniform_dims<1>(cfg.rl.grid));
    V0.set_delta(cfg.rl.cfl * V0.max_cell() / u_max);
    const auto res1 = value_iteration(pend, V0, lat1);
    auto oracle = [&](double g) {
        const Vec<1> x(g);
        const double target = g + pend.displacement(x)[0];
        const int m = 2000;
        const double hh = (target - g) / m;
        double sum = 0.0;
        for (int i = 0; i <= m; ++i) {
            const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            sum += w * std::sqrt(2.0 * pend.value(Vec<1>(g + i * hh)));
        }
        return std::abs(sum * hh / 3.0);
    };
    double err = 0.0, vmax = 0.0;
    for (std::size_t f = 0; f < res1.table.size(); ++f) {
        const double g = res1.table.node(f)[0];
        const double v = oracle(g);
        vmax = std::max(vmax, v);
        if (pend.distance(Vec<1>(g)) <= 2.0 * res1.table.max_cell()) continue;
        err = std::max(err, std::abs(res1.table[f] - v));
    }
    const double rel = err / vmax;

    // 2-D residual under 64 -> 128 refinement, both heads
    const RotorPotential rp(cfg.rotor);
    double worst_ratio = 0.0;
    for (int h = 1; h <= 2; ++h) {
        const HeadPotential& pot = rp.head(h);
        const DecayCertificate cert = build_certificate(pot, loj_options_of(cfg));
        const double um = speed_bound(pot, cert, kPi * std::sqrt(2.0));
        ControlLattice lat;
        lat.angles = cfg.rl.angles;
        lat.speeds = cfg.rl.speeds;
        lat.u_max = um;
        lat.power = cfg.rl.speed_power;
        double mean[2];
        for (int r = 0; r < 2; ++r) {
            ValueTable<2> W = initial_guess(pot, cert.L, uniform_dims<2>(r == 0 ? 64 : 128));
            W.set_delta(cfg.rl.cfl * W.max_cell() / um);
            mean[r] = hj_residual(pot, value_iteration(pot, W, lat).table).mean_residual;
        }
        worst_ratio = std::max(worst_ratio, mean[1] / mean[0]);
    }
    return {rel <= 0.02 && worst_ratio <= 0.5,
            fmt("pendulum sup error %.4f of sup V; 2-D mean HJ residual ratio 128/64 = %.3f", rel, worst_ratio)};
}

Outcome criterion9() {
    std::mt19937_64 rng(109);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        Mat2 A;
        A << nd(rng), nd(rng), nd(rng), nd(rng);
        const Mat2 H = A * A.transpose() + 0.05 * Mat2::Identity();
        Eigen::SelfAdjointEigenSolver<Mat2> eig(H);
        const Mat2 C = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
        Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
        M.topRightCorner<2, 2>() = Mat2::Identity();
        M.bottomLeftCorner<2, 2>() = H;
        const Eigen::Matrix4d L = lambda_matrix(C);
        Eigen::Matrix4d D = Eigen::Matrix4d::Zero();
        D.topLeftCorner<2, 2>() = C;
        D.bottomRightCorner<2, 2>() = -C;
        worst = std::max(worst, (L.fullPivLu().solve(M * L) - D).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-10, fmt("100 random H, max entry error %.2e", worst)};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
    return files;
}

Outcome criterion10() {
    const fs::path work = SPINBAL_WORK_DIR;
    const fs::path out = work / "all";
    const std::string config = std::string(SPINBAL_SOURCE_DIR) + "/configs/demo.json";
    // the identical command line twice into the same directory
    const std::string cmd = std::string("SPINBAL_LOG=warn \"") + SPINBAL_CLI + "\" all --config \"" + config +
                            "\" --out \"" + out.string() + "\" --seed 7 > \"" + (work / "cli.log").string() +
                            "\" 2>&1";
    int codes[2];
    std::map<std::string, std::string> runs[2];
    for (int r = 0; r < 2; ++r) {
        fs::remove_all(out);
        fs::create_directories(work);
        const int status = std::system(cmd.c_str());
        codes[r] = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        runs[r] = snapshot(out);
    }
    if (codes[0] == 1 || codes[0] < 0 || codes[0] != codes[1])
        return {false, fmt("cli exit codes %g and %g", codes[0], codes[1])};
    int differ = 0;
    for (const auto& [name, bytes] : runs[0]) {
        const auto it = runs[1].find(name);
        if (it == runs[1].end() || it->second != bytes) ++differ;
    }
    const bool ok = !runs[0].empty() && differ == 0 && runs[0].size() == runs[1].size();
    return {ok, fmt("%g artifacts compared, %g differ (cli exit %g)", static_cast<double>(runs[0].size()), differ,
                    codes[0])};
}

struct Criterion {
    int id;
    const char* name;
    double budget;  ///< seconds
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "steady closed form vs brute force", 30.0, criterion1},
        {2, "static equivalence of the plane decomposition", 5.0, criterion2},
        {3, "derivative oracles", 10.0, criterion3},
        {4, "open-loop scenario reproduction", 120.0, criterion4},
        {5, "decay-bound certificates", 60.0, criterion5},
        {6, "pendulum case", 30.0, criterion6},
        {7, "value iteration", 300.0, criterion7},
        {8, "Hamilton-Jacobi residual", 120.0, criterion8},
        {9, "Lambda conjugacy", 1.0, criterion9},
        {10, "determinism of the all pipeline", 600.0, criterion10},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s criterion %d: %s | %s | %.1f s (budget %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.budget, in_time ? "" : " over budget");
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
