#pragma once

// Subcommand orchestration and artifact persistence. Every stage returns a
// JSON summary carrying format_version, per-check verdicts and an overall pass
// flag; artifacts contain no timestamps, so identical (config, seed) inputs
// yield byte-identical files.

#include "spinbal/analysis.hpp"
#include "spinbal/config.hpp"
#include "spinbal/dynamics.hpp"
#include "spinbal/rl.hpp"
#include "spinbal/steady.hpp"
#include "spinbal/transcription.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace spinbal {

inline constexpr int kArtifactFormat = 1;

enum class PathFormat { Csv, Json };

inline PathFormat parse_path_format(const std::string& s) {
    if (s == "csv") return PathFormat::Csv;
    if (s == "json") return PathFormat::Json;
    throw InvalidArgument("format", "must be csv or json");
}

/// One row per time sample: t, four angles, four velocities, G - inf G, E, dist.
struct PathTable {
    static constexpr const char* kColumns[] = {"t",    "alpha1", "gamma1", "alpha2", "gamma2", "psi1",
                                               "psi2", "psi3",   "psi4",   "G",      "E",      "dist"};
    std::vector<std::array<double, 12>> rows;

    void add(double t, const Vec<4>& phi, const Vec<4>& psi, double G, double E, double dist) {
        rows.push_back({t, phi[0], phi[1], phi[2], phi[3], psi[0], psi[1], psi[2], psi[3], G, E, dist});
    }
};

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_path_csv(std::ostream& os, const PathTable& p) {
    os << "# format_version=" << kArtifactFormat << '\n';
    for (std::size_t c = 0; c < 12; ++c) os << (c ? "," : "") << PathTable::kColumns[c];
    os << '\n';
    for (const auto& r : p.rows) {
        for (std::size_t c = 0; c < 12; ++c) os << (c ? "," : "") << format_g17(r[c]);
        os << '\n';
    }
}

inline nlohmann::json path_json(const PathTable& p) {
    nlohmann::json j;
    j["format_version"] = kArtifactFormat;
    j["columns"] = std::vector<std::string>(std::begin(PathTable::kColumns), std::end(PathTable::kColumns));
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : p.rows) rows.push_back(r);
    j["rows"] = std::move(rows);
    return j;
}

inline PathTable path_of(const Trajectory<4>& traj) {
    PathTable p;
    for (int k = 0; k < traj.size(); ++k) {
        const Vec<4> psi = k + 1 < traj.size() ? traj.controls[k] : traj.controls.back();
        p.add(traj.horizon.time(k), traj.states[k], psi, traj.imbalance[k], traj.energy[k], traj.distance[k]);
    }
    return p;
}

struct StageResult {
    nlohmann::json summary;
    bool pass = false;
};

/// Collects named checks into {"name": {"pass", "value", "threshold"}}.
class Verdicts {
public:
    void add(const std::string& name, bool pass, double value, double threshold) {
        j_[name] = {{"pass", pass}, {"value", value}, {"threshold", threshold}};
        all_ = all_ && pass;
    }
    void add(const std::string& name, bool pass) {
        j_[name] = {{"pass", pass}};
        all_ = all_ && pass;
    }
    bool pass() const { return all_; }
    const nlohmann::json& json() const { return j_; }

private:
    nlohmann::json j_ = nlohmann::json::object();
    bool all_ = true;
};

inline nlohmann::json certificate_json(const DecayCertificate& c) {
    return {{"L", c.L},           {"d", c.d},           {"Nloj", c.Nloj}, {"Ntilde", c.Ntilde},
            {"sigma1", c.sigma1}, {"sigma2", c.sigma2}, {"n", c.n},       {"method", c.method}};
}

inline nlohmann::json rate_json(const RateReport& r) {
    return {{"mu_fit", r.mu_fit},           {"mu_pred", r.mu_pred},       {"r2", r.r2},
            {"window_begin", r.window_begin}, {"window_end", r.window_end}, {"samples", r.samples},
            {"ok", r.ok}};
}

inline double max_interior(const std::vector<double>& v) {
    double m = 0.0;
    for (std::size_t k = 1; k + 1 < v.size(); ++k) m = std::max(m, std::abs(v[k]));
    return m;
}

class Pipeline {
public:
    using Logger = std::function<void(const std::string&)>;

    /// Check thresholds.
    static constexpr double kResidualMax = 1e-5;
    static constexpr double kFitR2Min = 0.99;
    static constexpr double kRateLow = 0.5;
    static constexpr double kRateHigh = 2.0;
    static constexpr double kShootingMax = 5e-3;
    static constexpr double kEnergyDriftMax = 1e-6;
    static constexpr double kPendulumAlphaMax = 1e-10;
    static constexpr double kPeriodRelMax = 0.01;
    static constexpr double kMonotoneSlack = 1e-9;
    static constexpr double kRolloutCostRatio = 1.1;
    static constexpr double kRefinementRatio = 0.5;

    Pipeline(RunConfig cfg, PathFormat format = PathFormat::Csv, Logger log = {})
        : cfg_(std::move(cfg)), format_(format), log_(std::move(log)), pot_(cfg_.rotor) {}

    const RunConfig& config() const { return cfg_; }
    const std::filesystem::path& out_dir() const { return out_; }

    StageResult run(const std::string& subcommand) {
        prepare();
        if (subcommand == "steady") return finish("steady", steady());
        if (subcommand == "solve") return finish("solve", solve());
        if (subcommand == "simulate") return finish("simulate", simulate());
        if (subcommand == "analyze") return finish("analyze", analyze());
        if (subcommand == "value-iter") return finish("value_iter", value_iter());
        if (subcommand == "rollout") return finish("rollout", rollout());
        if (subcommand == "all") return all();
        throw InvalidArgument("subcommand", "unknown subcommand '" + subcommand + "'");
    }

    // -----------------------------------------------------------------------

    StageResult steady() {
        info("steady: closed-form optima");
        const SteadyState st = steady_state(cfg_.rotor);
        const Balanceability bal = can_fully_balance(cfg_.rotor);
        Verdicts v;
        nlohmann::json heads = nlohmann::json::array();
        for (int i = 1; i <= 2; ++i) {
            const HeadPotential& hp = pot_.head(i);
            const HeadProblem& h = hp.head();
            const SteadyOptimum& o = i == 1 ? st.head1 : st.head2;
            // brute-force floor on a 256 x 256 grid: no node may undercut the closed form
            const double q_opt = potential(h, o.alpha_bar, o.gamma_bar);
            double grid_min = std::numeric_limits<double>::infinity();
            for_each_grid_node<2>(256, 0.0, [&](const Vec2& x) { grid_min = std::min(grid_min, potential(h, x[0], x[1])); });
            const double gap = q_opt - potential_infimum(h);
            v.add("head" + std::to_string(i) + "_closed_form_minimal", grid_min >= q_opt - 1e-12, q_opt - grid_min, 1e-12);
            v.add("head" + std::to_string(i) + "_residual_matches", std::abs(gap) <= 1e-12, gap, 1e-12);
            nlohmann::json zeros = nlohmann::json::array();
            for (const Vec2& z : hp.zeros().points()) zeros.push_back({z[0], z[1]});
            heads.push_back({{"index", i},
                             {"c", {h.c.x(), h.c.y()}},
                             {"c_norm", h.c.norm()},
                             {"scale", h.scale},
                             {"alpha_bar", o.alpha_bar},
                             {"gamma_bar", o.gamma_bar},
                             {"residual", o.residual},
                             {"inf_G", h.scale * h.scale * o.residual},
                             {"degenerate", o.degenerate},
                             {"can_fully_balance", i == 1 ? bal.head1 : bal.head2},
                             {"zeros", zeros},
                             {"zero_circles", hp.zeros().circles()}});
        }
        nlohmann::json masses = nlohmann::json::array();
        for (const auto& m : st.masses) masses.push_back({m.x(), m.y(), m.z()});
        nlohmann::json s = {{"heads", heads},
                            {"masses", masses},
                            {"total_residual", st.total_residual()},
                            {"can_fully_balance", bal.overall()},
                            {"exp_threshold", exp_threshold(cfg_.rotor)}};
        return {stage_json(std::move(s), v), v.pass()};
    }

    StageResult solve() {
        const auto& sol = solution();
        const auto& traj = sol.trajectory;
        const SolveReport& rep = sol.report;
        write_path("trajectory", path_of(traj));

        Verdicts v;
        v.add("converged", rep.converged);
        v.add("el_residual", rep.el_residual <= kResidualMax, rep.el_residual, kResidualMax);
        const double emax = max_interior(traj.energy);
        v.add("energy", emax <= cfg_.solver.energy_tol, emax, cfg_.solver.energy_tol);

        nlohmann::json s = {{"horizon", horizon_json()},
                            {"objective", rep.objective},
                            {"iterations", rep.iterations},
                            {"grad_norm", rep.grad_norm},
                            {"el_residual", rep.el_residual},
                            {"terminal_velocity", rep.terminal_velocity},
                            {"stop_reason", rep.stop_reason},
                            {"max_interior_energy", emax},
                            {"G0", traj.imbalance.front()},
                            {"G_end", traj.imbalance.back()},
                            {"G_monotone_from", monotone_from(traj)},
                            {"dist_end", traj.distance.back()},
                            {"certificate", certificate_json(certificate())}};
        add_rate(s, v, traj);
        return {stage_json(std::move(s), v), v.pass()};
    }

    StageResult simulate() {
        Verdicts v;
        nlohmann::json s;

        // Shooting and Pontryagin checks on a horizon short enough that the
        // unstable EL flow stays within integration accuracy.
        const Horizon hz = Horizon::make(std::min(cfg_.analysis.shooting_T, horizon().T), cfg_.solver.dt_max);
        info("simulate: shooting check on T = " + format_g17(hz.T));
        const auto shot_sol = solve_open_loop(pot_, phi0(), hz, solve_options());
        const ShootingReport shot = shooting_check(pot_, shot_sol.trajectory);
        const auto pr = pontryagin_residual(pot_, solution().trajectory);
        const double pr_max = *std::max_element(pr.begin(), pr.end());
        v.add("shooting", shot.max_deviation <= kShootingMax, shot.max_deviation, kShootingMax);
        v.add("pontryagin_residual", pr_max <= kResidualMax, pr_max, kResidualMax);
        s["shooting"] = {{"T", hz.T}, {"window_end", shot.window_end}, {"nodes", shot.nodes},
                         {"max_deviation", shot.max_deviation}};
        s["pontryagin_residual"] = pr_max;

        // Free EL flow from the optimal initial state.
        ELState<4> init;
        init.phi = shot_sol.trajectory.states[0];
        init.phidot = shot_sol.trajectory.controls[0] - 0.5 * hz.dt * pot_.gradient(init.phi);
        info("simulate: EL flow to t = " + format_g17(cfg_.simulate.t_end));
        const auto path = integrate_el(pot_, init, cfg_.simulate.t_end, cfg_.simulate.dt, cfg_.simulate.sample_every);
        PathTable table;
        double drift = 0.0;
        for (const auto& smp : path) {
            drift = std::max(drift, std::abs(smp.energy - path.front().energy));
            table.add(smp.t, smp.state.phi, smp.state.phidot, pot_.imbalance(smp.state.phi), smp.energy,
                      pot_.distance(smp.state.phi));
        }
        write_path("el_flow", table);
        v.add("energy_drift", drift <= kEnergyDriftMax, drift, kEnergyDriftMax);
        s["el_flow"] = {{"t_end", cfg_.simulate.t_end}, {"dt", cfg_.simulate.dt}, {"samples", path.size()},
                        {"energy0", path.front().energy}, {"energy_drift", drift}};

        s["pendulum"] = pendulum_checks(v);
        return {stage_json(std::move(s), v), v.pass()};
    }

    StageResult analyze() {
        Verdicts v;
        nlohmann::json heads = nlohmann::json::array();
        const LojasiewiczOptions lo = loj_options();
        for (int i = 1; i <= 2; ++i) {
            const std::string tag = "head" + std::to_string(i);
            info("analyze: " + tag + " constants");
            const HeadPotential& hp = pot_.head(i);
            const LipschitzEstimate lip = estimate_lipschitz(hp, lo.resolution);
            const LojasiewiczEstimate loj = estimate_lojasiewicz(hp, lo);
            const DecayCertificate cert = build_certificate(lip.L, loj.d, loj.Nloj, 2, loj.method);
            const double h = kTwoPi / cfg_.analysis.grid;
            const double slack = certificate_grid_slack(hp, cert, cfg_.analysis.grid, cfg_.analysis.verify_offset);
            v.add(tag + "_offset_grid_slack", slack >= 0.0, slack, 0.0);
            nlohmann::json hj = {{"L", lip.L},
                                 {"grid_L", lip.grid_L},
                                 {"d", loj.d},
                                 {"Nloj", loj.Nloj},
                                 {"grid_min", loj.grid_min},
                                 {"local_min", loj.local_min},
                                 {"method", loj.method},
                                 {"grid_step", h},
                                 {"offset_grid_slack", slack},
                                 {"certificate", certificate_json(cert)}};
            if (has_positive_definite_optimum(hp)) {
                const Mat2 H = hp.hessian(hp.optimum());
                const double lmin = Eigen::SelfAdjointEigenSolver<Mat2>(H).eigenvalues().minCoeff();
                const double conj = lambda_conjugacy_error(H);
                hj["lambda_min"] = lmin;
                hj["lambda_conjugacy_error"] = conj;
                v.add(tag + "_lambda_conjugacy", conj <= 1e-10, conj, 1e-10);
                v.add(tag + "_local_constant", loj.local_min >= 0.4 * 0.5 * lmin, loj.local_min, 0.2 * lmin);
            }
            heads.push_back(std::move(hj));
        }
        const auto& traj = solution().trajectory;
        const DecayBoundReport db = check_decay_bounds(certificate(), traj);
        v.add("uniform_bound", db.min_uniform_slack >= 0.0, db.min_uniform_slack, 0.0);
        v.add("decay_bound", db.min_decay_slack >= 0.0, db.min_decay_slack, 0.0);
        v.add("saturation_bound", db.saturation_slack >= 0.0, db.saturation_slack, 0.0);

        std::ostringstream bounds;
        bounds << "# format_version=" << kArtifactFormat << "\nt,dist,uniform_margin,decay_margin,speed\n";
        for (int k = 0; k < traj.size(); ++k) {
            const double speed = (k + 1 < traj.size() ? traj.controls[k] : traj.controls.back()).norm();
            bounds << format_g17(traj.horizon.time(k)) << ',' << format_g17(traj.distance[k]) << ','
                   << format_g17(db.uniform_margin[k]) << ',' << format_g17(db.decay_margin[k]) << ','
                   << format_g17(speed) << '\n';
        }
        write_text("bounds.csv", bounds.str());

        nlohmann::json s = {{"heads", heads},
                            {"certificate", certificate_json(certificate())},
                            {"bounds",
                             {{"dist0", db.dist0},
                              {"uniform_bound", db.uniform_bound},
                              {"min_uniform_slack", db.min_uniform_slack},
                              {"min_decay_slack", db.min_decay_slack},
                              {"saturation_bound", db.saturation_bound},
                              {"max_speed", db.max_speed},
                              {"saturation_slack", db.saturation_slack}}}};
        add_rate(s, v, traj);
        return {stage_json(std::move(s), v), v.pass()};
    }

    StageResult value_iter() {
        Verdicts v;
        nlohmann::json heads = nlohmann::json::array();
        for (int i = 1; i <= 2; ++i) {
            const std::string tag = "head" + std::to_string(i);
            const HeadPotential& hp = pot_.head(i);
            const HeadTable& ht = head_table(i);
            const ValueTable<2>& table = ht.result.table;
            write_table_files(i, table);

            v.add(tag + "_converged", ht.result.converged, ht.result.last_change, cfg_.rl.tol);
            v.add(tag + "_monotone", ht.result.max_increase <= kMonotoneSlack, ht.result.max_increase, kMonotoneSlack);

            const HJReport hj = hj_residual(hp, table);
            double v_at_z = 0.0;
            for (const Vec2& z : hp.zeros().points()) v_at_z = std::max(v_at_z, table.interpolate(z));
            for (double level : hp.zeros().circles())
                for (int k = 0; k < 64; ++k) v_at_z = std::max(v_at_z, table.interpolate(Vec2(kTwoPi * k / 64, level)));
            v.add(tag + "_value_at_Z", v_at_z <= hj.interpolation_error, v_at_z, hj.interpolation_error);

            info("value-iter: " + tag + " refinement check");
            const HJReport coarse = hj_residual(hp, run_table(hp, std::max(8, cfg_.rl.grid / 2)).table);
            const double ratio = hj.mean_residual / coarse.mean_residual;
            v.add(tag + "_hj_refinement", ratio <= kRefinementRatio, ratio, kRefinementRatio);

            info("value-iter: " + tag + " probes");
            std::mt19937_64 rng(cfg_.seed + static_cast<std::uint64_t>(i));
            std::uniform_real_distribution<double> angle(0.0, kTwoPi);
            const Horizon hz = Horizon::make(cfg_.rl.probe_T, cfg_.solver.dt_max);
            SolveOptions oracle = solve_options();
            oracle.max_iters = std::min(oracle.max_iters, cfg_.rl.probe_max_iters);
            double worst = 0.0, excess = -std::numeric_limits<double>::infinity();
            nlohmann::json probes = nlohmann::json::array();
            for (int p = 0; p < cfg_.rl.probes; ++p) {
                const Vec2 th(angle(rng), angle(rng));
                const double vd = direct_value(hp, th, hz, oracle);
                const double vt = table.interpolate(th);
                const double tol = std::max(0.05 * vd, 0.02);
                worst = std::max(worst, std::abs(vt - vd) / tol);
                excess = std::max(excess, vt - vd);
                probes.push_back({th[0], th[1], vt, vd});
            }
            v.add(tag + "_probes", worst <= 1.0, worst, 1.0);

            const IterationBound ib = required_iterations(ht.certificate, table.delta(), cfg_.rl.eps, cfg_.rl.iteration_cap);
            heads.push_back({{"grid", table.dims()},
                             {"delta", table.delta()},
                             {"u_max", ht.u_max},
                             {"sweeps", ht.result.sweeps},
                             {"last_change", ht.result.last_change},
                             {"max_increase", ht.result.max_increase},
                             {"table_max", table.max_value()},
                             {"value_at_Z", v_at_z},
                             {"hj",
                              {{"mean_residual", hj.mean_residual},
                               {"max_residual", hj.max_residual},
                               {"coarse_mean_residual", coarse.mean_residual},
                               {"refinement_ratio", ratio},
                               {"interpolation_error", hj.interpolation_error},
                               {"tolerance", hj.tolerance},
                               {"evaluated", hj.evaluated}}},
                             {"probe_worst_ratio", worst},
                             {"probe_max_excess", excess},
                             {"probes", probes},
                             {"iteration_bound",
                              {{"t_eps", ib.t_eps}, {"bound", ib.bound}, {"count", ib.count}, {"overflow", ib.overflow}}},
                             {"certificate", certificate_json(ht.certificate)}});
        }
        nlohmann::json s = {{"heads", heads}};
        return {stage_json(std::move(s), v), v.pass()};
    }

    StageResult rollout() {
        Verdicts v;
        nlohmann::json heads = nlohmann::json::array();
        std::array<RolloutPath<2>, 2> paths;
        std::array<const ValueTable<2>*, 2> tables{};
        std::array<std::optional<ValueTable<2>>, 2> loaded;
        for (int i = 1; i <= 2; ++i) {
            const std::string tag = "head" + std::to_string(i);
            const HeadPotential& hp = pot_.head(i);
            std::string source = "computed";
            if (!tables_[i - 1]) {
                loaded[i - 1] = load_table(i);
                if (loaded[i - 1]) source = "loaded";
            }
            const ValueTable<2>& table = loaded[i - 1] ? *loaded[i - 1] : head_table(i).result.table;
            tables[i - 1] = &table;
            const Vec2 th0 = phi0().segment<2>(2 * (i - 1));
            info("rollout: " + tag);
            paths[i - 1] = feedback_rollout(hp, table, th0, cfg_.rl.rollout_t_end, cfg_.rl.rollout_dt);
            const auto& path = paths[i - 1];
            const Horizon hz = Horizon::make(cfg_.rl.rollout_t_end, cfg_.solver.dt_max);
            const double open = solve_open_loop(hp, th0, hz, solve_options()).report.objective;
            const double end_dist = hp.distance(path.states.back());
            const double cells = 2.0 * table.max_cell();
            v.add(tag + "_endpoint", end_dist <= cells, end_dist, cells);
            v.add(tag + "_cost", path.cost <= kRolloutCostRatio * open, path.cost / open, kRolloutCostRatio);
            v.add(tag + "_no_stall", !path.stalled);
            heads.push_back({{"table", source},
                             {"cost", path.cost},
                             {"open_loop_objective", open},
                             {"cost_ratio", path.cost / open},
                             {"end_dist", end_dist},
                             {"stalled", path.stalled}});
        }
        PathTable table;
        for (std::size_t k = 0; k < paths[0].t.size(); ++k) {
            Vec<4> phi, psi;
            phi << paths[0].states[k], paths[1].states[k];
            psi << -tables[0]->gradient(paths[0].states[k]), -tables[1]->gradient(paths[1].states[k]);
            table.add(paths[0].t[k], phi, psi, paths[0].imbalance[k] + paths[1].imbalance[k],
                      0.5 * psi.squaredNorm() - pot_.value(phi), pot_.distance(phi));
        }
        write_path("rollout_path", table);
        nlohmann::json s = {{"heads", heads}, {"t_end", cfg_.rl.rollout_t_end}, {"dt", cfg_.rl.rollout_dt}};
        return {stage_json(std::move(s), v), v.pass()};
    }

    StageResult all() {
        nlohmann::json summary;
        summary["format_version"] = kArtifactFormat;
        summary["stage"] = "all";
        bool pass = true;
        const std::pair<const char*, StageResult (Pipeline::*)()> stages[] = {
            {"steady", &Pipeline::steady},       {"solve", &Pipeline::solve},
            {"simulate", &Pipeline::simulate},   {"analyze", &Pipeline::analyze},
            {"value_iter", &Pipeline::value_iter}, {"rollout", &Pipeline::rollout}};
        for (const auto& [name, fn] : stages) {
            try {
                StageResult r = finish(name, (this->*fn)());
                summary["stages"][name] = {{"pass", r.pass}};
                pass = pass && r.pass;
            } catch (const std::exception& e) {
                summary["stages"][name] = {{"pass", false}, {"error", e.what()}};
                summary["partial"] = true;
                summary["pass"] = false;
                write_text("summary.json", summary.dump(2) + "\n");
                throw;
            }
        }
        summary["partial"] = false;
        summary["pass"] = pass;
        write_text("summary.json", summary.dump(2) + "\n");
        return {summary, pass};
    }

private:
    struct HeadTable {
        DecayCertificate certificate;
        double u_max = 0.0;
        ValueIterationResult<2> result;
    };

    void info(const std::string& msg) const {
        if (log_) log_(msg);
    }

    void prepare() {
        out_ = cfg_.out_dir;
        std::filesystem::create_directories(out_);
        write_text("config.json", to_json(cfg_).dump(2) + "\n");
    }

    StageResult finish(const std::string& name, StageResult r) {
        r.summary["stage"] = name;
        write_text(name + ".json", r.summary.dump(2) + "\n");
        return r;
    }

    static nlohmann::json stage_json(nlohmann::json body, const Verdicts& v) {
        body["format_version"] = kArtifactFormat;
        body["verdicts"] = v.json();
        body["pass"] = v.pass();
        return body;
    }

    void write_text(const std::string& name, const std::string& text) const {
        std::ofstream os(out_ / name, std::ios::binary);
        if (!os) throw Error("cannot write " + (out_ / name).string());
        os << text;
    }

    void write_path(const std::string& stem, const PathTable& p) const {
        if (format_ == PathFormat::Csv) {
            std::ostringstream os;
            write_path_csv(os, p);
            write_text(stem + ".csv", os.str());
        } else {
            write_text(stem + ".json", path_json(p).dump() + "\n");
        }
    }

    Vec<4> phi0() const { return Vec<4>(cfg_.phi0[0], cfg_.phi0[1], cfg_.phi0[2], cfg_.phi0[3]); }

    LojasiewiczOptions loj_options() const {
        LojasiewiczOptions lo;
        lo.resolution = cfg_.analysis.grid;
        lo.safety = cfg_.analysis.safety;
        return lo;
    }

    SolveOptions solve_options() const {
        SolveOptions so;
        so.tol = cfg_.solver.tol;
        so.max_iters = cfg_.solver.max_iters;
        so.memory = cfg_.solver.memory;
        so.terminal_velocity_max = cfg_.solver.terminal_velocity_max;
        return so;
    }

    const DecayCertificate& certificate() {
        if (!cert_) {
            info("certificate: joint Lojasiewicz constants");
            cert_ = build_certificate(pot_, loj_options());
        }
        return *cert_;
    }

    const HorizonChoice& horizon_choice() {
        if (!horizon_) {
            HorizonOptions ho;
            ho.dt_max = cfg_.solver.dt_max;
            ho.T_min = cfg_.solver.T_min;
            ho.T_cap = cfg_.solver.T_cap;
            horizon_ = select_horizon(pot_, phi0(), cfg_.solver.eps, certificate(), ho);
        }
        return *horizon_;
    }

    const Horizon& horizon() { return horizon_choice().horizon; }

    nlohmann::json horizon_json() {
        const HorizonChoice& h = horizon_choice();
        return {{"T", h.horizon.T}, {"Nt", h.horizon.Nt}, {"dt", h.horizon.dt}, {"bound", h.bound}, {"capped", h.capped}};
    }

    const OpenLoopSolution<RotorPotential>& solution() {
        if (!solution_) {
            info("solve: open-loop transcription, T = " + format_g17(horizon().T));
            solution_ = solve_open_loop(pot_, phi0(), horizon(), solve_options());
        }
        return *solution_;
    }

    /// First time after which G never increases.
    static double monotone_from(const Trajectory<4>& traj) {
        int k = traj.size() - 1;
        while (k > 0 && traj.imbalance[k - 1] >= traj.imbalance[k]) --k;
        return traj.horizon.time(k);
    }

    void add_rate(nlohmann::json& s, Verdicts& v, const Trajectory<4>& traj) {
        FitWindow w{cfg_.analysis.fit_begin, cfg_.analysis.fit_end};
        TrajectoryRates rates = fit_rate(traj, w);
        if (!exp_threshold(cfg_.rotor)) {
            s["rate"] = {{"applicable", false}, {"dist", rate_json(rates.dist)}, {"sqrt_G", rate_json(rates.sqrt_imbalance)}};
            return;
        }
        const double mu_pred = predict_rate(pot_);
        rates.dist.mu_pred = mu_pred;
        rates.sqrt_imbalance.mu_pred = mu_pred;
        const RateReport& g = rates.sqrt_imbalance;
        const double ratio = g.mu_fit / mu_pred;
        v.add("G_tail_fit_r2", g.ok && g.r2 >= kFitR2Min, g.r2, kFitR2Min);
        v.add("rate_ratio", g.ok && ratio >= kRateLow && ratio <= kRateHigh, ratio, kRateHigh);
        s["rate"] = {{"applicable", true},
                     {"mu_pred", mu_pred},
                     {"ratio", ratio},
                     {"dist", rate_json(rates.dist)},
                     {"sqrt_G", rate_json(rates.sqrt_imbalance)}};
    }

    /// Head without imbalance: the intermediate angle of the optimum stays put
    /// while the gap angle settles at pi/2; the free flow oscillates about
    /// gamma = 0 with period 2 pi / sqrt(beta).
    nlohmann::json pendulum_checks(Verdicts& v) {
        HeadProblem hp;
        hp.c = Vec2::Zero();
        hp.beta = cfg_.rotor.beta;
        const HeadPotential pot(hp);
        const Vec2 th0(cfg_.phi0[0], 0.5 * kPi + 0.6);
        const Horizon hz = Horizon::make(cfg_.analysis.shooting_T, cfg_.solver.dt_max);
        const auto sol = solve_open_loop(pot, th0, hz, solve_options());
        double alpha_dev = 0.0;
        for (const auto& x : sol.trajectory.states) alpha_dev = std::max(alpha_dev, std::abs(x[0] - th0[0]));
        const double gap_end = std::abs(angle_delta(sol.trajectory.states.back()[1], 0.5 * kPi));
        const double gap0 = std::abs(angle_delta(th0[1], 0.5 * kPi));
        v.add("pendulum_alpha_constant", alpha_dev <= kPendulumAlphaMax, alpha_dev, kPendulumAlphaMax);
        v.add("pendulum_gamma_converges", gap_end <= 0.1 * gap0, gap_end, 0.1 * gap0);

        const double period = small_amplitude_period(pot);
        const double expected = kTwoPi / std::sqrt(hp.beta);
        const double rel = std::abs(period - expected) / expected;
        v.add("pendulum_period", rel <= kPeriodRelMax, rel, kPeriodRelMax);

        const PhasePortrait pp = phase_portrait(hp);
        std::ostringstream os;
        os << "# format_version=" << kArtifactFormat << " separatrix_energy=" << pp.separatrix_energy
           << "\ngamma,rate,accel,energy\n";
        for (const auto& f : pp.field)
            os << format_g17(f.gamma) << ',' << format_g17(f.rate) << ',' << format_g17(f.accel) << ','
               << format_g17(f.energy) << '\n';
        write_text("phase_portrait.csv", os.str());
        std::ostringstream sep;
        sep << "# format_version=" << kArtifactFormat << "\ngamma,rate\n";
        for (const auto& [g, r] : pp.separatrix) sep << format_g17(g) << ',' << format_g17(r) << '\n';
        write_text("separatrix.csv", sep.str());

        return {{"alpha_deviation", alpha_dev}, {"gap_end", gap_end}, {"period", period}, {"period_expected", expected}};
    }

    /// Period of the free flow from (gamma = 0.01, gamma' = 0) from successive
    /// downward zero crossings of gamma, located by linear interpolation.
    static double small_amplitude_period(const HeadPotential& pot) {
        ELState<2> s;
        s.phi = Vec2(0.0, 0.01);
        const double dt = 1e-3;
        std::vector<double> crossings;
        double t = 0.0;
        while (crossings.size() < 3 && t < 200.0) {
            const ELState<2> n = rk4_step(pot, s, dt);
            if (s.phi[1] > 0.0 && n.phi[1] <= 0.0) crossings.push_back(t + dt * s.phi[1] / (s.phi[1] - n.phi[1]));
            s = n;
            t += dt;
        }
        if (crossings.size() < 3) throw EstimationFailure("pendulum period: no oscillation detected");
        return 0.5 * (crossings[2] - crossings[0]);
    }

    ValueIterationResult<2> run_table(const HeadPotential& hp, int n, DecayCertificate* cert_out = nullptr,
                                      double* umax_out = nullptr) const {
        const DecayCertificate cert = build_certificate(hp, loj_options());
        const double u_max = speed_bound(hp, cert, kPi * std::sqrt(2.0));
        ControlLattice lat;
        lat.angles = cfg_.rl.angles;
        lat.speeds = cfg_.rl.speeds;
        lat.u_max = u_max;
        lat.power = cfg_.rl.speed_power;
        ValueTable<2> V0 = initial_guess(hp, cert.L, uniform_dims<2>(n));
        V0.set_delta(cfg_.rl.delta > 0.0 ? cfg_.rl.delta : cfg_.rl.cfl * V0.max_cell() / u_max);
        ValueIterationOptions vo;
        vo.max_sweeps = cfg_.rl.max_sweeps;
        vo.tol = cfg_.rl.tol;
        vo.sweep.quadrature = cfg_.rl.quadrature == "left" ? Quadrature::Left : Quadrature::Trapezoid;
        ValueIterationResult<2> res = value_iteration(hp, std::move(V0), lat, vo);
        if (cert_out) *cert_out = cert;
        if (umax_out) *umax_out = u_max;
        return res;
    }

    const HeadTable& head_table(int i) {
        auto& slot = tables_[i - 1];
        if (!slot) {
            info("value-iter: head" + std::to_string(i) + " sweeps on " + std::to_string(cfg_.rl.grid) + "^2");
            HeadTable ht;
            ht.result = run_table(pot_.head(i), cfg_.rl.grid, &ht.certificate, &ht.u_max);
            slot = std::move(ht);
        }
        return *slot;
    }

    std::string table_stem(int i) const { return "value_head" + std::to_string(i); }

    void write_table_files(int i, const ValueTable<2>& table) const {
        std::ostringstream bin(std::ios::binary);
        write_table(bin, table);
        write_text(table_stem(i) + ".bin", bin.str());
        std::ostringstream csv;
        write_table_csv(csv, table);
        write_text(table_stem(i) + ".csv", csv.str());
    }

    /// A stored table is reused when its grid matches the configuration.
    std::optional<ValueTable<2>> load_table(int i) const {
        std::ifstream is(out_ / (table_stem(i) + ".bin"), std::ios::binary);
        if (!is) return std::nullopt;
        ValueTable<2> t = read_table<2>(is);
        if (t.dims() != uniform_dims<2>(cfg_.rl.grid)) return std::nullopt;
        info("rollout: loaded " + table_stem(i) + ".bin");
        return t;
    }

    RunConfig cfg_;
    PathFormat format_;
    Logger log_;
    RotorPotential pot_;
    std::filesystem::path out_;
    std::optional<DecayCertificate> cert_;
    std::optional<HorizonChoice> horizon_;
    std::optional<OpenLoopSolution<RotorPotential>> solution_;
    std::array<std::optional<HeadTable>, 2> tables_;
};

}  // namespace spinbal
