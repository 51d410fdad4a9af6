#pragma once

// Run configuration: strict-schema JSON with defaults for every optional field.

#include "spinbal/errors.hpp"
#include "spinbal/rotor_model.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

namespace spinbal {

inline constexpr int kConfigFormat = 1;

struct SolverConfig {
    double dt_max = 0.01;
    double tol = 1e-8;
    int max_iters = 20000;
    int memory = 10;
    double T_min = 1.0;
    double T_cap = 30.0;
    double eps = 0.1;  ///< target dist(Phi(T), Z) of the horizon rule
    double energy_tol = 1e-3;
    double terminal_velocity_max = 1e-3;
};

struct AnalysisConfig {
    int grid = 256;
    double verify_offset = 0.5;  ///< phase of the verification grid, in cells
    double safety = 0.9;
    double fit_begin = 0.6;  ///< fractions of T
    double fit_end = 0.95;
    double shooting_T = 10.0;
};

struct RLConfig {
    int grid = 128;
    double delta = 0.0;  ///< 0 selects cfl * h / u_max
    double cfl = 6.0;
    int angles = 16;
    int speeds = 8;
    double speed_power = 2.0;
    std::string quadrature = "trapezoid";
    double eps = 0.05;
    int max_sweeps = 5000;
    double tol = 1e-10;
    int probes = 50;
    double probe_T = 15.0;       ///< horizon of the transcription oracle at the probes
    int probe_max_iters = 2000;  ///< per oracle solve; the oracle keeps the best candidate
    double iteration_cap = 1e12;
    double rollout_t_end = 30.0;
    double rollout_dt = 0.01;
};

struct SimulateConfig {
    double dt = 1e-3;
    double t_end = 50.0;
    int sample_every = 100;
};

struct RunConfig {
    RotorConfig rotor;
    std::array<double, 4> phi0{};
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    SolverConfig solver;
    AnalysisConfig analysis;
    RLConfig rl;
    SimulateConfig simulate;

    /// Throws InvalidArgument naming the first offending field.
    void validate() const;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw InvalidArgument(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
    }
}

inline const json& require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw InvalidArgument(where.empty() ? "config" : where, "must be an object");
    return j;
}

inline std::string join(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

inline void read(const json& obj, const std::string& where, const char* key, double& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) throw InvalidArgument(join(where, key), "must be a number");
    out = v.get<double>();
}

inline void read(const json& obj, const std::string& where, const char* key, int& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw InvalidArgument(join(where, key), "must be an integer");
    out = v.get<int>();
}

inline void read(const json& obj, const std::string& where, const char* key, std::uint64_t& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) throw InvalidArgument(join(where, key), "must be a nonnegative integer");
    out = v.get<std::uint64_t>();
}

inline void read(const json& obj, const std::string& where, const char* key, std::string& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_string()) throw InvalidArgument(join(where, key), "must be a string");
    out = v.get<std::string>();
}

template <std::size_t N>
void read_array(const json& obj, const std::string& where, const char* key, double* out, bool required) {
    if (!obj.contains(key)) {
        if (required) throw InvalidArgument(join(where, key), "is required");
        return;
    }
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != N)
        throw InvalidArgument(join(where, key), "must be an array of " + std::to_string(N) + " numbers");
    for (std::size_t i = 0; i < N; ++i) {
        if (!v[i].is_number()) throw InvalidArgument(join(where, key), "must contain only numbers");
        out[i] = v[i].get<double>();
    }
}

inline void line_column(const std::string& text, std::size_t byte, std::size_t& line, std::size_t& column) {
    line = 1;
    column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
}

}  // namespace detail

inline void RunConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(name, "must be finite and > 0");
    };
    auto at_least = [](int v, int lo, const char* name) {
        if (v < lo) throw InvalidArgument(name, "must be >= " + std::to_string(lo));
    };
    try {
        rotor.validate();
    } catch (const InvalidArgument& e) {
        throw InvalidArgument("rotor." + e.field(), "invalid value");
    }
    for (int i = 0; i < 4; ++i)
        if (!std::isfinite(phi0[i])) throw InvalidArgument("phi0", "angles must be finite");
    positive(solver.dt_max, "solver.dt_max");
    positive(solver.tol, "solver.tol");
    at_least(solver.max_iters, 1, "solver.max_iters");
    at_least(solver.memory, 1, "solver.memory");
    positive(solver.T_min, "solver.T_min");
    positive(solver.T_cap, "solver.T_cap");
    if (solver.T_cap < solver.T_min) throw InvalidArgument("solver.T_cap", "must be >= solver.T_min");
    positive(solver.eps, "solver.eps");
    positive(solver.energy_tol, "solver.energy_tol");
    positive(solver.terminal_velocity_max, "solver.terminal_velocity_max");
    at_least(analysis.grid, 8, "analysis.grid");
    if (!(analysis.verify_offset > 0.0 && analysis.verify_offset < 1.0))
        throw InvalidArgument("analysis.verify_offset", "must lie in (0, 1)");
    if (!(analysis.safety > 0.0 && analysis.safety <= 1.0))
        throw InvalidArgument("analysis.safety", "must lie in (0, 1]");
    if (!(analysis.fit_begin >= 0.0 && analysis.fit_begin < analysis.fit_end && analysis.fit_end <= 1.0))
        throw InvalidArgument("analysis.fit_begin", "need 0 <= fit_begin < fit_end <= 1");
    positive(analysis.shooting_T, "analysis.shooting_T");
    at_least(rl.grid, 8, "rl.grid");
    if (!(rl.delta >= 0.0) || !std::isfinite(rl.delta)) throw InvalidArgument("rl.delta", "must be >= 0");
    positive(rl.cfl, "rl.cfl");
    at_least(rl.angles, 1, "rl.angles");
    at_least(rl.speeds, 1, "rl.speeds");
    positive(rl.speed_power, "rl.speed_power");
    if (rl.quadrature != "trapezoid" && rl.quadrature != "left")
        throw InvalidArgument("rl.quadrature", "must be \"trapezoid\" or \"left\"");
    positive(rl.eps, "rl.eps");
    at_least(rl.max_sweeps, 1, "rl.max_sweeps");
    positive(rl.tol, "rl.tol");
    at_least(rl.probes, 0, "rl.probes");
    positive(rl.probe_T, "rl.probe_T");
    at_least(rl.probe_max_iters, 1, "rl.probe_max_iters");
    positive(rl.iteration_cap, "rl.iteration_cap");
    positive(rl.rollout_t_end, "rl.rollout_t_end");
    positive(rl.rollout_dt, "rl.rollout_dt");
    positive(simulate.dt, "simulate.dt");
    positive(simulate.t_end, "simulate.t_end");
    at_least(simulate.sample_every, 1, "simulate.sample_every");
}

/// Parses and validates a configuration document.
inline RunConfig parse_config(const std::string& text) {
    using detail::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 0, column = 0;
        detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0, line, column);
        throw ParseError("config: malformed JSON", line, column);
    }
    detail::require_object(root, "");
    detail::reject_unknown(root, "", {"rotor", "phi0", "seed", "out_dir", "solver", "analysis", "rl", "simulate"});

    RunConfig cfg;
    if (!root.contains("rotor")) throw InvalidArgument("rotor", "is required");
    {
        const json& r = detail::require_object(root.at("rotor"), "rotor");
        detail::reject_unknown(r, "rotor", {"m1", "m2", "r1", "r2", "a", "b", "omega", "F", "N", "beta"});
        for (const char* k : {"m1", "m2", "r1", "r2", "a", "b", "omega", "F", "N"})
            if (!r.contains(k)) throw InvalidArgument(std::string("rotor.") + k, "is required");
        RotorConfig& rc = cfg.rotor;
        detail::read(r, "rotor", "m1", rc.m1);
        detail::read(r, "rotor", "m2", rc.m2);
        detail::read(r, "rotor", "r1", rc.r1);
        detail::read(r, "rotor", "r2", rc.r2);
        detail::read(r, "rotor", "a", rc.a);
        detail::read(r, "rotor", "b", rc.b);
        detail::read(r, "rotor", "omega", rc.omega);
        detail::read(r, "rotor", "beta", rc.beta);
        detail::read_array<2>(r, "rotor", "F", rc.F.data(), true);
        detail::read_array<2>(r, "rotor", "N", rc.N.data(), true);
    }
    detail::read_array<4>(root, "", "phi0", cfg.phi0.data(), true);
    detail::read(root, "", "seed", cfg.seed);
    detail::read(root, "", "out_dir", cfg.out_dir);

    if (root.contains("solver")) {
        const json& s = detail::require_object(root.at("solver"), "solver");
        detail::reject_unknown(s, "solver", {"dt_max", "tol", "max_iters", "memory", "T_min", "T_cap", "eps",
                                             "energy_tol", "terminal_velocity_max"});
        SolverConfig& c = cfg.solver;
        detail::read(s, "solver", "dt_max", c.dt_max);
        detail::read(s, "solver", "tol", c.tol);
        detail::read(s, "solver", "max_iters", c.max_iters);
        detail::read(s, "solver", "memory", c.memory);
        detail::read(s, "solver", "T_min", c.T_min);
        detail::read(s, "solver", "T_cap", c.T_cap);
        detail::read(s, "solver", "eps", c.eps);
        detail::read(s, "solver", "energy_tol", c.energy_tol);
        detail::read(s, "solver", "terminal_velocity_max", c.terminal_velocity_max);
    }
    if (root.contains("analysis")) {
        const json& s = detail::require_object(root.at("analysis"), "analysis");
        detail::reject_unknown(s, "analysis",
                               {"grid", "verify_offset", "safety", "fit_begin", "fit_end", "shooting_T"});
        AnalysisConfig& c = cfg.analysis;
        detail::read(s, "analysis", "grid", c.grid);
        detail::read(s, "analysis", "verify_offset", c.verify_offset);
        detail::read(s, "analysis", "safety", c.safety);
        detail::read(s, "analysis", "fit_begin", c.fit_begin);
        detail::read(s, "analysis", "fit_end", c.fit_end);
        detail::read(s, "analysis", "shooting_T", c.shooting_T);
    }
    if (root.contains("rl")) {
        const json& s = detail::require_object(root.at("rl"), "rl");
        detail::reject_unknown(s, "rl", {"grid", "delta", "cfl", "angles", "speeds", "speed_power", "quadrature",
                                         "eps", "max_sweeps", "tol", "probes", "probe_T", "probe_max_iters",
                                         "iteration_cap", "rollout_t_end", "rollout_dt"});
        RLConfig& c = cfg.rl;
        detail::read(s, "rl", "grid", c.grid);
        detail::read(s, "rl", "delta", c.delta);
        detail::read(s, "rl", "cfl", c.cfl);
        detail::read(s, "rl", "angles", c.angles);
        detail::read(s, "rl", "speeds", c.speeds);
        detail::read(s, "rl", "speed_power", c.speed_power);
        detail::read(s, "rl", "quadrature", c.quadrature);
        detail::read(s, "rl", "eps", c.eps);
        detail::read(s, "rl", "max_sweeps", c.max_sweeps);
        detail::read(s, "rl", "tol", c.tol);
        detail::read(s, "rl", "probes", c.probes);
        detail::read(s, "rl", "probe_T", c.probe_T);
        detail::read(s, "rl", "probe_max_iters", c.probe_max_iters);
        detail::read(s, "rl", "iteration_cap", c.iteration_cap);
        detail::read(s, "rl", "rollout_t_end", c.rollout_t_end);
        detail::read(s, "rl", "rollout_dt", c.rollout_dt);
    }
    if (root.contains("simulate")) {
        const json& s = detail::require_object(root.at("simulate"), "simulate");
        detail::reject_unknown(s, "simulate", {"dt", "t_end", "sample_every"});
        SimulateConfig& c = cfg.simulate;
        detail::read(s, "simulate", "dt", c.dt);
        detail::read(s, "simulate", "t_end", c.t_end);
        detail::read(s, "simulate", "sample_every", c.sample_every);
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

/// Every field, defaults included.
inline nlohmann::json to_json(const RunConfig& c) {
    using nlohmann::json;
    const RotorConfig& r = c.rotor;
    json j;
    j["format_version"] = kConfigFormat;
    j["rotor"] = {{"m1", r.m1},    {"m2", r.m2},         {"r1", r.r1},          {"r2", r.r2},
                  {"a", r.a},      {"b", r.b},           {"omega", r.omega},    {"F", {r.F.x(), r.F.y()}},
                  {"N", {r.N.x(), r.N.y()}}, {"beta", r.beta}};
    j["phi0"] = c.phi0;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    const SolverConfig& s = c.solver;
    j["solver"] = {{"dt_max", s.dt_max}, {"tol", s.tol},     {"max_iters", s.max_iters},
                   {"memory", s.memory}, {"T_min", s.T_min}, {"T_cap", s.T_cap},
                   {"eps", s.eps},       {"energy_tol", s.energy_tol},
                   {"terminal_velocity_max", s.terminal_velocity_max}};
    const AnalysisConfig& a = c.analysis;
    j["analysis"] = {{"grid", a.grid},           {"verify_offset", a.verify_offset}, {"safety", a.safety},
                     {"fit_begin", a.fit_begin}, {"fit_end", a.fit_end},             {"shooting_T", a.shooting_T}};
    const RLConfig& l = c.rl;
    j["rl"] = {{"grid", l.grid},
               {"delta", l.delta},
               {"cfl", l.cfl},
               {"angles", l.angles},
               {"speeds", l.speeds},
               {"speed_power", l.speed_power},
               {"quadrature", l.quadrature},
               {"eps", l.eps},
               {"max_sweeps", l.max_sweeps},
               {"tol", l.tol},
               {"probes", l.probes},
               {"probe_T", l.probe_T},
               {"probe_max_iters", l.probe_max_iters},
               {"iteration_cap", l.iteration_cap},
               {"rollout_t_end", l.rollout_t_end},
               {"rollout_dt", l.rollout_dt}};
    const SimulateConfig& m = c.simulate;
    j["simulate"] = {{"dt", m.dt}, {"t_end", m.t_end}, {"sample_every", m.sample_every}};
    return j;
}

}  // namespace spinbal
