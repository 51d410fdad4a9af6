#include "demo_rotor.hpp"
#include "spinbal/analysis.hpp"
#include "spinbal/potential.hpp"
#include "spinbal/transcription.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace spinbal;

TEST(Horizon, MakeRespectsStepBound) {
    const Horizon h = Horizon::make(30.0, 0.01);
    EXPECT_EQ(h.Nt, 3001);
    EXPECT_NEAR(h.dt, 0.01, 1e-15);
    const Horizon odd = Horizon::make(1.0, 0.3);
    EXPECT_LE(odd.dt, 0.3);
    EXPECT_NEAR(odd.time(odd.Nt - 1), 1.0, 1e-14);
    EXPECT_THROW(Horizon::make(-1.0, 0.1), InvalidArgument);
}

TEST(Horizon, SelectionFollowsBoundAndCap) {
    DecayCertificate cert;
    cert.d = 0.5;
    cert.Nloj = 2.0;
    cert.Ntilde = 2.0;
    cert.sigma2 = 2.0;
    HorizonOptions opts;
    opts.T_cap = 1e6;
    opts.margin = 0.0;
    const HorizonChoice c = select_horizon(1.5, 0.5, cert, opts);
    EXPECT_NEAR(c.bound, 2.0 * 1.5 / std::pow(0.5, 4.0), 1e-12);
    EXPECT_NEAR(c.horizon.T, c.bound, 1e-9);
    EXPECT_FALSE(c.capped);
    opts.T_cap = 10.0;
    const HorizonChoice capped = select_horizon(1.5, 0.5, cert, opts);
    EXPECT_TRUE(capped.capped);
    EXPECT_DOUBLE_EQ(capped.horizon.T, 10.0);
    cert.d = 0.0;
    EXPECT_THROW(select_horizon(1.5, 0.5, cert, opts), EstimationFailure);
}

TEST(Transcription, GradientMatchesFiniteDifferences) {
    const RotorPotential pot(fixtures::demo_rotor());
    const Horizon hz = Horizon::make(0.5, 0.05);
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd(0.0, 0.3);
    std::vector<Vec4> states(hz.Nt, fixtures::demo_phi0());
    for (int k = 1; k < hz.Nt; ++k) states[k] = states[k - 1] + Vec4(nd(rng), nd(rng), nd(rng), nd(rng)) * 0.1;
    const Eigen::VectorXd g = objective_gradient(pot, states, hz.dt);
    const double h = 1e-6;
    for (int k = 1; k < hz.Nt; ++k)
        for (int a = 0; a < 4; ++a) {
            auto sp = states, sm = states;
            sp[k][a] += h;
            sm[k][a] -= h;
            const double fd = (objective(pot, sp, hz.dt) - objective(pot, sm, hz.dt)) / (2 * h);
            EXPECT_NEAR(g[4 * (k - 1) + a], fd, 1e-6 * std::max(1.0, std::abs(fd)));
        }
}

TEST(Transcription, ConstantPathCostsPotentialTimesNodes) {
    const RotorPotential pot(fixtures::demo_rotor());
    const Horizon hz = Horizon::make(2.0, 0.1);
    const std::vector<Vec4> states(hz.Nt, fixtures::demo_phi0());
    // Nt nodes weighted by dt each: (T + dt) Q^
    EXPECT_NEAR(objective(pot, states, hz.dt), (hz.T + hz.dt) * pot.value(fixtures::demo_phi0()), 1e-12);
}

TEST(Transcription, InitializerReachesNearestZero) {
    const RotorPotential pot(fixtures::demo_rotor());
    const Horizon hz = Horizon::make(5.0, 0.01);
    SolveOptions so;
    so.t_reach = 2.0;
    const auto init = initial_states(pot, fixtures::demo_phi0(), hz, so);
    EXPECT_NEAR(pot.distance(init.back()), 0.0, 1e-12);
    EXPECT_NEAR(pot.distance(init[100]), 0.5 * pot.distance(init[0]), 1e-9);
    so.init = Initializer::Constant;
    EXPECT_EQ(initial_states(pot, fixtures::demo_phi0(), hz, so).back(), fixtures::demo_phi0());
}

TEST(Transcription, DemoSolveSatisfiesOptimality) {
    const RotorPotential pot(fixtures::demo_rotor());
    const Horizon hz = Horizon::make(30.0, 0.01);
    const auto sol = solve_open_loop(pot, fixtures::demo_phi0(), hz);
    EXPECT_TRUE(sol.report.converged) << sol.report.stop_reason;
    EXPECT_LE(sol.report.el_residual, 1e-5);
    EXPECT_LE(sol.report.terminal_velocity, 1e-3);
    for (int k = 1; k + 1 < sol.trajectory.size(); ++k) EXPECT_LE(std::abs(sol.trajectory.energy[k]), 1e-3);
    EXPECT_LT(sol.trajectory.distance.back(), 1e-6);
    EXPECT_NEAR(sol.report.objective, objective(pot, sol.trajectory.states, hz.dt), 1e-12);
    // the history is nonincreasing
    for (std::size_t i = 1; i < sol.report.history.size(); ++i)
        EXPECT_LE(sol.report.history[i], sol.report.history[i - 1] + 1e-12);
    // optimal cost is below the straight-line initializer
    EXPECT_LT(sol.report.objective, objective(pot, initial_states(pot, fixtures::demo_phi0(), hz, {}), hz.dt));
}

TEST(Transcription, LocalPerturbationsDoNotDecreaseCost) {
    const RotorPotential pot(fixtures::demo_rotor());
    const Horizon hz = Horizon::make(10.0, 0.02);
    const auto sol = solve_open_loop(pot, fixtures::demo_phi0(), hz);
    std::mt19937_64 rng(22);
    std::normal_distribution<double> nd(0.0, 1e-3);
    for (int trial = 0; trial < 20; ++trial) {
        auto states = sol.trajectory.states;
        for (int k = 1; k < hz.Nt; ++k) states[k] += Vec4(nd(rng), nd(rng), nd(rng), nd(rng));
        EXPECT_GE(objective(pot, states, hz.dt), sol.report.objective - 1e-10);
    }
}

TEST(Transcription, InvalidOptionsThrow) {
    const RotorPotential pot(fixtures::demo_rotor());
    SolveOptions so;
    so.tol = 0.0;
    EXPECT_THROW(solve_open_loop(pot, fixtures::demo_phi0(), Horizon::make(1.0, 0.1), so), InvalidArgument);
    EXPECT_THROW(solve_open_loop_from(pot, Horizon::make(1.0, 0.1), std::vector<Vec4>(3), {}), InvalidArgument);
}
