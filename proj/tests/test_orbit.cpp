#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "norbit/orbit.hpp"

using namespace norbit;
namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("propagate_coherent: T = 0 returns the input unchanged") {
    const SqueezedState s(PhasePoint(0.4, -0.7),
                          SiegelMatrix::from_xy(Mat::Constant(1, 1, 1.4), Mat::Constant(1, 1, 0.3)),
                          0.25, std::polar(1.0, 0.4));
    const PropagatorResult r = propagate_coherent(harmonic_oscillator(), s, 0.0, 1e-3);
    CHECK((r.state_out.center - s.center).norm() <= 1e-14);
    CHECK((r.state_out.m.mat() - s.m.mat()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(std::abs(r.state_out.phase - s.phase) <= 1e-14);
    CHECK(r.gamma == 0.0);
}

TEST_CASE("propagate_coherent: harmonic transport against the reference solver") {
    const double hb = 0.1;
    const SqueezedState psi0 = SqueezedState::coherent(PhasePoint(1.0, 0.0), hb);
    const double T = 2.0;
    const PropagatorResult r = propagate_coherent(harmonic_oscillator(), psi0, T, 1e-3);
    CHECK(std::abs(r.state_out.center.x(0) - std::cos(T)) <= 1e-8);
    CHECK(std::abs(r.state_out.center.p(0) + std::sin(T)) <= 1e-8);
    CHECK(std::abs(r.state_out.m.mat()(0, 0) - cplx(0, 1)) <= 1e-8);
    CHECK(std::abs(r.gamma) <= 1e-8);

    SplitStepConfig cfg = auto_reference_config(harmonic_oscillator(), psi0.center, hb, T, 1e-3);
    cfg.potential = [](double x) { return 0.5 * x * x; };
    const GridAxis ax = split_step_axis(cfg.extent, cfg.count);
    const SplitStepResult ref = split_step(sample_on_grid(psi0, ax), cfg);
    CHECK(l2_distance(sample_on_grid(r.state_out, ax), ref.psi_final) <= 1e-5);
}

TEST_CASE("propagate_coherent: linear potential closed form") {
    const double hb = 0.25;
    const SqueezedState psi0 = SqueezedState::coherent(PhasePoint(0.0, 0.0), hb);
    const PropagatorResult r = propagate_coherent(linear_potential(), psi0, 1.0, 1e-3);
    CHECK(std::abs(r.state_out.center.x(0) + 0.5) <= 1e-10);
    CHECK(std::abs(r.state_out.center.p(0) + 1.0) <= 1e-10);
    // alpha([[1,1],[0,1]]) i = (1 + i) / 2
    CHECK(std::abs(r.state_out.m.mat()(0, 0) - cplx(0.5, 0.5)) <= 1e-9);
    CHECK(std::abs(r.gamma - 1.0 / 12.0) <= 1e-8);
    // branch phase: det(A + B i)^(-1/2) = (1 + i)^(-1/2), amplitude dropped
    const cplx expected_phase =
        std::exp(cplx(0, 1.0 / 12.0 / hb)) * std::polar(1.0, -0.5 * std::arg(cplx(1.0, 1.0)));
    CHECK(std::abs(r.state_out.phase - expected_phase) <= 1e-8);
}

TEST_CASE("propagate_coherent: norm, Siegel membership, center transport") {
    std::mt19937_64 rng(211);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const char* name : {"quartic", "pendulum"}) {
        const HamiltonianModel h = builtin_hamiltonian(name);
        const double hb = 0.2 + 0.3 * std::abs(u(rng));
        const PhasePoint z0(1.0 + 0.2 * u(rng), 0.4 * u(rng));
        const SqueezedState psi0(z0,
                                 SiegelMatrix::from_xy(Mat::Constant(1, 1, 0.9 + 0.4 * u(rng)),
                                                       Mat::Constant(1, 1, 0.5 * u(rng))),
                                 hb);
        const PropagatorResult r = propagate_coherent(h, psi0, 1.2, 1e-3);
        CHECK(std::abs(std::abs(r.state_out.phase) - 1.0) <= 1e-8);
        CHECK(r.state_out.m.min_im_eigenvalue() > 0.0);
        const Trajectory tr = flow(h, z0, 1.2, 1e-3);
        CHECK((r.state_out.center - tr.final_point()).norm() <= 1e-12);
        const double width = std::sqrt(hb / r.state_out.m.x()(0, 0));
        const GridAxis ax =
            GridAxis::symmetric(std::abs(r.state_out.center.x(0)) + 12 * width, 2001, "x");
        CHECK(sample_on_grid(r.state_out, ax).l2_norm() == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("propagate_coherent: two short steps equal one long step for quadratic H") {
    const double hb = 0.3;
    const HamiltonianModel h = harmonic_oscillator();
    const SqueezedState psi0(PhasePoint(0.8, -0.2),
                             SiegelMatrix::from_xy(Mat::Constant(1, 1, 1.5), Mat::Constant(1, 1, -0.4)),
                             hb);
    const double t1 = 0.9, t2 = 0.7;
    const PropagatorResult once = propagate_coherent(h, psi0, t1 + t2, 1e-3);
    const PropagatorResult first = propagate_coherent(h, psi0, t1, 1e-3);
    const PropagatorResult second = propagate_coherent(h, first.state_out, t2, 1e-3);
    CHECK((once.state_out.center - second.state_out.center).norm() <= 1e-6);
    CHECK((once.state_out.m.mat() - second.state_out.m.mat()).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(std::abs(once.state_out.phase - second.state_out.phase) <= 1e-6);
}

TEST_CASE("propagate_coherent: explicit expansion point reduces to the centered path") {
    const double hb = 0.2;
    const HamiltonianModel h = quartic_oscillator();
    const SqueezedState psi0 = SqueezedState::coherent(PhasePoint(1.0, 0.0), hb);
    const PropagatorResult direct = propagate_coherent(h, psi0, 0.8, 1e-3);
    const PropagatorResult via = propagate_coherent(h, psi0, 0.8, 1e-3, PhasePoint(1.0, 0.0));
    CHECK((direct.state_out.center - via.state_out.center).norm() <= 1e-12);
    CHECK(std::abs(direct.state_out.phase - via.state_out.phase) <= 1e-12);

    // a slightly displaced expansion point still transports the state well
    // for quadratic H (exact covariance)
    const HamiltonianModel harm = harmonic_oscillator();
    const SqueezedState moved = SqueezedState::coherent(PhasePoint(1.1, 0.1), hb);
    const PropagatorResult off = propagate_coherent(harm, moved, 1.1, 1e-3, PhasePoint(1.0, 0.0));
    SplitStepConfig cfg = auto_reference_config(harm, moved.center, hb, 1.1, 1e-3);
    cfg.potential = [](double x) { return 0.5 * x * x; };
    const GridAxis ax = split_step_axis(cfg.extent, cfg.count);
    const SplitStepResult ref = split_step(sample_on_grid(moved, ax), cfg);
    CHECK(l2_distance(sample_on_grid(off.state_out, ax), ref.psi_final) <= 1e-5);
}

TEST_CASE("propagate_general: coherent input reproduces the closed-form route") {
    const double hb = 0.1;
    const HamiltonianModel h = harmonic_oscillator();
    const PhasePoint z0(0.6, 0.3);
    SplitStepConfig cfg = auto_reference_config(h, z0, hb, 1.0, 1e-3);
    const GridAxis ax = split_step_axis(cfg.extent, cfg.count);
    const GridField1D psi0 = sample_on_grid(SqueezedState::coherent(z0, hb), ax);
    const PhaseSpaceLattice lat = PhaseSpaceLattice::automatic(psi0, hb);
    const GeneralPropagation gen = propagate_general(h, psi0, 1.0, 1e-3, hb, lat);
    CHECK_FALSE(gen.boundary_warning);
    CHECK(gen.kept_coefficients > 0);
    const PropagatorResult direct = propagate_coherent(h, SqueezedState::coherent(z0, hb), 1.0, 1e-3);
    const GridField1D target = sample_on_grid(direct.state_out, ax);
    CHECK(l2_distance(gen.psi, target) / target.l2_norm() <= 1e-3);
}

TEST_CASE("propagate_general: T = 0 reconstructs the input") {
    const double hb = 0.1;
    const HamiltonianModel h = quartic_oscillator();
    const GridAxis ax = split_step_axis(8.0, 1024);
    GridField1D psi0(ax);
    {
        const GridField1D a = sample_on_grid(SqueezedState::coherent(PhasePoint(0.5, 0.2), hb), ax);
        const GridField1D b = sample_on_grid(
            SqueezedState(PhasePoint(-0.3, 0.0),
                          SiegelMatrix::from_xy(Mat::Constant(1, 1, 1.6), Mat::Constant(1, 1, 0.2)),
                          hb),
            ax);
        psi0.values() = a.values() + 0.7 * b.values();
        psi0.normalize();
    }
    const PhaseSpaceLattice lat = PhaseSpaceLattice::automatic(psi0, hb);
    const GeneralPropagation gen = propagate_general(h, psi0, 0.0, 1e-3, hb, lat);
    CHECK(l2_distance(gen.psi, psi0) <= 1e-3);
}

TEST_CASE("propagate_general: harmonic cat state against the reference solver") {
    const double hb = 0.05;
    const double a = 1.0, T = kPi / 4.0;
    const HamiltonianModel h = harmonic_oscillator();
    SplitStepConfig cfg;
    cfg.extent = 6.0;
    cfg.count = 2048;
    cfg.hbar = hb;
    cfg.dt = 1e-4;
    cfg.t_final = T;
    cfg.potential = [](double x) { return 0.5 * x * x; };
    const GridAxis ax = split_step_axis(cfg.extent, cfg.count);
    GridField1D psi0(ax);
    {
        const GridField1D lobe1 = sample_on_grid(SqueezedState::coherent(PhasePoint(a, 0.0), hb), ax);
        const GridField1D lobe2 = sample_on_grid(SqueezedState::coherent(PhasePoint(-a, 0.0), hb), ax);
        psi0.values() = lobe1.values() + lobe2.values();
        psi0.normalize();
    }
    const SplitStepResult ref = split_step(psi0, cfg);
    const PhaseSpaceLattice lat = PhaseSpaceLattice::automatic(psi0, hb);
    const GeneralPropagation gen = propagate_general(h, psi0, T, 1e-3, hb, lat);
    CHECK(l2_distance(gen.psi, ref.psi_final) <= 5e-3);
}

TEST_CASE("error_vs_reference: quadratic Hamiltonian sits at the solver floor") {
    const HbarSweepResult res =
        error_vs_reference(harmonic_oscillator(), PhasePoint(1.0, 0.0), SiegelMatrix::standard(1),
                           {0.4, 0.2, 0.1}, 1.0, 1e-3, 4);
    for (const auto& row : res.rows) CHECK(row.sup_error <= 1e-5);
}

TEST_CASE("error_vs_reference: quartic sqrt-hbar law") {
    const HbarSweepResult res =
        error_vs_reference(quartic_oscillator(), PhasePoint(1.0, 0.0), SiegelMatrix::standard(1),
                           {0.2, 0.1, 0.05, 0.025}, 1.0, 1e-3, 8);
    CHECK(res.slope >= 0.35);
    CHECK(res.slope <= 0.75);
    CHECK(res.monotone_within_10pct);
    CHECK(res.rows.front().sup_error > res.rows.back().sup_error);
}

TEST_CASE("error_vs_reference input validation") {
    CHECK_THROWS(error_vs_reference(harmonic_oscillator(), PhasePoint(1.0, 0.0),
                                    SiegelMatrix::standard(1), {0.1, 0.05}, 1.0, 1e-3));
}
