#include <doctest.h>

#include <cmath>
#include <numbers>

#include "norbit/gaussian.hpp"
#include "norbit/splitstep.hpp"

using namespace norbit;
namespace {
constexpr double kPi = std::numbers::pi;

double position_variance(const GridField1D& f) {
    double nrm = 0, mean = 0;
    for (int i = 0; i < f.size(); ++i) {
        const double w = std::norm(f.values()(i));
        nrm += w;
        mean += w * f.axis().coord(i);
    }
    mean /= nrm;
    double var = 0;
    for (int i = 0; i < f.size(); ++i)
        var += std::norm(f.values()(i)) * std::pow(f.axis().coord(i) - mean, 2);
    return var / nrm;
}
}  // namespace

TEST_CASE("free evolution: Gaussian variance growth law") {
    const double hb = 0.5, sigma0_sq = hb / 2.0;  // standard coherent state width
    SplitStepConfig cfg;
    cfg.extent = 20.0;
    cfg.count = 1024;
    cfg.hbar = hb;
    cfg.dt = 5e-4;
    cfg.t_final = 2.0;
    cfg.potential = [](double) { return 0.0; };
    const GridAxis ax = split_step_axis(cfg.extent, cfg.count);
    const GridField1D psi0 = sample_on_grid(SqueezedState::coherent(PhasePoint(0.0, 0.0), hb), ax);
    const SplitStepResult res = split_step(psi0, cfg);
    const double expected =
        sigma0_sq + std::pow(hb * cfg.t_final, 2) / (4.0 * 1.0 * sigma0_sq) / 1.0;
    // sigma^2(t) = sigma^2(0) + (hbar t / 2 m sigma(0))^2
    CHECK(position_variance(res.psi_final) == doctest::Approx(expected).epsilon(1e-6));
    CHECK(res.norm_drift <= 1e-10);
}

TEST_CASE("harmonic potential: center follows the classical rotation") {
    const double hb = 0.2;
    SplitStepConfig cfg;
    cfg.extent = 10.0;
    cfg.count = 2048;
    cfg.hbar = hb;
    cfg.dt = 2e-4;
    cfg.t_final = 1.3;
    cfg.potential = [](double x) { return 0.5 * x * x; };
    const GridAxis ax = split_step_axis(cfg.extent, cfg.count);
    const GridField1D psi0 = sample_on_grid(SqueezedState::coherent(PhasePoint(1.0, 0.0), hb), ax);
    const SplitStepResult res = split_step(psi0, cfg);
    double nrm = 0, mean = 0;
    for (int i = 0; i < res.psi_final.size(); ++i) {
        const double w = std::norm(res.psi_final.values()(i));
        nrm += w;
        mean += w * ax.coord(i);
    }
    mean /= nrm;
    CHECK(std::abs(mean - std::cos(cfg.t_final)) <= 1e-6);
}

TEST_CASE("norm conservation at every snapshot") {
    const double hb = 0.3;
    SplitStepConfig cfg;
    cfg.extent = 12.0;
    cfg.count = 1024;
    cfg.hbar = hb;
    cfg.dt = 1e-3;
    cfg.t_final = 2.0;
    cfg.snapshot_times = {0.5, 1.0, 1.5, 2.0};
    cfg.potential = [](double x) { return 0.25 * x * x * x * x; };
    const GridAxis ax = split_step_axis(cfg.extent, cfg.count);
    const GridField1D psi0 = sample_on_grid(SqueezedState::coherent(PhasePoint(0.8, 0.0), hb), ax);
    const SplitStepResult res = split_step(psi0, cfg);
    REQUIRE(res.snapshots.size() == 4);
    for (const auto& snap : res.snapshots)
        CHECK(std::abs(snap.l2_norm() - 1.0) <= 1e-10);
}

TEST_CASE("second-order convergence in dt against free closed form") {
    const double hb = 1.0;
    const double T = 1.0;
    const PhasePoint z0(0.0, 1.0);
    std::vector<double> errs;
    const std::vector<double> dts = {4e-3, 2e-3, 1e-3};
    for (double dt : dts) {
        SplitStepConfig cfg;
        cfg.extent = 16.0;
        cfg.count = 256;
        cfg.hbar = hb;
        cfg.dt = dt;
        cfg.t_final = T;
        cfg.potential = [](double x) { return 0.5 * x * x; };
        const GridAxis ax = split_step_axis(cfg.extent, cfg.count);
        const GridField1D psi0 = sample_on_grid(SqueezedState::coherent(z0, hb), ax);
        const SplitStepResult res = split_step(psi0, cfg);
        // harmonic closed form: rotation of the center, M fixed, phase -t/2
        const SqueezedState exact(PhasePoint(std::sin(T), std::cos(T)), SiegelMatrix::standard(1),
                                  hb, std::exp(cplx(0, -0.5 * T)));
        errs.push_back(l2_distance(res.psi_final, sample_on_grid(exact, ax)));
    }
    const double slope = std::log(errs[0] / errs[2]) / std::log(dts[0] / dts[2]);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("time reversal returns the initial state") {
    const double hb = 0.4;
    SplitStepConfig cfg;
    cfg.extent = 12.0;
    cfg.count = 512;
    cfg.hbar = hb;
    cfg.dt = 1e-3;
    cfg.t_final = 1.0;
    cfg.potential = [](double x) { return std::pow(x, 4) / 4.0; };
    const GridAxis ax = split_step_axis(cfg.extent, cfg.count);
    const GridField1D psi0 = sample_on_grid(SqueezedState::coherent(PhasePoint(0.7, 0.2), hb), ax);
    SplitStepResult fwd = split_step(psi0, cfg);
    // reverse by conjugation: evolve conj(psi) forward, conjugate again
    GridField1D rev(ax, fwd.psi_final.values().conjugate());
    SplitStepResult back = split_step(rev, cfg);
    const GridField1D round(ax, back.psi_final.values().conjugate());
    CHECK(l2_distance(round, psi0) <= 1e-9);
}

TEST_CASE("boundary contact aborts the run") {
    const double hb = 1.0;
    SplitStepConfig cfg;
    cfg.extent = 6.0;
    cfg.count = 512;
    cfg.hbar = hb;
    cfg.dt = 1e-3;
    cfg.t_final = 8.0;  // free wave packet spreads into the walls
    cfg.potential = [](double) { return 0.0; };
    const GridAxis ax = split_step_axis(cfg.extent, cfg.count);
    const GridField1D psi0 = sample_on_grid(SqueezedState::coherent(PhasePoint(0.0, 1.0), hb), ax);
    CHECK_THROWS_AS((void)split_step(psi0, cfg), BoundaryWrapError);
}

TEST_CASE("config validation") {
    SplitStepConfig cfg;
    cfg.count = 1000;  // not a power of two
    cfg.potential = [](double) { return 0.0; };
    const GridAxis ax = split_step_axis(10.0, 1024);
    const GridField1D psi0 = sample_on_grid(SqueezedState::coherent(PhasePoint(0.0, 0.0), 1.0), ax);
    CHECK_THROWS(split_step(psi0, cfg));

    SplitStepConfig cfg2;
    cfg2.extent = 10.0;
    cfg2.count = 1024;
    cfg2.dt = 10.0;  // kinetic phase out of range
    cfg2.t_final = 10.0;
    cfg2.potential = [](double) { return 0.0; };
    CHECK_THROWS(split_step(psi0, cfg2));
}
