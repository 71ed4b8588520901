#include "norbit/splitstep.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "norbit/errors.hpp"

namespace norbit {

namespace {
constexpr double kPi = std::numbers::pi;

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

struct FftwPlan1D {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    fftw_complex* buf = nullptr;
    int n = 0;

    explicit FftwPlan1D(int count) : n(count) {
        buf = fftw_alloc_complex(n);
        fwd = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftwPlan1D() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(buf);
    }
    FftwPlan1D(const FftwPlan1D&) = delete;
    FftwPlan1D& operator=(const FftwPlan1D&) = delete;
};
}  // namespace

GridAxis split_step_axis(double extent, int count) {
    GridAxis ax;
    ax.count = count;
    ax.spacing = 2.0 * extent / count;  // periodic: right endpoint excluded
    ax.origin = -extent;
    ax.role = "x";
    return ax;
}

SplitStepResult split_step(const GridField1D& psi0, const SplitStepConfig& cfg) {
    if (!is_pow2(cfg.count)) throw std::invalid_argument("split_step: count must be a power of two");
    if (!cfg.potential) throw std::invalid_argument("split_step: potential not set");
    if (cfg.dt <= 0 || cfg.hbar <= 0 || cfg.mass <= 0)
        throw std::invalid_argument("split_step: dt, hbar, mass must be positive");
    const GridAxis ax = split_step_axis(cfg.extent, cfg.count);
    if (psi0.size() != cfg.count || std::abs(psi0.axis().spacing - ax.spacing) > 1e-12)
        throw std::invalid_argument("split_step: psi0 grid does not match config");
    if (psi0.boundary_fraction() > cfg.tail_tol)
        throw BoundaryWrapError("split_step: initial state touches the boundary");

    const int n = cfg.count;
    const double dx = ax.spacing;

    // kinetic phases on FFT frequencies; dt * max kinetic phase must stay below pi
    std::vector<cplx> kin(n), pot_half(n);
    double max_kin_phase = 0.0;
    for (int i = 0; i < n; ++i) {
        const double k = 2.0 * kPi * ((i <= n / 2) ? i : i - n) / (n * dx);
        const double phase = cfg.hbar * k * k * cfg.dt / (2.0 * cfg.mass);
        max_kin_phase = std::max(max_kin_phase, phase);
        kin[i] = std::polar(1.0, -phase);
        pot_half[i] = std::polar(1.0, -cfg.potential(ax.coord(i)) * cfg.dt / (2.0 * cfg.hbar));
    }
    if (max_kin_phase >= kPi)
        throw std::invalid_argument("split_step: dt too large for the grid (kinetic phase >= pi)");

    const int steps = static_cast<int>(std::round(cfg.t_final / cfg.dt));
    std::vector<int> snap_steps;
    for (double ts : cfg.snapshot_times)
        snap_steps.push_back(static_cast<int>(std::round(ts / cfg.dt)));

    FftwPlan1D plan(n);
    CVec psi = psi0.values();
    const double norm0 = psi0.l2_norm();

    SplitStepResult result;
    auto take_snapshot = [&](int step) {
        auto it = std::find(snap_steps.begin(), snap_steps.end(), step);
        if (it == snap_steps.end()) return;
        result.snapshot_times.push_back(step * cfg.dt);
        result.snapshots.emplace_back(ax, psi);
    };
    take_snapshot(0);

    const double inv_n = 1.0 / n;
    for (int step = 0; step < steps; ++step) {
        for (int i = 0; i < n; ++i) {
            const cplx v = pot_half[i] * psi(i);
            plan.buf[i][0] = v.real();
            plan.buf[i][1] = v.imag();
        }
        fftw_execute(plan.fwd);
        for (int i = 0; i < n; ++i) {
            const cplx v = kin[i] * cplx(plan.buf[i][0], plan.buf[i][1]);
            plan.buf[i][0] = v.real();
            plan.buf[i][1] = v.imag();
        }
        fftw_execute(plan.bwd);
        for (int i = 0; i < n; ++i)
            psi(i) = pot_half[i] * cplx(plan.buf[i][0], plan.buf[i][1]) * inv_n;

        if ((step & 63) == 63 || step + 1 == steps) {
            const double tail = std::max(std::abs(psi(0)), std::abs(psi(n - 1)));
            const double peak = psi.cwiseAbs().maxCoeff();
            if (peak > 0 && tail / peak > 1e-6)
                throw BoundaryWrapError("split_step: wavefunction reached the grid boundary");
            const double nn = std::sqrt(psi.squaredNorm() * dx);
            result.norm_drift = std::max(result.norm_drift, std::abs(nn - norm0));
        }
        take_snapshot(step + 1);
    }
    result.psi_final = GridField1D(ax, psi);
    return result;
}

}  // namespace norbit
