#pragma once

#include <functional>
#include <vector>

#include "norbit/grid.hpp"

namespace norbit {

/// Strang split-step Fourier configuration for i hbar d/dt psi = (-hbar^2/2m d_xx + V) psi.
struct SplitStepConfig {
    double extent = 10.0;  // half-width; grid covers [-extent, extent)
    int count = 1024;      // power of two
    double mass = 1.0;
    double hbar = 1.0;
    double dt = 1e-3;
    double t_final = 1.0;
    std::function<double(double)> potential;
    std::vector<double> snapshot_times;  // sorted, within [0, t_final]
    double tail_tol = 1e-12;             // boundary wrap-around monitor threshold
};

struct SplitStepResult {
    GridField1D psi_final;
    std::vector<double> snapshot_times;
    std::vector<GridField1D> snapshots;
    double norm_drift = 0.0;  // max |norm - initial norm| over the run
};

/// Position axis matching the solver's periodic grid ([-L, L), count points).
GridAxis split_step_axis(double extent, int count);

SplitStepResult split_step(const GridField1D& psi0, const SplitStepConfig& cfg);

}  // namespace norbit
