#pragma once

#include "norbit/flows.hpp"
#include "norbit/metaplectic.hpp"
#include "norbit/splitstep.hpp"

namespace norbit {

struct PropagatorResult {
    SqueezedState state_out;
    double t = 0.0;  // the lattice time the state belongs to
    double gamma = 0.0;
    PhasePoint center;
    Mat monodromy;
    struct Diagnostics {
        int steps = 0;
        double max_sympl_defect = 0.0;
        int reprojections = 0;
    } diag;
};

/// Transport of a squeezed state along the classical orbit through its own
/// center: center -> f_T(z0), Siegel matrix -> alpha(S_T) M, phase ->
/// exp(i gamma / hbar) times the branch-tracked metaplectic unit phase.
/// The state's center must equal the expansion point; expanding around a
/// different point is the explicit opt-in overload.
PropagatorResult propagate_coherent(const HamiltonianModel& h, const SqueezedState& state,
                                    double t_final, double dt);

/// Same pipeline expanded around `expansion_point` (approximation degrades as
/// the state moves away from it; callers opt in deliberately).
PropagatorResult propagate_coherent(const HamiltonianModel& h, const SqueezedState& state,
                                    double t_final, double dt, const PhasePoint& expansion_point);

/// One classical solve, states sampled at several times (branch phase tracked
/// cumulatively along the single path).
std::vector<PropagatorResult> propagate_coherent_sampled(const HamiltonianModel& h,
                                                         const SqueezedState& state,
                                                         double t_final, double dt,
                                                         const std::vector<double>& sample_times);

/// Rectangular coherent-state lattice for the resolution of the identity.
struct PhaseSpaceLattice {
    double x_center = 0.0, p_center = 0.0;
    double x_half = 0.0, p_half = 0.0;
    int nx = 0, np = 0;

    double dx() const { return 2.0 * x_half / (nx - 1); }
    double dp() const { return 2.0 * p_half / (np - 1); }
    /// Spacing sqrt(2 pi hbar / oversample) per axis, box from the field's
    /// phase-space moments plus Gaussian margins.
    static PhaseSpaceLattice automatic(const GridField1D& psi0, double hbar,
                                       double oversample = 6.0);
};

struct GeneralPropagation {
    GridField1D psi;
    int kept_coefficients = 0;
    int total_coefficients = 0;
    bool boundary_warning = false;  // lattice boundary coefficient above 1e-6 of max
};

/// Coherent-resolution propagation of an arbitrary 1D state:
/// (2 pi hbar)^-n sum over the lattice of (psi0, phi_z0) U(t, z0) phi_z0.
/// Coefficients below 1e-8 of the peak are skipped.
GeneralPropagation propagate_general(const HamiltonianModel& h, const GridField1D& psi0,
                                     double t_final, double dt, double hbar,
                                     const PhaseSpaceLattice& lattice);

struct HbarSweepRow {
    double hbar;
    double sup_error;    // sup over the sampled times
    double final_error;  // error at t_final
};

struct HbarSweepResult {
    std::vector<HbarSweepRow> rows;
    double slope = 0.0;  // log-log fit of sup_error against hbar
    bool monotone_within_10pct = true;
};

/// Propagates phi_{z0,M} with both the nearby-orbit route and the split-step
/// reference from identical initial data, per hbar, and fits the error law.
HbarSweepResult error_vs_reference(const HamiltonianModel& h, const PhasePoint& z0,
                                   const SiegelMatrix& m, const std::vector<double>& hbars,
                                   double t_final, double dt, int n_samples = 8);

/// Reference grid sized from the classical orbit and the wavepacket width;
/// the solver step divides the nearby-orbit step exactly.
SplitStepConfig auto_reference_config(const HamiltonianModel& h, const PhasePoint& z0,
                                      double hbar, double t_final, double dt);

/// Sample times snapped onto the integrator lattice shared by both solvers.
std::vector<double> snap_sample_times(double t_final, double dt, int n_samples);

}  // namespace norbit
