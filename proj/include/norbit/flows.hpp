#pragma once

#include <functional>
#include <string>
#include <vector>

#include "norbit/symplectic.hpp"

namespace norbit {

/// Hamiltonian with value, gradient and (optional) Hessian callbacks.
/// Missing Hessians fall back to central finite differences of the gradient.
struct HamiltonianModel {
    std::function<double(const PhasePoint&, double)> value;
    std::function<Vec(const PhasePoint&, double)> gradient;
    std::function<Mat(const PhasePoint&, double)> hessian;  // may be null
    std::string name;
    int n = 1;
    bool time_dependent = false;

    Vec grad(const PhasePoint& z, double t) const { return gradient(z, t); }
    Mat hess(const PhasePoint& z, double t) const;

    /// Checks the gradient against finite differences of the value on random
    /// probes (1e-5 relative) and the Hessian for symmetry.
    void validate(std::mt19937_64& rng, int probes = 5) const;
};

HamiltonianModel harmonic_oscillator(double omega = 1.0);
HamiltonianModel free_particle();
HamiltonianModel linear_potential();       // p^2/2 + x
HamiltonianModel quartic_oscillator();     // p^2/2 + x^4/4
HamiltonianModel pendulum();               // p^2/2 - cos x

/// Built-in registry for config-driven runs; throws on unknown names.
HamiltonianModel builtin_hamiltonian(const std::string& name, double param = 1.0);

struct Trajectory {
    std::vector<double> times;
    std::vector<PhasePoint> points;
    std::vector<Mat> monodromy;  // empty unless variational flow was requested
    std::vector<double> gamma;   // empty until action_phase fills it
    PhasePoint z0;

    struct Diagnostics {
        double max_sympl_defect = 0.0;
        int reprojections = 0;
    } diag;

    const PhasePoint& final_point() const { return points.back(); }
    double final_time() const { return times.back(); }
};

/// Fixed-step RK4 for dz/dt = J grad H. Negative T integrates backward.
Trajectory flow(const HamiltonianModel& h, const PhasePoint& z0, double t_final, double dt);

/// Joint RK4 for the trajectory and the tangent flow dS/dt = J H''(f_t) S.
/// The symplectic defect of S is monitored; the matrix is re-projected onto
/// Sp(n) whenever the defect exceeds 1e-8.
Trajectory variational_flow(const HamiltonianModel& h, const PhasePoint& z0, double t_final,
                            double dt);

/// Cumulative action integral of 1/2 sigma(z, zdot) - H along the samples
/// (composite Simpson; 3-point end rules on odd segments). Fills traj.gamma.
std::vector<double> action_phase(Trajectory& traj, const HamiltonianModel& h);

/// Second-order Taylor model of H around f_t(z0); the returned callable and
/// the frozen expansion data evaluate H(f_t) + H'(f_t).(z-f_t) + 1/2 (z-f_t).H''(f_t)(z-f_t).
std::function<double(const PhasePoint&)> truncated_hamiltonian(const HamiltonianModel& h,
                                                               const PhasePoint& z0, double t,
                                                               double dt = 1e-3);

/// CSV export, columns: t, x..., p..., S_00..S_{2n-1,2n-1}, gamma
void export_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace norbit
