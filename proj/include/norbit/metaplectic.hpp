#pragma once

#include <functional>
#include <vector>

#include "norbit/gaussian.hpp"

namespace norbit {

/// Mobius-type action alpha(S)M = (C + DM)(A + BM)^-1 on the Siegel half-space.
SiegelMatrix alpha(const SymplecticMatrix& s, const SiegelMatrix& m);

/// Continuity record of sqrt(det(A_t + i B_t)) along a path from the identity.
struct BranchState {
    cplx sqrt_det_aib = 1.0;  // tracked root at the path end
    double total_arg = 0.0;   // continuous argument of det(A_t + i B_t)
    int steps = 0;
    int winding = 0;          // floor(total_arg / 2 pi)
};

/// One of the two unitary lifts of a symplectic matrix, identified by a
/// recorded path from the identity. The path is what makes the metaplectic
/// phase well defined: the same endpoint reached through an extra full turn
/// flips the sign of the lift.
class MetaplecticElement {
  public:
    /// Lift along the symplectic polar interpolation S(t) = P^t O^t.
    static MetaplecticElement from_matrix(const SymplecticMatrix& s);

    /// Lift along explicit path samples (first sample must be the identity).
    /// Consecutive samples must keep det(A + iB) argument steps below pi/2.
    static MetaplecticElement from_path(std::vector<Mat> samples);

    const SymplecticMatrix& s() const { return s_; }
    const BranchState& branch() const { return branch_; }

    /// Continuous argument of det(A_t + B_t M) accumulated along the path.
    double tracked_det_arg(const CMat& m) const;

    /// Unit phase exp(-i arg/2) of the branch-tracked det(A + BM)^-1/2.
    cplx unit_phase_for(const SiegelMatrix& m) const;

  private:
    MetaplecticElement(SymplecticMatrix s, std::vector<Mat> samples,
                       std::function<Mat(double)> generator);

    SymplecticMatrix s_;
    std::vector<Mat> samples_;                 // includes both endpoints
    std::function<Mat(double)> generator_;     // analytic path, when available
    BranchState branch_;
};

/// S phi_{z0,M} = c . phi_{S z0, alpha(S) M}; the output stays normalized and
/// the unit phase c is fixed by continuity along the element's path.
SqueezedState apply_to_gaussian(const MetaplecticElement& elem, const SqueezedState& state);

/// Prefix values of the continuous argument of det(A_k + B_k M) along
/// discrete path samples (linear refinement between samples when needed).
std::vector<double> tracked_det_arg_path(const std::vector<Mat>& samples, const CMat& m);

/// Maslov index composition m + m' - Inert(P' + Q) mod 4.
int maslov_compose(const GeneratingFunction& w, const GeneratingFunction& wp,
                   double degenerate_tol = 1e-10);

struct WeylQuadSpec {
    double p0_half = 0.0;     // momentum half-extent of the z0 quadrature box
    int np0 = 0;              // points along p0
    int output_stride = 1;    // output sampled on every k-th grid point
    long max_points = 6000000;
    bool auto_sized = true;
};

struct WeylApplyResult {
    GridField1D field;       // quadrature of the Weyl integral, no i^nu factor
    cplx inferred_phase;     // multiply `field` by this to match the tracked lift
    int power_of_i = 0;
    double phase_defect = 0.0;   // |inferred_phase - i^k|
    double probe_mismatch = 0.0; // relative L2 mismatch of the probe after alignment
    bool under_resolved = false;
    double p0_half = 0.0;
    int np0 = 0;
};

/// Weyl-integral realization of the metaplectic operator on a 1D grid:
/// (2 pi hbar)^-n |det(S-I)|^-1/2 int exp(i M_S z0^2 / 2 hbar) T(z0) psi d z0,
/// evaluated by direct quadrature. The i^nu unit is inferred from a standard
/// coherent probe against the branch-tracked Gaussian route and must be an
/// integer power of i.
WeylApplyResult weyl_apply(const SymplecticMatrix& s, const GridField1D& psi, double hbar,
                           WeylQuadSpec spec = {});

}  // namespace norbit
