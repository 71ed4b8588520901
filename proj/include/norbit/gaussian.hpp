#pragma once

#include "norbit/grid.hpp"
#include "norbit/symplectic.hpp"

namespace norbit {

/// Complex symmetric matrix with positive-definite imaginary part.
/// Parametrizes centered Gaussians through M = i(X + iY), X = Im M, Y = -Re M.
class SiegelMatrix {
  public:
    explicit SiegelMatrix(CMat m, double sym_tol = 1e-10);
    static SiegelMatrix from_xy(const Mat& x, const Mat& y);
    static SiegelMatrix standard(int n);  // M = iI

    const CMat& mat() const { return m_; }
    int n() const { return static_cast<int>(m_.rows()); }
    Mat x() const { return m_.imag(); }
    Mat y() const { return -m_.real(); }
    double min_im_eigenvalue() const;

  private:
    CMat m_;
};

/// c . T(z0) phi_M with |c| = 1 for normalized states.
struct SqueezedState {
    PhasePoint center;
    SiegelMatrix m;
    cplx phase = 1.0;
    double hbar = 1.0;

    SqueezedState(PhasePoint z0, SiegelMatrix m_, double hbar_, cplx c = 1.0);
    /// Standard coherent state at z0.
    static SqueezedState coherent(const PhasePoint& z0, double hbar);
    int dim() const { return center.dim(); }
};

cplx evaluate(const SqueezedState& s, const Vec& x);
cplx evaluate(const SqueezedState& s, double x);  // n = 1

GridField1D sample_on_grid(const SqueezedState& s, const GridAxis& axis);

/// Gaussian Wigner covariance matrix G = [[X + Y X^-1 Y, Y X^-1], [X^-1 Y, X^-1]].
Mat g_matrix(const Mat& x, const Mat& y);

/// Cholesky-style symplectic factor with G = S^T S: S = [[X^1/2, 0], [X^-1/2 Y, X^-1/2]].
SymplecticMatrix g_factor(const Mat& x, const Mat& y);

/// Wigner function of a squeezed state, (pi hbar)^-n |c|^2 exp(-G (z - z0)^2 / hbar).
double wigner(const SqueezedState& s, const PhasePoint& z);

/// det(K)^-1/2 as the product over eigenvalues of the root of lambda^-1 with
/// positive real part. Requires Im K positive definite.
cplx fresnel_sqrt(const CMat& k);

/// Same branch rule without the Im K > 0 domain restriction; valid whenever no
/// eigenvalue lies on the closed negative real axis (e.g. Re K > 0).
cplx det_inv_sqrt_positive_real(const CMat& k);

enum class FmForm {
    AsPrinted,       // top-left 2i conj(M') (M - conj(M'))^-1 M
    SumInverse,      // top-left 2i conj(M') (M + conj(M'))^-1 M
};

/// Quadratic form matrix of the cross-Wigner Gaussian for centered states.
CMat cross_f_matrix(const SiegelMatrix& m, const SiegelMatrix& mp, FmForm form);

struct FmAudit {
    FmForm chosen;
    double residual_chosen;
    double residual_rejected;
    bool conclusive;  // residual separation of at least one decade
};

/// One-time oracle arbitration of the cross-Wigner form against direct
/// quadrature of the Wigner-Moyal integral; cached for the process lifetime.
const FmAudit& fm_audit();

/// Wigner-Moyal transform W(s1, s2)(z) in closed form (audited F-form).
cplx wigner_moyal_cross(const SqueezedState& s1, const SqueezedState& s2, const PhasePoint& z);

/// Direct midpoint quadrature of the Wigner-Moyal integral (test oracle path).
cplx wigner_moyal_quadrature(const SqueezedState& s1, const SqueezedState& s2,
                             const PhasePoint& z, double y_half = -1.0, int n_pts = 20001);

/// L2 overlap (s1, s2) of two squeezed states, closed form.
cplx state_overlap(const SqueezedState& s1, const SqueezedState& s2);

/// (psi, phi_z0) against the standard coherent state at z0.
cplx coherent_overlap(const SqueezedState& psi, const PhasePoint& z0, double hbar);
cplx coherent_overlap(const GridField1D& psi, const PhasePoint& z0, double hbar,
                      bool* warned_coarse = nullptr);

/// Heisenberg-Weyl translation T(z0) acting on a squeezed state; composition
/// phases exp(i sigma(z0, z1) / 2 hbar) are carried into the scalar factor.
SqueezedState translate(const SqueezedState& s, const PhasePoint& z0);

/// Precomputed n = 1 cross-transform evaluator for hot loops; agrees with
/// wigner_moyal_cross pointwise.
class CrossWigner1D {
  public:
    CrossWigner1D(const SqueezedState& s1, const SqueezedState& s2);
    cplx operator()(double zx, double zp) const;

  private:
    cplx f11_, f12_, f22_, pref_;
    double midx_, midp_, dpx_, dxx_, theta0_, hbar_;
};

}  // namespace norbit
