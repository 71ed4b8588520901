#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>

#include "norbit/errors.hpp"

namespace norbit {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;

inline constexpr double kSymplTol = 1e-10;
inline constexpr double kDetTol = 1e-12;

/// Standard symplectic form matrix J = [[0, I], [-I, 0]] of size 2n x 2n.
Mat symplectic_j(int n);

/// Phase-space point z = (x, p).
struct PhasePoint {
    Vec x;
    Vec p;

    PhasePoint() = default;
    PhasePoint(Vec x_, Vec p_);
    PhasePoint(double x_, double p_);  // n = 1 convenience

    int dim() const { return static_cast<int>(x.size()); }
    Vec zvec() const;
    static PhasePoint from_zvec(const Vec& z);

    PhasePoint operator+(const PhasePoint& o) const;
    PhasePoint operator-(const PhasePoint& o) const;
    PhasePoint operator*(double s) const;
    double norm() const { return zvec().norm(); }
};

/// sigma(z, z') = p . x' - p' . x
double symplectic_form(const PhasePoint& z, const PhasePoint& zp);

bool is_symplectic(const Mat& s, double tol = kSymplTol);

/// Max-norm of S^T J S - J.
double symplectic_defect(const Mat& s);

/// Validated element of Sp(n), immutable after construction.
class SymplecticMatrix {
  public:
    explicit SymplecticMatrix(Mat s, double tol = kSymplTol);
    static SymplecticMatrix identity(int n);

    const Mat& mat() const { return s_; }
    int n() const { return n_; }

    Mat block_a() const { return s_.topLeftCorner(n_, n_); }
    Mat block_b() const { return s_.topRightCorner(n_, n_); }
    Mat block_c() const { return s_.bottomLeftCorner(n_, n_); }
    Mat block_d() const { return s_.bottomRightCorner(n_, n_); }

    PhasePoint apply(const PhasePoint& z) const;

  private:
    Mat s_;
    int n_;
};

struct BlockDecomposition {
    Mat a, b, c, d;
    bool is_free;
};

/// Splits S into the (A, B; C, D) blocks; is_free <=> |det B| above tolerance.
BlockDecomposition block_decompose(const SymplecticMatrix& s, double tol_det = kDetTol);

/// Quadratic form W(x, x') = 1/2 x.Px - x.Lx' + 1/2 x'.Qx' with det L != 0.
struct GeneratingFunction {
    Mat p;
    Mat l;
    Mat q;
    int m = 0;  // choice of arg det L, mod 4

    double eval(const Vec& x, const Vec& xp) const;
    Vec grad_x(const Vec& x, const Vec& xp) const;   // P x - L x'
    Vec grad_xp(const Vec& x, const Vec& xp) const;  // -L^T x + Q x'
};

/// Generating function of a free symplectic matrix: P = DB^-1, L = (B^-1)^T, Q = B^-1 A.
GeneratingFunction generating_function_of(const SymplecticMatrix& s, double tol_det = kDetTol);

/// Free symplectic matrix generated by W (p = grad_x W, p' = -grad_x' W).
SymplecticMatrix matrix_of_generating_function(const GeneratingFunction& w);

/// Symplectic Cayley transform M_S = 1/2 J (S + I)(S - I)^-1 (symmetric).
Mat cayley_transform(const SymplecticMatrix& s, double tol_det = kDetTol);

/// Nearest-symplectic correction S -> S (J^-1 S^T J S)^-1/2; defect drops to roundoff.
Mat symplectic_project(const Mat& s);

Mat random_symmetric(int dim, std::mt19937_64& rng, double scale = 1.0);

/// exp(J W) for random symmetric W: exact group membership up to the matrix exponential.
SymplecticMatrix random_symplectic(int n, std::mt19937_64& rng, double scale = 0.7);

}  // namespace norbit
