#include "norbit/symplectic.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace norbit {

Mat symplectic_j(int n) {
    Mat j = Mat::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = Mat::Identity(n, n);
    j.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    return j;
}

PhasePoint::PhasePoint(Vec x_, Vec p_) : x(std::move(x_)), p(std::move(p_)) {
    if (x.size() != p.size() || x.size() < 1)
        throw DimensionMismatchError("PhasePoint: x and p must have equal size >= 1");
    if (!x.allFinite() || !p.allFinite())
        throw std::invalid_argument("PhasePoint: entries must be finite");
}

PhasePoint::PhasePoint(double x_, double p_) {
    x = Vec::Constant(1, x_);
    p = Vec::Constant(1, p_);
}

Vec PhasePoint::zvec() const {
    Vec z(2 * dim());
    z << x, p;
    return z;
}

PhasePoint PhasePoint::from_zvec(const Vec& z) {
    if (z.size() % 2 != 0 || z.size() < 2)
        throw DimensionMismatchError("from_zvec: size must be even and >= 2");
    const int n = static_cast<int>(z.size()) / 2;
    return PhasePoint(z.head(n), z.tail(n));
}

PhasePoint PhasePoint::operator+(const PhasePoint& o) const { return PhasePoint(x + o.x, p + o.p); }
PhasePoint PhasePoint::operator-(const PhasePoint& o) const { return PhasePoint(x - o.x, p - o.p); }
PhasePoint PhasePoint::operator*(double s) const { return PhasePoint(x * s, p * s); }

double symplectic_form(const PhasePoint& z, const PhasePoint& zp) {
    if (z.dim() != zp.dim()) throw DimensionMismatchError("symplectic_form: dimension mismatch");
    return z.p.dot(zp.x) - zp.p.dot(z.x);
}

double symplectic_defect(const Mat& s) {
    const int n = static_cast<int>(s.rows()) / 2;
    const Mat j = symplectic_j(n);
    return (s.transpose() * j * s - j).cwiseAbs().maxCoeff();
}

bool is_symplectic(const Mat& s, double tol) {
    if (s.rows() != s.cols() || s.rows() % 2 != 0)
        throw DimensionMismatchError("is_symplectic: matrix must be square of even dimension");
    return symplectic_defect(s) <= tol;
}

SymplecticMatrix::SymplecticMatrix(Mat s, double tol) : s_(std::move(s)) {
    if (s_.rows() != s_.cols() || s_.rows() % 2 != 0 || s_.rows() < 2)
        throw DimensionMismatchError("SymplecticMatrix: must be square of even dimension");
    n_ = static_cast<int>(s_.rows()) / 2;
    const double defect = symplectic_defect(s_);
    if (defect > tol)
        throw std::invalid_argument("SymplecticMatrix: S^T J S - J defect " +
                                    std::to_string(defect) + " exceeds tolerance");
}

SymplecticMatrix SymplecticMatrix::identity(int n) {
    return SymplecticMatrix(Mat::Identity(2 * n, 2 * n));
}

PhasePoint SymplecticMatrix::apply(const PhasePoint& z) const {
    if (z.dim() != n_) throw DimensionMismatchError("SymplecticMatrix::apply: dimension mismatch");
    return PhasePoint::from_zvec(s_ * z.zvec());
}

BlockDecomposition block_decompose(const SymplecticMatrix& s, double tol_det) {
    BlockDecomposition out{s.block_a(), s.block_b(), s.block_c(), s.block_d(), false};
    const double scale = std::max(1.0, out.b.cwiseAbs().maxCoeff());
    out.is_free = std::abs(out.b.determinant()) > tol_det * std::pow(scale, s.n());
    return out;
}

double GeneratingFunction::eval(const Vec& x, const Vec& xp) const {
    return 0.5 * x.dot(p * x) - x.dot(l * xp) + 0.5 * xp.dot(q * xp);
}

Vec GeneratingFunction::grad_x(const Vec& x, const Vec& xp) const { return p * x - l * xp; }

Vec GeneratingFunction::grad_xp(const Vec& x, const Vec& xp) const {
    return -l.transpose() * x + q * xp;
}

GeneratingFunction generating_function_of(const SymplecticMatrix& s, double tol_det) {
    const auto blk = block_decompose(s, tol_det);
    if (!blk.is_free) throw NotFreeError("generating_function_of: det B below tolerance");
    const Mat binv = blk.b.inverse();
    GeneratingFunction w;
    w.p = blk.d * binv;
    w.l = binv.transpose();
    w.q = binv * blk.a;
    // symmetrize away roundoff; both are symmetric for symplectic S
    w.p = 0.5 * (w.p + w.p.transpose());
    w.q = 0.5 * (w.q + w.q.transpose());
    return w;
}

SymplecticMatrix matrix_of_generating_function(const GeneratingFunction& w) {
    // x = L^-T (p' + Q x'), p = P x - L x'
    const int n = static_cast<int>(w.l.rows());
    const Mat linvt = w.l.transpose().inverse();
    Mat s(2 * n, 2 * n);
    s.topLeftCorner(n, n) = linvt * w.q;
    s.topRightCorner(n, n) = linvt;
    s.bottomLeftCorner(n, n) = w.p * linvt * w.q - w.l;
    s.bottomRightCorner(n, n) = w.p * linvt;
    return SymplecticMatrix(s, 1e-8);
}

Mat cayley_transform(const SymplecticMatrix& s, double tol_det) {
    const Mat smi = s.mat() - Mat::Identity(s.mat().rows(), s.mat().cols());
    const double scale = std::max(1.0, smi.cwiseAbs().maxCoeff());
    if (std::abs(smi.determinant()) <= tol_det * std::pow(scale, smi.rows()))
        throw SingularSMinusIError("cayley_transform: det(S - I) below tolerance");
    const Mat spi = s.mat() + Mat::Identity(s.mat().rows(), s.mat().cols());
    Mat m = 0.5 * symplectic_j(s.n()) * spi * smi.inverse();
    return 0.5 * (m + m.transpose());
}

Mat symplectic_project(const Mat& s) {
    const int n = static_cast<int>(s.rows()) / 2;
    const Mat j = symplectic_j(n);
    const Mat v = -j * (s.transpose() * j * s);  // J^-1 (S^T J S), J-self-adjoint, near I
    const Mat k = v.sqrt().inverse();
    return s * k;
}

Mat random_symmetric(int dim, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat w(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int k = 0; k < dim; ++k) w(i, k) = g(rng);
    return scale * 0.5 * (w + w.transpose());
}

SymplecticMatrix random_symplectic(int n, std::mt19937_64& rng, double scale) {
    const Mat w = random_symmetric(2 * n, rng, scale);
    const Mat s = (symplectic_j(n) * w).exp();
    return SymplecticMatrix(symplectic_project(s), 1e-9);
}

}  // namespace norbit
