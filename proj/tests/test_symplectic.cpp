#include <doctest.h>

#include <random>

#include "norbit/symplectic.hpp"

using namespace norbit;

TEST_CASE("symplectic form: frozen examples and antisymmetry") {
    const PhasePoint z(1.0, 0.0), zp(0.0, 1.0);
    CHECK(symplectic_form(z, z) == 0.0);
    CHECK(symplectic_form(z, zp) == -1.0);

    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 50; ++trial) {
        const PhasePoint a(g(rng), g(rng)), b(g(rng), g(rng)), c(g(rng), g(rng));
        CHECK(symplectic_form(a, b) == doctest::Approx(-symplectic_form(b, a)).epsilon(1e-14));
        // bilinearity in the first slot
        const double lam = g(rng);
        const PhasePoint ab = a + b * lam;
        CHECK(symplectic_form(ab, c) ==
              doctest::Approx(symplectic_form(a, c) + lam * symplectic_form(b, c)).epsilon(1e-12));
    }
    // matrix oracle: sigma(z, z') = (z')^T J z
    const Mat j = symplectic_j(1);
    const Vec zz = z.zvec(), zzp = zp.zvec();
    CHECK(symplectic_form(z, zp) == doctest::Approx((zzp.transpose() * j * zz)(0)).epsilon(1e-15));
}

TEST_CASE("symplectic form: dimension mismatch rejected") {
    Vec two(2);
    two << 1, 2;
    const PhasePoint a(Vec::Ones(1), Vec::Ones(1));
    const PhasePoint b(two, two);
    CHECK_THROWS_AS((void)symplectic_form(a, b), DimensionMismatchError);
}

TEST_CASE("is_symplectic: identity, J, shear") {
    CHECK(is_symplectic(Mat::Identity(2, 2)));
    CHECK(is_symplectic(symplectic_j(1)));
    CHECK(is_symplectic(symplectic_j(3)));
    Mat shear(2, 2);
    shear << 1, 0, 3.7, 1;
    CHECK(is_symplectic(shear));
    Mat bad(2, 2);
    bad << 1, 0, 0, 2;
    CHECK_FALSE(is_symplectic(bad));
    CHECK_THROWS_AS((void)is_symplectic(Mat::Identity(3, 3)), DimensionMismatchError);
}

TEST_CASE("random symplectic matrices satisfy the group constraints") {
    std::mt19937_64 rng(202);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 2;
        const SymplecticMatrix s = random_symplectic(n, rng);
        CHECK(symplectic_defect(s.mat()) <= 1e-10);
        CHECK(std::abs(s.mat().determinant() - 1.0) <= 1e-8);
    }
}

TEST_CASE("block decomposition: J, identity, squeeze factor") {
    const SymplecticMatrix j(symplectic_j(1));
    const auto bj = block_decompose(j);
    CHECK(bj.a(0, 0) == 0.0);
    CHECK(bj.b(0, 0) == 1.0);
    CHECK(bj.c(0, 0) == -1.0);
    CHECK(bj.d(0, 0) == 0.0);
    CHECK(bj.is_free);

    const auto bi = block_decompose(SymplecticMatrix::identity(1));
    CHECK(bi.b(0, 0) == 0.0);
    CHECK_FALSE(bi.is_free);

    // lower-triangular factor with X = I, Y = 0 is the identity: not free
    Mat ess(2, 2);
    ess << 1, 0, 0, 1;
    CHECK_FALSE(block_decompose(SymplecticMatrix(ess)).is_free);

    // blocks reassemble to S
    std::mt19937_64 rng(7);
    const SymplecticMatrix s = random_symplectic(2, rng);
    const auto blk = block_decompose(s);
    Mat re(4, 4);
    re.topLeftCorner(2, 2) = blk.a;
    re.topRightCorner(2, 2) = blk.b;
    re.bottomLeftCorner(2, 2) = blk.c;
    re.bottomRightCorner(2, 2) = blk.d;
    CHECK((re - s.mat()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("generating function: J gives W = -x x'") {
    const GeneratingFunction w = generating_function_of(SymplecticMatrix(symplectic_j(1)));
    CHECK(w.p(0, 0) == 0.0);
    CHECK(w.q(0, 0) == 0.0);
    CHECK(w.l(0, 0) == 1.0);
    CHECK(w.eval(Vec::Constant(1, 2.0), Vec::Constant(1, 3.0)) == doctest::Approx(-6.0));
}

TEST_CASE("generating function gradients reproduce the linear map") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g;
    int tested = 0;
    while (tested < 25) {
        const int n = 1 + tested % 2;
        const SymplecticMatrix s = random_symplectic(n, rng);
        const auto blk = block_decompose(s);
        if (!blk.is_free || std::abs(blk.b.determinant()) < 1e-3) continue;
        ++tested;
        const GeneratingFunction w = generating_function_of(s);
        Vec xp(n), pp(n);
        for (int i = 0; i < n; ++i) {
            xp(i) = g(rng);
            pp(i) = g(rng);
        }
        // solve p' = L^T x - Q x' for x, then p = P x - L x'
        const Vec x = w.l.transpose().fullPivLu().solve(pp + w.q * xp);
        const Vec p = w.grad_x(x, xp);
        Vec zin(2 * n), zout(2 * n);
        zin << xp, pp;
        zout << x, p;
        CHECK((zout - s.mat() * zin).cwiseAbs().maxCoeff() <= 1e-8);
        // gradient relations: p = dW/dx, p' = -dW/dx' by finite differences
        const double h = 1e-6;
        for (int i = 0; i < n; ++i) {
            Vec e = Vec::Zero(n);
            e(i) = h;
            const double dwdx = (w.eval(x + e, xp) - w.eval(x - e, xp)) / (2 * h);
            const double dwdxp = (w.eval(x, xp + e) - w.eval(x, xp - e)) / (2 * h);
            CHECK(dwdx == doctest::Approx(p(i)).epsilon(1e-6));
            CHECK(-dwdxp == doctest::Approx(pp(i)).epsilon(1e-6));
        }
        // round trip through the generated matrix
        const SymplecticMatrix s2 = matrix_of_generating_function(w);
        CHECK((s2.mat() - s.mat()).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("generating function: diagonal squeeze is not free") {
    Mat d(2, 2);
    d << 2.0, 0, 0, 0.5;
    CHECK_THROWS_AS((void)generating_function_of(SymplecticMatrix(d)), NotFreeError);
}

TEST_CASE("cayley transform: frozen examples") {
    const Mat m_minus = cayley_transform(SymplecticMatrix(-Mat::Identity(2, 2)));
    CHECK(m_minus.cwiseAbs().maxCoeff() == 0.0);

    const Mat mj = cayley_transform(SymplecticMatrix(symplectic_j(1)));
    CHECK((mj - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-15);

    CHECK_THROWS_AS((void)cayley_transform(SymplecticMatrix::identity(1)), SingularSMinusIError);
}

TEST_CASE("cayley transform: symmetry over random admissible matrices") {
    std::mt19937_64 rng(404);
    int done = 0;
    while (done < 100) {
        const SymplecticMatrix s = random_symplectic(1 + done % 2, rng);
        const Mat smi = s.mat() - Mat::Identity(s.mat().rows(), s.mat().cols());
        if (std::abs(smi.determinant()) < 1e-6) continue;
        ++done;
        const Mat m = cayley_transform(s);
        CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("symplectic projection pulls a perturbed matrix back onto the group") {
    std::mt19937_64 rng(55);
    const SymplecticMatrix s = random_symplectic(1, rng);
    Mat noisy = s.mat();
    noisy(0, 1) += 3e-7;
    const double before = symplectic_defect(noisy);
    CHECK(before > 1e-8);
    const Mat fixed = symplectic_project(noisy);
    CHECK(symplectic_defect(fixed) <= 1e-12);
    CHECK((fixed - noisy).cwiseAbs().maxCoeff() <= 10 * before);
}
