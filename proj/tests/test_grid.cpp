#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "norbit/grid.hpp"

using namespace norbit;

namespace {
std::string temp_path(const std::string& stem) {
    return std::string("/tmp/norbit_gridtest_") + stem;
}
}  // namespace

TEST_CASE("1d round trip preserves axis metadata and samples exactly") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    GridAxis ax{-3.25, 0.0625, 97, "x"};
    GridField1D f(ax);
    for (int i = 0; i < ax.count; ++i) f.values()(i) = cplx(g(rng), g(rng));
    const std::string path = temp_path("f1.grid");
    f.save(path);
    const GridField1D back = GridField1D::load(path);
    CHECK(back.axis().origin == ax.origin);
    CHECK(back.axis().spacing == ax.spacing);
    CHECK(back.axis().count == ax.count);
    CHECK(back.axis().role == "x");
    CHECK((back.values() - f.values()).cwiseAbs().maxCoeff() == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("2d round trip and header format") {
    GridAxis ax{-2.0, 0.5, 5, "x"};
    GridAxis ap{-1.0, 0.25, 9, "p"};
    GridField2D f(ax, ap);
    f.values()(3, 7) = cplx(1.25, -2.5);
    const std::string path = temp_path("f2.grid");
    f.save(path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "# axis=x,p origin=-2,-1 spacing=0.5,0.25 count=5,9");
    const GridField2D back = GridField2D::load(path);
    CHECK(back.values()(3, 7) == cplx(1.25, -2.5));
    CHECK(back.axis_p().spacing == 0.25);
    std::remove(path.c_str());
}

TEST_CASE("inner products and norms") {
    GridAxis ax{0.0, 0.1, 4, "x"};
    GridField1D f(ax), g(ax);
    f.values() << cplx(1, 0), cplx(0, 1), cplx(2, 0), cplx(0, 0);
    g.values() << cplx(1, 0), cplx(0, 1), cplx(0, 0), cplx(3, 0);
    // (f, g) = sum f conj(g) dx
    CHECK(inner_product(f, g) == cplx(0.2, 0.0));
    CHECK(f.l2_norm() == doctest::Approx(std::sqrt(0.6)));
    CHECK(l2_distance(f, g) == doctest::Approx(std::sqrt((4.0 + 9.0) * 0.1)));
}

TEST_CASE("phase aligned distance removes a global phase") {
    GridAxis ax{-1.0, 0.05, 41, "x"};
    GridField1D f(ax);
    for (int i = 0; i < ax.count; ++i) f.values()(i) = std::exp(-ax.coord(i) * ax.coord(i));
    GridField1D g = f;
    g.values() *= std::polar(1.0, 1.234);
    CHECK(phase_aligned_distance(g, f) <= 1e-14);
}

TEST_CASE("boundary fraction flags edge support") {
    GridAxis ax{-1.0, 0.1, 21, "x"};
    GridField1D f(ax);
    f.values()(10) = 1.0;
    CHECK(f.boundary_fraction() == 0.0);
    f.values()(0) = 0.25;
    CHECK(f.boundary_fraction() == doctest::Approx(0.25));
}
