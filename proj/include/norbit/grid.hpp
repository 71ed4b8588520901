#pragma once

#include <string>
#include <vector>

#include "norbit/symplectic.hpp"

namespace norbit {

/// Uniform sampling axis. `role` is "x" or "p".
struct GridAxis {
    double origin = 0.0;
    double spacing = 0.0;
    int count = 0;
    std::string role = "x";

    double coord(int i) const { return origin + spacing * i; }
    double upper() const { return coord(count - 1); }
    bool valid() const { return spacing > 0.0 && count > 0; }
    /// Symmetric axis of `count` points covering [-half, half].
    static GridAxis symmetric(double half, int count, std::string role = "x");
};

class GridField1D {
  public:
    GridField1D() = default;
    GridField1D(GridAxis axis, CVec values);
    explicit GridField1D(GridAxis axis);

    const GridAxis& axis() const { return axis_; }
    const CVec& values() const { return values_; }
    CVec& values() { return values_; }
    int size() const { return axis_.count; }

    double l2_norm() const;
    GridField1D& normalize();
    /// Relative magnitude of the largest tail sample (boundary monitor).
    double boundary_fraction() const;

    void save(const std::string& path) const;
    static GridField1D load(const std::string& path);

  private:
    GridAxis axis_;
    CVec values_;
};

/// (f, g) = Riemann sum of f conj(g); linear in the first argument.
cplx inner_product(const GridField1D& f, const GridField1D& g);
double l2_distance(const GridField1D& f, const GridField1D& g);

/// Column-major over p: values(ix, ip).
class GridField2D {
  public:
    GridField2D() = default;
    GridField2D(GridAxis ax, GridAxis ap, CMat values);
    GridField2D(GridAxis ax, GridAxis ap);

    const GridAxis& axis_x() const { return ax_; }
    const GridAxis& axis_p() const { return ap_; }
    const CMat& values() const { return values_; }
    CMat& values() { return values_; }

    double cell_area() const { return ax_.spacing * ap_.spacing; }
    double l2_norm() const;
    GridField2D& normalize();
    double boundary_fraction() const;

    void save(const std::string& path) const;
    static GridField2D load(const std::string& path);

  private:
    GridAxis ax_, ap_;
    CMat values_;
};

cplx inner_product(const GridField2D& f, const GridField2D& g);
double l2_distance(const GridField2D& f, const GridField2D& g);

/// Relative L2 distance after optimal phase alignment of f against g.
double phase_aligned_distance(const GridField1D& f, const GridField1D& g);
double phase_aligned_distance(const GridField2D& f, const GridField2D& g);

}  // namespace norbit
