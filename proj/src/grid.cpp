#include "norbit/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace norbit {

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// header form: # axis=x origin=<..> spacing=<..> count=<..>  (comma-joined per axis)
std::string header_line(const std::vector<GridAxis>& axes) {
    std::string roles, origins, spacings, counts;
    for (size_t i = 0; i < axes.size(); ++i) {
        const std::string sep = i ? "," : "";
        roles += sep + axes[i].role;
        origins += sep + fmt_g(axes[i].origin);
        spacings += sep + fmt_g(axes[i].spacing);
        counts += sep + std::to_string(axes[i].count);
    }
    return "# axis=" + roles + " origin=" + origins + " spacing=" + spacings +
           " count=" + counts;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
}

std::vector<GridAxis> parse_header(const std::string& line) {
    auto field = [&line](const std::string& key) {
        const auto pos = line.find(key + "=");
        if (pos == std::string::npos) throw std::runtime_error("GridField header: missing " + key);
        const auto start = pos + key.size() + 1;
        const auto end = line.find(' ', start);
        return line.substr(start, end == std::string::npos ? end : end - start);
    };
    const auto roles = split_csv(field("axis"));
    const auto origins = split_csv(field("origin"));
    const auto spacings = split_csv(field("spacing"));
    const auto counts = split_csv(field("count"));
    if (roles.size() != origins.size() || roles.size() != spacings.size() ||
        roles.size() != counts.size())
        throw std::runtime_error("GridField header: inconsistent axis fields");
    std::vector<GridAxis> axes;
    for (size_t i = 0; i < roles.size(); ++i)
        axes.push_back({std::stod(origins[i]), std::stod(spacings[i]), std::stoi(counts[i]),
                        roles[i]});
    return axes;
}

}  // namespace

GridAxis GridAxis::symmetric(double half, int count, std::string role) {
    GridAxis ax;
    ax.count = count;
    ax.spacing = 2.0 * half / (count - 1);
    ax.origin = -half;
    ax.role = std::move(role);
    return ax;
}

GridField1D::GridField1D(GridAxis axis, CVec values) : axis_(std::move(axis)), values_(std::move(values)) {
    if (!axis_.valid() || values_.size() != axis_.count)
        throw std::invalid_argument("GridField1D: axis/value size mismatch");
}

GridField1D::GridField1D(GridAxis axis) : axis_(std::move(axis)) {
    if (!axis_.valid()) throw std::invalid_argument("GridField1D: invalid axis");
    values_ = CVec::Zero(axis_.count);
}

double GridField1D::l2_norm() const { return std::sqrt(values_.squaredNorm() * axis_.spacing); }

GridField1D& GridField1D::normalize() {
    const double n = l2_norm();
    if (n > 0) values_ /= n;
    return *this;
}

double GridField1D::boundary_fraction() const {
    const double peak = values_.cwiseAbs().maxCoeff();
    if (peak == 0) return 0.0;
    return std::max(std::abs(values_(0)), std::abs(values_(axis_.count - 1))) / peak;
}

cplx inner_product(const GridField1D& f, const GridField1D& g) {
    if (f.size() != g.size()) throw DimensionMismatchError("inner_product: size mismatch");
    // Eigen's dot conjugates its object: g.dot(f) = sum conj(g) f
    return g.values().dot(f.values()) * f.axis().spacing;
}

double l2_distance(const GridField1D& f, const GridField1D& g) {
    if (f.size() != g.size()) throw DimensionMismatchError("l2_distance: size mismatch");
    return std::sqrt((f.values() - g.values()).squaredNorm() * f.axis().spacing);
}

void GridField1D::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("GridField1D::save: cannot open " + path);
    out << header_line({axis_}) << "\n";
    for (int i = 0; i < axis_.count; ++i)
        out << i << ", " << fmt_g(values_(i).real()) << ", " << fmt_g(values_(i).imag()) << "\n";
}

GridField1D GridField1D::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("GridField1D::load: cannot open " + path);
    std::string line;
    std::getline(in, line);
    const auto axes = parse_header(line);
    if (axes.size() != 1) throw std::runtime_error("GridField1D::load: expected one axis");
    GridField1D field(axes[0]);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split_csv(line);
        if (cols.size() != 3) throw std::runtime_error("GridField1D::load: bad row");
        field.values()(std::stoi(cols[0])) = cplx(std::stod(cols[1]), std::stod(cols[2]));
    }
    return field;
}

GridField2D::GridField2D(GridAxis ax, GridAxis ap, CMat values)
    : ax_(std::move(ax)), ap_(std::move(ap)), values_(std::move(values)) {
    if (!ax_.valid() || !ap_.valid() || values_.rows() != ax_.count || values_.cols() != ap_.count)
        throw std::invalid_argument("GridField2D: axis/value size mismatch");
}

GridField2D::GridField2D(GridAxis ax, GridAxis ap) : ax_(std::move(ax)), ap_(std::move(ap)) {
    if (!ax_.valid() || !ap_.valid()) throw std::invalid_argument("GridField2D: invalid axes");
    values_ = CMat::Zero(ax_.count, ap_.count);
}

double GridField2D::l2_norm() const { return std::sqrt(values_.squaredNorm() * cell_area()); }

GridField2D& GridField2D::normalize() {
    const double n = l2_norm();
    if (n > 0) values_ /= n;
    return *this;
}

double GridField2D::boundary_fraction() const {
    const double peak = values_.cwiseAbs().maxCoeff();
    if (peak == 0) return 0.0;
    double edge = 0.0;
    for (int i = 0; i < values_.rows(); ++i)
        edge = std::max({edge, std::abs(values_(i, 0)), std::abs(values_(i, values_.cols() - 1))});
    for (int k = 0; k < values_.cols(); ++k)
        edge = std::max({edge, std::abs(values_(0, k)), std::abs(values_(values_.rows() - 1, k))});
    return edge / peak;
}

cplx inner_product(const GridField2D& f, const GridField2D& g) {
    if (f.values().rows() != g.values().rows() || f.values().cols() != g.values().cols())
        throw DimensionMismatchError("inner_product: size mismatch");
    return (f.values().array() * g.values().array().conjugate()).sum() * f.cell_area();
}

double l2_distance(const GridField2D& f, const GridField2D& g) {
    if (f.values().rows() != g.values().rows() || f.values().cols() != g.values().cols())
        throw DimensionMismatchError("l2_distance: size mismatch");
    return std::sqrt((f.values() - g.values()).squaredNorm() * f.cell_area());
}

void GridField2D::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("GridField2D::save: cannot open " + path);
    out << header_line({ax_, ap_}) << "\n";
    for (int i = 0; i < ax_.count; ++i)
        for (int k = 0; k < ap_.count; ++k)
            out << i << ", " << k << ", " << fmt_g(values_(i, k).real()) << ", "
                << fmt_g(values_(i, k).imag()) << "\n";
}

GridField2D GridField2D::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("GridField2D::load: cannot open " + path);
    std::string line;
    std::getline(in, line);
    const auto axes = parse_header(line);
    if (axes.size() != 2) throw std::runtime_error("GridField2D::load: expected two axes");
    GridField2D field(axes[0], axes[1]);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split_csv(line);
        if (cols.size() != 4) throw std::runtime_error("GridField2D::load: bad row");
        field.values()(std::stoi(cols[0]), std::stoi(cols[1])) =
            cplx(std::stod(cols[2]), std::stod(cols[3]));
    }
    return field;
}

namespace {
template <typename Field>
double aligned_distance_impl(const Field& f, const Field& g) {
    const cplx num = inner_product(f, g);
    const double gn = g.l2_norm();
    if (gn == 0) return f.l2_norm();
    cplx phase = num / std::abs(num);
    if (std::abs(num) == 0) phase = 1.0;
    Field shifted = f;
    shifted.values() *= std::conj(phase);
    return l2_distance(shifted, g) / gn;
}
}  // namespace

double phase_aligned_distance(const GridField1D& f, const GridField1D& g) {
    return aligned_distance_impl(f, g);
}

double phase_aligned_distance(const GridField2D& f, const GridField2D& g) {
    return aligned_distance_impl(f, g);
}

}  // namespace norbit
