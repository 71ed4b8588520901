#include "norbit/flows.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace norbit {

Mat HamiltonianModel::hess(const PhasePoint& z, double t) const {
    if (hessian) return hessian(z, t);
    // central differences of the gradient
    const int dim = 2 * n;
    const double scale = std::max(1.0, z.zvec().cwiseAbs().maxCoeff());
    const double h = 1e-5 * scale;
    Mat out(dim, dim);
    for (int k = 0; k < dim; ++k) {
        Vec e = Vec::Zero(dim);
        e(k) = h;
        const Vec gp = gradient(PhasePoint::from_zvec(z.zvec() + e), t);
        const Vec gm = gradient(PhasePoint::from_zvec(z.zvec() - e), t);
        out.col(k) = (gp - gm) / (2.0 * h);
    }
    return 0.5 * (out + out.transpose());
}

void HamiltonianModel::validate(std::mt19937_64& rng, int probes) const {
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < probes; ++trial) {
        Vec z(2 * n);
        for (int i = 0; i < 2 * n; ++i) z(i) = g(rng);
        const PhasePoint zp = PhasePoint::from_zvec(z);
        const double t = g(rng);
        const Vec grad_given = gradient(zp, t);
        const double h = 1e-6 * std::max(1.0, z.cwiseAbs().maxCoeff());
        Vec grad_fd(2 * n);
        for (int k = 0; k < 2 * n; ++k) {
            Vec e = Vec::Zero(2 * n);
            e(k) = h;
            grad_fd(k) = (value(PhasePoint::from_zvec(z + e), t) -
                          value(PhasePoint::from_zvec(z - e), t)) /
                         (2.0 * h);
        }
        const double rel = (grad_given - grad_fd).norm() / std::max(1.0, grad_fd.norm());
        if (rel > 1e-5)
            throw std::invalid_argument("HamiltonianModel '" + name +
                                        "': gradient disagrees with finite differences");
        if (hessian) {
            const Mat hh = hessian(zp, t);
            if ((hh - hh.transpose()).cwiseAbs().maxCoeff() > 1e-9)
                throw std::invalid_argument("HamiltonianModel '" + name +
                                            "': Hessian not symmetric");
        }
    }
}

HamiltonianModel harmonic_oscillator(double omega) {
    HamiltonianModel h;
    h.name = "harmonic";
    h.value = [omega](const PhasePoint& z, double) {
        return 0.5 * (z.p.squaredNorm() + omega * omega * z.x.squaredNorm());
    };
    h.gradient = [omega](const PhasePoint& z, double) {
        Vec g(2);
        g << omega * omega * z.x(0), z.p(0);
        return g;
    };
    h.hessian = [omega](const PhasePoint&, double) {
        Mat m(2, 2);
        m << omega * omega, 0, 0, 1;
        return m;
    };
    return h;
}

HamiltonianModel free_particle() {
    HamiltonianModel h;
    h.name = "free";
    h.value = [](const PhasePoint& z, double) { return 0.5 * z.p.squaredNorm(); };
    h.gradient = [](const PhasePoint& z, double) {
        Vec g(2);
        g << 0, z.p(0);
        return g;
    };
    h.hessian = [](const PhasePoint&, double) {
        Mat m(2, 2);
        m << 0, 0, 0, 1;
        return m;
    };
    return h;
}

HamiltonianModel linear_potential() {
    HamiltonianModel h;
    h.name = "linear";
    h.value = [](const PhasePoint& z, double) { return 0.5 * z.p.squaredNorm() + z.x(0); };
    h.gradient = [](const PhasePoint& z, double) {
        Vec g(2);
        g << 1, z.p(0);
        return g;
    };
    h.hessian = [](const PhasePoint&, double) {
        Mat m(2, 2);
        m << 0, 0, 0, 1;
        return m;
    };
    return h;
}

HamiltonianModel quartic_oscillator() {
    HamiltonianModel h;
    h.name = "quartic";
    h.value = [](const PhasePoint& z, double) {
        return 0.5 * z.p.squaredNorm() + 0.25 * std::pow(z.x(0), 4);
    };
    h.gradient = [](const PhasePoint& z, double) {
        Vec g(2);
        g << std::pow(z.x(0), 3), z.p(0);
        return g;
    };
    h.hessian = [](const PhasePoint& z, double) {
        Mat m(2, 2);
        m << 3.0 * z.x(0) * z.x(0), 0, 0, 1;
        return m;
    };
    return h;
}

HamiltonianModel pendulum() {
    HamiltonianModel h;
    h.name = "pendulum";
    h.value = [](const PhasePoint& z, double) {
        return 0.5 * z.p.squaredNorm() - std::cos(z.x(0));
    };
    h.gradient = [](const PhasePoint& z, double) {
        Vec g(2);
        g << std::sin(z.x(0)), z.p(0);
        return g;
    };
    h.hessian = [](const PhasePoint& z, double) {
        Mat m(2, 2);
        m << std::cos(z.x(0)), 0, 0, 1;
        return m;
    };
    return h;
}

HamiltonianModel builtin_hamiltonian(const std::string& name, double param) {
    HamiltonianModel h;
    if (name == "harmonic") h = harmonic_oscillator(param);
    else if (name == "free") h = free_particle();
    else if (name == "linear") h = linear_potential();
    else if (name == "quartic") h = quartic_oscillator();
    else if (name == "pendulum") h = pendulum();
    else throw std::invalid_argument("unknown built-in hamiltonian: " + name);
    std::mt19937_64 rng(0x5eed + static_cast<uint64_t>(h.name.size()));
    h.validate(rng, 3);
    return h;
}

namespace {

struct FlowState {
    Vec z;
    Mat s;  // empty when not tracking the tangent flow
};

Vec z_rhs(const HamiltonianModel& h, const Mat& j, const Vec& z, double t) {
    return j * h.grad(PhasePoint::from_zvec(z), t);
}

void check_finite(const Vec& z, double t) {
    if (!z.allFinite()) throw DivergedError("flow: non-finite state", t);
}

Trajectory integrate(const HamiltonianModel& h, const PhasePoint& z0, double t_final, double dt,
                     bool with_variational) {
    if (dt <= 0) throw std::invalid_argument("flow: dt must be positive");
    if (!std::isfinite(t_final)) throw std::invalid_argument("flow: T must be finite");
    const int n = z0.dim();
    if (h.n != n) throw DimensionMismatchError("flow: Hamiltonian/state dimension mismatch");
    const Mat j = symplectic_j(n);
    // uniform steps that land exactly on t_final; the effective step stays
    // within rounding of the requested dt
    const int steps = std::max(t_final == 0.0 ? 0 : 1,
                               static_cast<int>(std::round(std::abs(t_final) / dt)));
    const double hstep = steps > 0 ? t_final / steps : dt;

    Trajectory traj;
    traj.z0 = z0;
    traj.times.reserve(steps + 1);
    traj.points.reserve(steps + 1);
    traj.times.push_back(0.0);
    traj.points.push_back(z0);

    Vec z = z0.zvec();
    Mat s = Mat::Identity(2 * n, 2 * n);
    if (with_variational) {
        traj.monodromy.reserve(steps + 1);
        traj.monodromy.push_back(s);
    }

    double t = 0.0;
    for (int k = 0; k < steps; ++k) {
        // joint RK4 stage evaluations share the stage trajectory values
        const Vec k1 = z_rhs(h, j, z, t);
        const Vec k2 = z_rhs(h, j, z + 0.5 * hstep * k1, t + 0.5 * hstep);
        const Vec k3 = z_rhs(h, j, z + 0.5 * hstep * k2, t + 0.5 * hstep);
        const Vec k4 = z_rhs(h, j, z + hstep * k3, t + hstep);

        if (with_variational) {
            const Mat a1 = j * h.hess(PhasePoint::from_zvec(z), t);
            const Mat a2 = j * h.hess(PhasePoint::from_zvec(z + 0.5 * hstep * k1), t + 0.5 * hstep);
            const Mat a3 = j * h.hess(PhasePoint::from_zvec(z + 0.5 * hstep * k2), t + 0.5 * hstep);
            const Mat a4 = j * h.hess(PhasePoint::from_zvec(z + hstep * k3), t + hstep);
            const Mat s1 = a1 * s;
            const Mat s2 = a2 * (s + 0.5 * hstep * s1);
            const Mat s3 = a3 * (s + 0.5 * hstep * s2);
            const Mat s4 = a4 * (s + hstep * s3);
            s += (hstep / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
        }
        z += (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = (k + 1) * hstep;
        check_finite(z, t - hstep);

        if (with_variational) {
            const double defect = symplectic_defect(s);
            traj.diag.max_sympl_defect = std::max(traj.diag.max_sympl_defect, defect);
            if (defect > 1e-8) {
                s = symplectic_project(s);
                ++traj.diag.reprojections;
            }
            traj.monodromy.push_back(s);
        }
        traj.times.push_back(t);
        traj.points.push_back(PhasePoint::from_zvec(z));
    }
    return traj;
}

}  // namespace

Trajectory flow(const HamiltonianModel& h, const PhasePoint& z0, double t_final, double dt) {
    return integrate(h, z0, t_final, dt, false);
}

Trajectory variational_flow(const HamiltonianModel& h, const PhasePoint& z0, double t_final,
                            double dt) {
    return integrate(h, z0, t_final, dt, true);
}

std::vector<double> action_phase(Trajectory& traj, const HamiltonianModel& h) {
    const size_t count = traj.points.size();
    std::vector<double> f(count);
    const Mat j = symplectic_j(traj.z0.dim());
    for (size_t k = 0; k < count; ++k) {
        const PhasePoint& z = traj.points[k];
        const double t = traj.times[k];
        const PhasePoint zdot = PhasePoint::from_zvec(j * h.grad(z, t));
        f[k] = 0.5 * symplectic_form(z, zdot) - h.value(z, t);
    }
    std::vector<double> gamma(count, 0.0);
    if (count < 2) {
        traj.gamma = gamma;
        return gamma;
    }
    const double hstep = traj.times[1] - traj.times[0];
    if (count == 2) {
        gamma[1] = 0.5 * hstep * (f[0] + f[1]);
        traj.gamma = gamma;
        return gamma;
    }
    for (size_t k = 1; k < count; ++k) {
        if (k % 2 == 0) {
            gamma[k] = gamma[k - 2] + hstep / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
        } else if (k + 1 < count) {
            // parabola through (k-1, k, k+1), integrated over the left subinterval
            gamma[k] = gamma[k - 1] + hstep / 12.0 * (5.0 * f[k - 1] + 8.0 * f[k] - f[k + 1]);
        } else {
            // final odd sample: parabola through the last three points
            gamma[k] = gamma[k - 1] + hstep / 12.0 * (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k]);
        }
    }
    traj.gamma = gamma;
    return gamma;
}

std::function<double(const PhasePoint&)> truncated_hamiltonian(const HamiltonianModel& h,
                                                               const PhasePoint& z0, double t,
                                                               double dt) {
    PhasePoint ft = z0;
    if (t != 0.0) ft = flow(h, z0, t, dt).final_point();
    const double h0 = h.value(ft, t);
    const Vec g0 = h.grad(ft, t);
    const Mat hh0 = h.hess(ft, t);
    const Vec fz = ft.zvec();
    return [h0, g0, hh0, fz](const PhasePoint& z) {
        const Vec d = z.zvec() - fz;
        return h0 + g0.dot(d) + 0.5 * d.dot(hh0 * d);
    };
}

void export_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_trajectory_csv: cannot open " + path);
    const int n = traj.z0.dim();
    out << "t";
    for (int i = 0; i < n; ++i) out << ",x" << i;
    for (int i = 0; i < n; ++i) out << ",p" << i;
    for (int r = 0; r < 2 * n; ++r)
        for (int c = 0; c < 2 * n; ++c) out << ",S" << r << c;
    out << ",gamma\n";
    char buf[40];
    auto g = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (size_t k = 0; k < traj.points.size(); ++k) {
        out << g(traj.times[k]);
        for (int i = 0; i < n; ++i) out << "," << g(traj.points[k].x(i));
        for (int i = 0; i < n; ++i) out << "," << g(traj.points[k].p(i));
        const Mat s = traj.monodromy.empty() ? Mat::Identity(2 * n, 2 * n) : traj.monodromy[k];
        for (int r = 0; r < 2 * n; ++r)
            for (int c = 0; c < 2 * n; ++c) out << "," << g(s(r, c));
        out << "," << g(traj.gamma.empty() ? 0.0 : traj.gamma[k]) << "\n";
    }
}

}  // namespace norbit
