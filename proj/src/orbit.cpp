#include "norbit/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace norbit {

namespace {
constexpr double kPi = std::numbers::pi;

int snap_index(double t, double dt, int max_index) {
    return std::clamp(static_cast<int>(std::round(std::abs(t) / dt)), 0, max_index);
}
}  // namespace

PropagatorResult propagate_coherent(const HamiltonianModel& h, const SqueezedState& state,
                                    double t_final, double dt) {
    const auto results = propagate_coherent_sampled(h, state, t_final, dt, {});
    return results.back();
}

std::vector<PropagatorResult> propagate_coherent_sampled(const HamiltonianModel& h,
                                                         const SqueezedState& state,
                                                         double t_final, double dt,
                                                         const std::vector<double>& sample_times) {
    Trajectory traj = variational_flow(h, state.center, t_final, dt);
    action_phase(traj, h);
    const auto args = tracked_det_arg_path(traj.monodromy, state.m.mat());

    std::vector<int> indices;
    const int last = static_cast<int>(traj.points.size()) - 1;
    const double step = traj.times.size() > 1 ? std::abs(traj.times[1] - traj.times[0]) : dt;
    for (double ts : sample_times) indices.push_back(snap_index(ts, step, last));
    indices.push_back(last);

    std::vector<PropagatorResult> out;
    out.reserve(indices.size());
    for (int idx : indices) {
        const SymplecticMatrix st(traj.monodromy[idx], 1e-6);
        const cplx phase = state.phase * std::exp(cplx(0, traj.gamma[idx] / state.hbar)) *
                           std::exp(cplx(0, -0.5 * args[idx]));
        out.push_back(PropagatorResult{
            SqueezedState(traj.points[idx], alpha(st, state.m), state.hbar, phase),
            traj.times[idx],
            traj.gamma[idx],
            traj.points[idx],
            traj.monodromy[idx],
            {last, traj.diag.max_sympl_defect, traj.diag.reprojections}});
    }
    return out;
}

PropagatorResult propagate_coherent(const HamiltonianModel& h, const SqueezedState& state,
                                    double t_final, double dt, const PhasePoint& expansion_point) {
    if ((state.center - expansion_point).norm() < 1e-14)
        return propagate_coherent(h, state, t_final, dt);
    // U(t, ze) applied to a state centered elsewhere: the displacement
    // delta = z0 - ze rides through the Weyl composition phases.
    Trajectory traj = variational_flow(h, expansion_point, t_final, dt);
    action_phase(traj, h);
    const auto args = tracked_det_arg_path(traj.monodromy, state.m.mat());
    const int last = static_cast<int>(traj.points.size()) - 1;
    const SymplecticMatrix st(traj.monodromy[last], 1e-6);
    const PhasePoint delta = state.center - expansion_point;
    const PhasePoint s_delta = st.apply(delta);
    const PhasePoint center_out = traj.points[last] + s_delta;
    const double extra =
        0.5 * (symplectic_form(traj.points[last], s_delta) - symplectic_form(expansion_point, delta));
    const cplx phase = state.phase * std::exp(cplx(0, traj.gamma[last] / state.hbar)) *
                       std::exp(cplx(0, -0.5 * args[last])) *
                       std::exp(cplx(0, extra / state.hbar));
    PropagatorResult r{SqueezedState(center_out, alpha(st, state.m), state.hbar, phase),
                       traj.times[last],
                       traj.gamma[last],
                       traj.points[last],
                       traj.monodromy[last],
                       {last, traj.diag.max_sympl_defect, traj.diag.reprojections}};
    return r;
}

PhaseSpaceLattice PhaseSpaceLattice::automatic(const GridField1D& psi0, double hbar,
                                               double oversample) {
    const GridAxis& ax = psi0.axis();
    double nrm2 = 0, mux = 0;
    for (int i = 0; i < ax.count; ++i) {
        const double w = std::norm(psi0.values()(i));
        nrm2 += w;
        mux += w * ax.coord(i);
    }
    mux /= nrm2;
    double varx = 0;
    for (int i = 0; i < ax.count; ++i)
        varx += std::norm(psi0.values()(i)) * std::pow(ax.coord(i) - mux, 2);
    varx /= nrm2;
    double mup = 0, p2 = 0;
    for (int i = 1; i + 1 < ax.count; ++i) {
        const cplx d = (psi0.values()(i + 1) - psi0.values()(i - 1)) / (2.0 * ax.spacing);
        mup += std::imag(std::conj(psi0.values()(i)) * d) * hbar * ax.spacing;
        p2 += std::norm(d) * hbar * hbar * ax.spacing;
    }
    mup /= nrm2 * ax.spacing;
    p2 /= nrm2 * ax.spacing;
    const double sigp = std::sqrt(std::max(p2 - mup * mup, hbar / 2));

    PhaseSpaceLattice lat;
    lat.x_center = mux;
    lat.p_center = mup;
    const double margin = 8.0 * std::sqrt(hbar);
    lat.x_half = 3.0 * std::sqrt(varx) + margin;
    lat.p_half = 3.0 * sigp + margin;
    const double spacing = std::sqrt(2.0 * kPi * hbar / oversample);
    lat.nx = std::max(8, static_cast<int>(std::ceil(2.0 * lat.x_half / spacing)) + 1);
    lat.np = std::max(8, static_cast<int>(std::ceil(2.0 * lat.p_half / spacing)) + 1);
    return lat;
}

GeneralPropagation propagate_general(const HamiltonianModel& h, const GridField1D& psi0,
                                     double t_final, double dt, double hbar,
                                     const PhaseSpaceLattice& lattice) {
    if (lattice.nx < 2 || lattice.np < 2)
        throw std::invalid_argument("propagate_general: lattice too small");
    GeneralPropagation out;
    out.psi = GridField1D(psi0.axis());
    const double dzx = lattice.dx();
    const double dzp = lattice.dp();

    // coefficients over the lattice
    struct Term {
        PhasePoint z0;
        cplx coeff;
    };
    std::vector<Term> terms;
    double cmax = 0.0;
    std::vector<cplx> coeffs(static_cast<size_t>(lattice.nx) * lattice.np);
    for (int ix = 0; ix < lattice.nx; ++ix) {
        const double x0 = lattice.x_center - lattice.x_half + ix * dzx;
        for (int ip = 0; ip < lattice.np; ++ip) {
            const double p0 = lattice.p_center - lattice.p_half + ip * dzp;
            const cplx c = coherent_overlap(psi0, PhasePoint(x0, p0), hbar);
            coeffs[static_cast<size_t>(ix) * lattice.np + ip] = c;
            cmax = std::max(cmax, std::abs(c));
        }
    }
    // boundary ring monitor against the global max
    for (int ix = 0; ix < lattice.nx; ++ix)
        for (int ip : {0, lattice.np - 1})
            if (std::abs(coeffs[static_cast<size_t>(ix) * lattice.np + ip]) > 1e-6 * cmax)
                out.boundary_warning = true;
    for (int ip = 0; ip < lattice.np; ++ip)
        for (int ix : {0, lattice.nx - 1})
            if (std::abs(coeffs[static_cast<size_t>(ix) * lattice.np + ip]) > 1e-6 * cmax)
                out.boundary_warning = true;

    const double cutoff = 1e-8 * cmax;
    for (int ix = 0; ix < lattice.nx; ++ix) {
        const double x0 = lattice.x_center - lattice.x_half + ix * dzx;
        for (int ip = 0; ip < lattice.np; ++ip) {
            const double p0 = lattice.p_center - lattice.p_half + ip * dzp;
            const cplx c = coeffs[static_cast<size_t>(ix) * lattice.np + ip];
            if (std::abs(c) < cutoff) continue;
            terms.push_back({PhasePoint(x0, p0), c});
        }
    }
    out.total_coefficients = lattice.nx * lattice.np;
    out.kept_coefficients = static_cast<int>(terms.size());

    const GridAxis& ax = psi0.axis();
    const int nterms = static_cast<int>(terms.size());
    std::vector<CVec> rows(nterms);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int k = 0; k < nterms; ++k) {
        const SqueezedState phi0 = SqueezedState::coherent(terms[k].z0, hbar);
        const PropagatorResult r = propagate_coherent(h, phi0, t_final, dt);
        GridField1D g = sample_on_grid(r.state_out, ax);
        rows[k] = g.values() * terms[k].coeff;
    }
    // deterministic ordered reduction
    const double weight = dzx * dzp / (2.0 * kPi * hbar);
    for (int k = 0; k < nterms; ++k) out.psi.values() += rows[k] * weight;
    return out;
}

SplitStepConfig auto_reference_config(const HamiltonianModel& h, const PhasePoint& z0,
                                      double hbar, double t_final, double dt) {
    // classical orbit extent sets the box; wavepacket width sets the margin
    Trajectory traj = flow(h, z0, t_final, std::min(dt, 1e-3));
    double xmax = 0, pmax = 0;
    for (const auto& z : traj.points) {
        xmax = std::max(xmax, std::abs(z.x(0)));
        pmax = std::max(pmax, std::abs(z.p(0)));
    }
    SplitStepConfig cfg;
    cfg.hbar = hbar;
    cfg.t_final = std::abs(t_final);
    const double width = std::sqrt(hbar);
    cfg.extent = xmax + 14.0 * width + 1.0;
    const double kmax = (pmax + 10.0 * width) / hbar;
    const double dx_needed = kPi / (1.6 * kmax);
    int count = 256;
    while (2.0 * cfg.extent / count > dx_needed && count < (1 << 15)) count *= 2;
    cfg.count = count;
    // the reference step divides the semiclassical step exactly so snapshot
    // times land on both solvers' lattices
    const int steps = std::max(1, static_cast<int>(std::round(cfg.t_final / dt)));
    const double hstep = cfg.t_final / steps;
    int subdiv = std::max(1, static_cast<int>(std::ceil(hstep / 2.5e-4)));
    const double dx = 2.0 * cfg.extent / cfg.count;
    const double kny = kPi / dx;
    while (cfg.hbar * kny * kny * (hstep / subdiv) / 2.0 >= kPi) subdiv *= 2;
    cfg.dt = hstep / subdiv;
    return cfg;
}

std::vector<double> snap_sample_times(double t_final, double dt, int n_samples) {
    const int steps = std::max(1, static_cast<int>(std::round(std::abs(t_final) / dt)));
    const double hstep = t_final / steps;
    std::vector<double> out;
    for (int k = 1; k <= n_samples; ++k)
        out.push_back(hstep * std::round(t_final * k / n_samples / hstep));
    return out;
}

HbarSweepResult error_vs_reference(const HamiltonianModel& h, const PhasePoint& z0,
                                   const SiegelMatrix& m, const std::vector<double>& hbars,
                                   double t_final, double dt, int n_samples) {
    if (hbars.size() < 3)
        throw std::invalid_argument("error_vs_reference: need at least three hbar values");
    HbarSweepResult result;
    for (double hb : hbars) {
        SplitStepConfig cfg = auto_reference_config(h, z0, hb, t_final, dt);
        const std::vector<double> sample_times = snap_sample_times(t_final, dt, n_samples);
        cfg.snapshot_times = sample_times;
        cfg.potential = [&h](double x) {
            return h.value(PhasePoint(x, 0.0), 0.0);
        };
        const GridAxis ax = split_step_axis(cfg.extent, cfg.count);
        const SqueezedState psi0(z0, m, hb);
        const GridField1D grid0 = sample_on_grid(psi0, ax);
        SplitStepResult ref;
        try {
            ref = split_step(grid0, cfg);
        } catch (const BoundaryWrapError& e) {
            throw NumericalError(std::string("error_vs_reference: reference under-resolved: ") +
                                 e.what());
        }
        const auto semis = propagate_coherent_sampled(h, psi0, t_final, dt, sample_times);
        double sup = 0.0, fin = 0.0;
        for (size_t k = 0; k < ref.snapshots.size(); ++k) {
            const GridField1D sc = sample_on_grid(semis[k].state_out, ax);
            const double err = l2_distance(sc, ref.snapshots[k]);
            sup = std::max(sup, err);
            if (k + 1 == ref.snapshots.size()) fin = err;
        }
        result.rows.push_back({hb, sup, fin});
    }
    // least-squares slope of log sup_error vs log hbar
    const int n = static_cast<int>(result.rows.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : result.rows) {
        const double lx = std::log(r.hbar), ly = std::log(std::max(r.sup_error, 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    result.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    for (int i = 0; i + 1 < n; ++i) {
        const bool decreasing_h = result.rows[i + 1].hbar < result.rows[i].hbar;
        const double e0 = result.rows[i].sup_error, e1 = result.rows[i + 1].sup_error;
        if (decreasing_h && e1 > 1.10 * e0) result.monotone_within_10pct = false;
        if (!decreasing_h && e0 > 1.10 * e1) result.monotone_within_10pct = false;
    }
    return result;
}

}  // namespace norbit
