#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "norbit/phasespace.hpp"
#include "norbit/runner.hpp"

namespace py = pybind11;
using namespace norbit;

namespace {

PhasePoint as_point(const Vec& z) { return PhasePoint::from_zvec(z); }

SqueezedState make_state(const Vec& z0, const CMat& m, double hbar, cplx phase) {
    return SqueezedState(as_point(z0), SiegelMatrix(m), hbar, phase);
}

py::dict result_dict(const PropagatorResult& r) {
    py::dict d;
    d["center"] = r.state_out.center.zvec();
    d["M"] = r.state_out.m.mat();
    d["phase"] = r.state_out.phase;
    d["gamma"] = r.gamma;
    d["monodromy"] = r.monodromy;
    d["max_sympl_defect"] = r.diag.max_sympl_defect;
    d["reprojections"] = r.diag.reprojections;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Semiclassical nearby-orbit propagation: Gaussian states, symplectic and "
              "metaplectic calculus, classical flows and a split-step reference solver.";

    // ---- symplectic core ----
    m.def("symplectic_j", &symplectic_j, py::arg("n"));
    m.def(
        "symplectic_form",
        [](const Vec& z, const Vec& zp) { return symplectic_form(as_point(z), as_point(zp)); },
        py::arg("z"), py::arg("zp"), "sigma(z, z') = p . x' - p' . x for 2n-vectors (x, p)");
    m.def(
        "is_symplectic", [](const Mat& s, double tol) { return is_symplectic(s, tol); },
        py::arg("s"), py::arg("tol") = kSymplTol);
    m.def(
        "cayley_transform",
        [](const Mat& s) { return cayley_transform(SymplecticMatrix(s, 1e-8)); }, py::arg("s"),
        "symplectic Cayley transform 1/2 J (S + I)(S - I)^-1");
    m.def(
        "random_symplectic",
        [](int n, uint64_t seed, double scale) {
            std::mt19937_64 rng(seed);
            return random_symplectic(n, rng, scale).mat();
        },
        py::arg("n"), py::arg("seed"), py::arg("scale") = 0.7);
    m.def(
        "generating_function",
        [](const Mat& s) {
            const GeneratingFunction w = generating_function_of(SymplecticMatrix(s, 1e-8));
            return py::make_tuple(w.p, w.l, w.q);
        },
        py::arg("s"), "returns (P, L, Q) with W = x.Px/2 - x.Lx' + x'.Qx'/2");

    // ---- Gaussian states ----
    py::class_<SqueezedState>(m, "SqueezedState")
        .def(py::init(&make_state), py::arg("z0"), py::arg("M"), py::arg("hbar"),
             py::arg("phase") = cplx(1.0, 0.0))
        .def_static(
            "coherent",
            [](const Vec& z0, double hbar) { return SqueezedState::coherent(as_point(z0), hbar); },
            py::arg("z0"), py::arg("hbar"))
        .def_property_readonly("center", [](const SqueezedState& s) { return s.center.zvec(); })
        .def_property_readonly("M", [](const SqueezedState& s) { return s.m.mat(); })
        .def_readonly("hbar", &SqueezedState::hbar)
        .def_readonly("phase", &SqueezedState::phase)
        .def("__repr__", [](const SqueezedState& s) {
            return "<SqueezedState n=" + std::to_string(s.dim()) +
                   " hbar=" + std::to_string(s.hbar) + ">";
        });

    m.def(
        "evaluate",
        [](const SqueezedState& s, py::array_t<double> x) {
            auto buf = x.unchecked<1>();
            py::array_t<cplx> out(buf.shape(0));
            auto res = out.mutable_unchecked<1>();
            for (py::ssize_t i = 0; i < buf.shape(0); ++i)
                res(i) = evaluate(s, Vec::Constant(1, buf(i)));
            return out;
        },
        py::arg("state"), py::arg("x"), "evaluate an n = 1 state on an array of positions");
    m.def(
        "wigner",
        [](const SqueezedState& s, const Vec& z) { return wigner(s, as_point(z)); },
        py::arg("state"), py::arg("z"));
    m.def(
        "wigner_moyal_cross",
        [](const SqueezedState& a, const SqueezedState& b, const Vec& z) {
            return wigner_moyal_cross(a, b, as_point(z));
        },
        py::arg("s1"), py::arg("s2"), py::arg("z"));
    m.def("g_matrix", &g_matrix, py::arg("X"), py::arg("Y"));
    m.def(
        "g_factor", [](const Mat& x, const Mat& y) { return g_factor(x, y).mat(); }, py::arg("X"),
        py::arg("Y"));
    m.def("fresnel_sqrt", &fresnel_sqrt, py::arg("K"));
    m.def(
        "coherent_overlap",
        [](const SqueezedState& s, const Vec& z0, double hbar) {
            return coherent_overlap(s, as_point(z0), hbar);
        },
        py::arg("state"), py::arg("z0"), py::arg("hbar"));
    m.def("state_overlap", &state_overlap, py::arg("s1"), py::arg("s2"));

    // ---- metaplectic action ----
    m.def(
        "alpha",
        [](const Mat& s, const CMat& mm) {
            return alpha(SymplecticMatrix(s, 1e-8), SiegelMatrix(mm)).mat();
        },
        py::arg("S"), py::arg("M"), "Siegel half-space action (C + DM)(A + BM)^-1");
    m.def(
        "apply_metaplectic",
        [](const Mat& s, const SqueezedState& state) {
            const auto elem = MetaplecticElement::from_matrix(SymplecticMatrix(s, 1e-8));
            return apply_to_gaussian(elem, state);
        },
        py::arg("S"), py::arg("state"),
        "apply the shortest-path metaplectic lift of S to a squeezed state");

    // ---- classical flows ----
    m.def(
        "flow",
        [](const std::string& name, double param, const Vec& z0, double T, double dt) {
            const Trajectory tr = flow(builtin_hamiltonian(name, param), as_point(z0), T, dt);
            Mat pts(tr.points.size(), 2 * tr.z0.dim());
            Vec times(tr.times.size());
            for (size_t k = 0; k < tr.points.size(); ++k) {
                pts.row(k) = tr.points[k].zvec().transpose();
                times(k) = tr.times[k];
            }
            return py::make_tuple(times, pts);
        },
        py::arg("hamiltonian"), py::arg("param"), py::arg("z0"), py::arg("T"), py::arg("dt"),
        "returns (times, z-samples) of the classical orbit");
    m.def(
        "variational_flow",
        [](const std::string& name, double param, const Vec& z0, double T, double dt) {
            Trajectory tr = variational_flow(builtin_hamiltonian(name, param), as_point(z0), T, dt);
            action_phase(tr, builtin_hamiltonian(name, param));
            return py::make_tuple(tr.final_point().zvec(), tr.monodromy.back(), tr.gamma.back());
        },
        py::arg("hamiltonian"), py::arg("param"), py::arg("z0"), py::arg("T"), py::arg("dt"),
        "returns (f_T(z0), S_T(z0), gamma_T)");

    // ---- nearby-orbit propagation ----
    m.def(
        "propagate_coherent",
        [](const std::string& name, double param, const SqueezedState& state, double T, double dt) {
            return result_dict(propagate_coherent(builtin_hamiltonian(name, param), state, T, dt));
        },
        py::arg("hamiltonian"), py::arg("param"), py::arg("state"), py::arg("T"), py::arg("dt"));
    m.def(
        "error_vs_reference",
        [](const std::string& name, double param, const Vec& z0, const CMat& mm,
           const std::vector<double>& hbars, double T, double dt, int samples) {
            const HbarSweepResult res = error_vs_reference(
                builtin_hamiltonian(name, param), as_point(z0), SiegelMatrix(mm), hbars, T, dt,
                samples);
            py::list rows;
            for (const auto& r : res.rows)
                rows.append(py::make_tuple(r.hbar, r.sup_error, r.final_error));
            py::dict d;
            d["rows"] = rows;
            d["slope"] = res.slope;
            d["monotone_within_10pct"] = res.monotone_within_10pct;
            return d;
        },
        py::arg("hamiltonian"), py::arg("param"), py::arg("z0"), py::arg("M"), py::arg("hbars"),
        py::arg("T"), py::arg("dt"), py::arg("samples") = 8);

    // ---- reference solver ----
    m.def(
        "split_step_reference",
        [](const std::string& name, double param, const SqueezedState& psi0, double T, double dt,
           double extent, int count) {
            const HamiltonianModel h = builtin_hamiltonian(name, param);
            SplitStepConfig cfg;
            cfg.extent = extent;
            cfg.count = count;
            cfg.hbar = psi0.hbar;
            cfg.dt = dt;
            cfg.t_final = T;
            cfg.potential = [h](double x) { return h.value(PhasePoint(x, 0.0), 0.0); };
            const GridAxis ax = split_step_axis(extent, count);
            const SplitStepResult res = split_step(sample_on_grid(psi0, ax), cfg);
            Vec xs(ax.count);
            for (int i = 0; i < ax.count; ++i) xs(i) = ax.coord(i);
            return py::make_tuple(xs, CVec(res.psi_final.values()));
        },
        py::arg("hamiltonian"), py::arg("param"), py::arg("psi0"), py::arg("T"), py::arg("dt"),
        py::arg("extent"), py::arg("count"),
        "Strang split-step solution from a squeezed initial state; returns (x, psi)");

    // ---- phase-space layer ----
    m.def(
        "wavepacket_transform",
        [](const SqueezedState& psi, double half, int count) {
            const Window win = Window::standard(psi.hbar);
            const GridAxis ax = GridAxis::symmetric(half, count, "x");
            const GridAxis ap = GridAxis::symmetric(half, count, "p");
            const PhaseSpaceField f = wavepacket_transform(psi, win, ax, ap);
            return CMat(f.field.values());
        },
        py::arg("state"), py::arg("half_extent"), py::arg("count"),
        "closed-form transform against the standard Gaussian window; returns the (x, p) array");
    m.def("hwp_convention", [] {
        const auto& audit = hwp_audit();
        return audit.factor == 0.5 ? "+sigma/2"
               : audit.factor == -0.5 ? "-sigma/2"
               : audit.factor == 1.0 ? "+sigma"
                                     : "-sigma";
    });

    m.attr("__version__") = kVersion;
}
