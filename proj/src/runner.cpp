#include "norbit/runner.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include <json.hpp>

#include "norbit/orbit.hpp"
#include "norbit/phasespace.hpp"

namespace norbit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr double kPi = std::numbers::pi;

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("sha256: cannot open " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.good()) {
        in.read(buf, sizeof(buf));
        EVP_DigestUpdate(ctx, buf, static_cast<size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

struct ArtifactSink {
    fs::path dir;
    json manifest = json::array();

    explicit ArtifactSink(fs::path d) : dir(std::move(d)) { fs::create_directories(dir); }
    fs::path path(const std::string& name) const { return dir / name; }
    void record(const std::string& name) {
        manifest.push_back({{"file", name}, {"sha256", sha256_file(dir / name)}});
    }
    void finalize() {
        std::ofstream out(dir / "manifest.json");
        out << json{{"files", manifest}}.dump(2) << "\n";
    }
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Scenario {
    int schema_version = 1;
    std::string mode;
    uint64_t seed = 1;
    std::string ham_name = "harmonic";
    double ham_param = 1.0;
    PhasePoint z0{0.0, 0.0};
    double state_x = 1.0, state_y = 0.0;
    double hbar = 1.0;
    std::vector<double> hbar_list;
    double t_final = 1.0;
    double dt = 1e-3;
    int samples = 8;
    int grid_count = 0;       // 0 = automatic
    double grid_extent = 0.0; // 0 = automatic
    std::string initial_type = "coherent";
    double cat_separation = 1.0;
    std::string output_dir = "out";
};

double require_positive(const json& j, const std::string& key) {
    if (!j.contains(key)) throw SchemaError("missing field: " + key);
    if (!j[key].is_number()) throw SchemaError("field must be numeric: " + key);
    const double v = j[key].get<double>();
    if (!(v > 0) || !std::isfinite(v)) throw SchemaError("field must be positive: " + key);
    return v;
}

Scenario parse_scenario(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw SchemaError("cannot read config: " + config_path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SchemaError(std::string("config is not valid JSON: ") + e.what());
    }
    Scenario sc;
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        throw SchemaError("missing integer schema_version");
    sc.schema_version = j["schema_version"].get<int>();
    if (sc.schema_version != 1) throw SchemaError("unsupported schema_version");
    if (!j.contains("mode") || !j["mode"].is_string()) throw SchemaError("missing mode");
    sc.mode = j["mode"].get<std::string>();
    std::replace(sc.mode.begin(), sc.mode.end(), '-', '_');
    const std::vector<std::string> modes = {"coherent",   "general",        "phase_space",
                                            "hbar_sweep", "wigner",         "transform_audit"};
    if (std::find(modes.begin(), modes.end(), sc.mode) == modes.end())
        throw SchemaError("unknown mode: " + sc.mode);
    if (j.contains("seed")) sc.seed = j["seed"].get<uint64_t>();
    if (j.contains("hamiltonian")) {
        const auto& h = j["hamiltonian"];
        if (!h.contains("name") || !h["name"].is_string())
            throw SchemaError("hamiltonian.name required");
        sc.ham_name = h["name"].get<std::string>();
        if (h.contains("param")) sc.ham_param = h["param"].get<double>();
        try {
            builtin_hamiltonian(sc.ham_name, sc.ham_param);
        } catch (const std::exception& e) {
            throw SchemaError(e.what());
        }
    }
    if (j.contains("z0")) {
        if (!j["z0"].is_array() || j["z0"].size() != 2) throw SchemaError("z0 must be [x, p]");
        sc.z0 = PhasePoint(j["z0"][0].get<double>(), j["z0"][1].get<double>());
    }
    if (j.contains("state")) {
        const auto& st = j["state"];
        if (st.contains("X")) {
            sc.state_x = st["X"].get<double>();
            if (!(sc.state_x > 0)) throw SchemaError("state.X must be positive");
        }
        if (st.contains("Y")) sc.state_y = st["Y"].get<double>();
    }
    if (sc.mode == "hbar_sweep") {
        if (!j.contains("hbar_list") || !j["hbar_list"].is_array() || j["hbar_list"].size() < 3)
            throw SchemaError("hbar_sweep needs hbar_list with at least 3 values");
        for (const auto& v : j["hbar_list"]) {
            const double hb = v.get<double>();
            if (!(hb > 0)) throw SchemaError("hbar_list entries must be positive");
            sc.hbar_list.push_back(hb);
        }
    } else if (sc.mode != "transform_audit") {
        sc.hbar = require_positive(j, "hbar");
    }
    if (sc.mode != "transform_audit" && sc.mode != "wigner") {
        if (!j.contains("T")) throw SchemaError("missing field: T");
        sc.t_final = j["T"].get<double>();
        if (!std::isfinite(sc.t_final)) throw SchemaError("T must be finite");
        sc.dt = require_positive(j, "dt");
    }
    if (j.contains("samples")) sc.samples = std::max(1, j["samples"].get<int>());
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        if (g.contains("count")) sc.grid_count = g["count"].get<int>();
        if (g.contains("extent")) sc.grid_extent = g["extent"].get<double>();
        if (sc.grid_count < 0 || sc.grid_extent < 0) throw SchemaError("grid fields must be >= 0");
    }
    if (j.contains("initial")) {
        const auto& init = j["initial"];
        if (init.contains("type")) sc.initial_type = init["type"].get<std::string>();
        if (init.contains("separation")) sc.cat_separation = init["separation"].get<double>();
        if (sc.initial_type != "coherent" && sc.initial_type != "cat")
            throw SchemaError("initial.type must be coherent or cat");
    }
    if (j.contains("output_dir")) sc.output_dir = j["output_dir"].get<std::string>();
    return sc;
}

fs::path resolve_output_dir(const std::string& dir) {
    if (const char* root = std::getenv("NEARBY_ORBIT_OUT_ROOT"))
        return fs::path(root) / dir;
    return fs::path(dir);
}

json check_entry(const std::string& name, bool pass, double residual) {
    return {{"name", name}, {"pass", pass}, {"residual", residual}};
}

void write_state_csv(std::ostream& out, const std::vector<PropagatorResult>& rows) {
    out << "t,x0,p0,ReM,ImM,gamma,phase_re,phase_im\n";
    for (const auto& row : rows) {
        const auto& s = row.state_out;
        out << fmt_g(row.t) << "," << fmt_g(s.center.x(0)) << "," << fmt_g(s.center.p(0)) << ","
            << fmt_g(s.m.mat()(0, 0).real()) << "," << fmt_g(s.m.mat()(0, 0).imag()) << ","
            << fmt_g(row.gamma) << "," << fmt_g(s.phase.real()) << "," << fmt_g(s.phase.imag())
            << "\n";
    }
}

int run_coherent(const Scenario& sc, ArtifactSink& sink, json& summary) {
    const HamiltonianModel h = builtin_hamiltonian(sc.ham_name, sc.ham_param);
    const SqueezedState psi0(sc.z0, SiegelMatrix::from_xy(Mat::Constant(1, 1, sc.state_x),
                                                          Mat::Constant(1, 1, sc.state_y)),
                             sc.hbar);
    std::vector<double> sample_times;
    for (int k = 1; k <= sc.samples; ++k) sample_times.push_back(sc.t_final * k / sc.samples);
    const auto rows = propagate_coherent_sampled(h, psi0, sc.t_final, sc.dt, sample_times);
    {
        std::ofstream out(sink.path("state.csv"));
        write_state_csv(out, rows);
    }
    sink.record("state.csv");

    Trajectory traj = variational_flow(h, sc.z0, sc.t_final, sc.dt);
    action_phase(traj, h);
    export_trajectory_csv(traj, sink.path("trajectory.csv").string());
    sink.record("trajectory.csv");

    const auto& fin = rows.back();
    summary["final"] = {{"x", fin.state_out.center.x(0)},
                        {"p", fin.state_out.center.p(0)},
                        {"gamma", fin.gamma},
                        {"phase_re", fin.state_out.phase.real()},
                        {"phase_im", fin.state_out.phase.imag()},
                        {"norm_phase", std::abs(fin.state_out.phase)}};
    json checks = json::array();
    checks.push_back(check_entry("siegel_membership", fin.state_out.m.min_im_eigenvalue() > 0,
                                 -fin.state_out.m.min_im_eigenvalue()));
    checks.push_back(check_entry("unit_phase", std::abs(std::abs(fin.state_out.phase) - 1) < 1e-8,
                                 std::abs(std::abs(fin.state_out.phase) - 1)));
    checks.push_back(check_entry("sympl_defect", fin.diag.max_sympl_defect < 1e-6,
                                 fin.diag.max_sympl_defect));
    summary["checks"] = checks;
    return kExitOk;
}

int run_sweep_mode(const Scenario& sc, ArtifactSink& sink, json& summary) {
    const HamiltonianModel h = builtin_hamiltonian(sc.ham_name, sc.ham_param);
    const SiegelMatrix m = SiegelMatrix::from_xy(Mat::Constant(1, 1, sc.state_x),
                                                 Mat::Constant(1, 1, sc.state_y));
    const HbarSweepResult res =
        error_vs_reference(h, sc.z0, m, sc.hbar_list, sc.t_final, sc.dt, sc.samples);
    {
        std::ofstream out(sink.path("sweep.csv"));
        out << "hbar,error,slope\n";
        for (const auto& r : res.rows)
            out << fmt_g(r.hbar) << "," << fmt_g(r.sup_error) << "," << fmt_g(res.slope) << "\n";
    }
    sink.record("sweep.csv");
    summary["slope"] = res.slope;
    summary["monotone_within_10pct"] = res.monotone_within_10pct;
    json rows = json::array();
    for (const auto& r : res.rows)
        rows.push_back({{"hbar", r.hbar}, {"sup_error", r.sup_error}, {"final_error", r.final_error}});
    summary["rows"] = rows;
    return kExitOk;
}

int run_wigner(const Scenario& sc, ArtifactSink& sink, json& summary) {
    const SqueezedState state(sc.z0, SiegelMatrix::from_xy(Mat::Constant(1, 1, sc.state_x),
                                                           Mat::Constant(1, 1, sc.state_y)),
                              sc.hbar);
    const double orbit = sc.z0.norm();
    const int count = sc.grid_count > 0 ? sc.grid_count : 256;
    const GridAxis ax = sc.grid_extent > 0 ? GridAxis::symmetric(sc.grid_extent, count, "x")
                                           : default_ps_axis(sc.hbar, orbit, count, "x");
    const GridAxis ap = sc.grid_extent > 0 ? GridAxis::symmetric(sc.grid_extent, count, "p")
                                           : default_ps_axis(sc.hbar, orbit, count, "p");
    GridField2D w(ax, ap);
    for (int i = 0; i < ax.count; ++i)
        for (int k = 0; k < ap.count; ++k)
            w.values()(i, k) = wigner(state, PhasePoint(ax.coord(i), ap.coord(k)));
    w.save(sink.path("wigner.grid").string());
    sink.record("wigner.grid");

    // quadrature spot check
    std::mt19937_64 rng(sc.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double res = 0.0;
    for (int k = 0; k < 5; ++k) {
        const PhasePoint z(sc.z0.x(0) + u(rng), sc.z0.p(0) + u(rng));
        const cplx q = wigner_moyal_quadrature(state, state, z);
        res = std::max(res, std::abs(q - wigner(state, z)));
    }
    summary["checks"] = json::array({check_entry("wigner_quadrature_spot", res < 1e-6, res)});
    return res < 1e-6 ? kExitOk : kExitNumerical;
}

int run_general(const Scenario& sc, ArtifactSink& sink, json& summary) {
    const HamiltonianModel h = builtin_hamiltonian(sc.ham_name, sc.ham_param);
    SplitStepConfig cfg = auto_reference_config(h, sc.z0, sc.hbar, sc.t_final, sc.dt);
    if (sc.grid_count > 0) cfg.count = sc.grid_count;
    if (sc.grid_extent > 0) cfg.extent = sc.grid_extent;
    const GridAxis ax = split_step_axis(cfg.extent, cfg.count);

    GridField1D psi0(ax);
    if (sc.initial_type == "cat") {
        const double a = sc.cat_separation;
        const GridField1D lobe1 =
            sample_on_grid(SqueezedState::coherent(PhasePoint(a, 0.0), sc.hbar), ax);
        const GridField1D lobe2 =
            sample_on_grid(SqueezedState::coherent(PhasePoint(-a, 0.0), sc.hbar), ax);
        psi0.values() = lobe1.values() + lobe2.values();
        psi0.normalize();
    } else {
        psi0 = sample_on_grid(SqueezedState(sc.z0,
                                            SiegelMatrix::from_xy(Mat::Constant(1, 1, sc.state_x),
                                                                  Mat::Constant(1, 1, sc.state_y)),
                                            sc.hbar),
                              ax);
    }
    psi0.save(sink.path("psi0.grid").string());
    sink.record("psi0.grid");

    const PhaseSpaceLattice lat = PhaseSpaceLattice::automatic(psi0, sc.hbar);
    const GeneralPropagation out = propagate_general(h, psi0, sc.t_final, sc.dt, sc.hbar, lat);
    out.psi.save(sink.path("psiT.grid").string());
    sink.record("psiT.grid");

    cfg.potential = [&h](double x) { return h.value(PhasePoint(x, 0.0), 0.0); };
    const SplitStepResult ref = split_step(psi0, cfg);
    const double err = l2_distance(out.psi, ref.psi_final);
    summary["l2_error_vs_reference"] = err;
    summary["kept_coefficients"] = out.kept_coefficients;
    summary["total_coefficients"] = out.total_coefficients;
    summary["boundary_warning"] = out.boundary_warning;
    summary["checks"] = json::array(
        {check_entry("norm_preserved", std::abs(out.psi.l2_norm() - 1.0) < 5e-3,
                     std::abs(out.psi.l2_norm() - 1.0))});
    return kExitOk;
}

int run_phase_space(const Scenario& sc, ArtifactSink& sink, json& summary) {
    const HamiltonianModel h = builtin_hamiltonian(sc.ham_name, sc.ham_param);
    const Window win = Window::standard(sc.hbar);
    const double orbit = sc.z0.norm();
    const int count = sc.grid_count > 0 ? sc.grid_count : 192;
    const GridAxis ax = sc.grid_extent > 0 ? GridAxis::symmetric(sc.grid_extent, count, "x")
                                           : default_ps_axis(sc.hbar, orbit, count, "x");
    const GridAxis ap = sc.grid_extent > 0 ? GridAxis::symmetric(sc.grid_extent, count, "p")
                                           : default_ps_axis(sc.hbar, orbit, count, "p");
    const PhaseSpaceField psi0 = ps_coherent(sc.z0, win, ax, ap);
    psi0.field.save(sink.path("psps_in.grid").string());
    sink.record("psps_in.grid");

    const UPhResult res = u_ph_propagate(h, psi0, sc.z0, sc.t_final, sc.dt, win);
    res.field.field.save(sink.path("psps_out.grid").string());
    sink.record("psps_out.grid");

    // commutation against the configuration-side propagator, both closed form
    const SqueezedState start = SqueezedState::coherent(sc.z0, sc.hbar);
    const PropagatorResult conf = propagate_coherent(h, start, sc.t_final, sc.dt);
    const PhaseSpaceField rhs = ps_from_state(conf.state_out, win, res.field.field.axis_x(),
                                              res.field.field.axis_p());
    const double rel = l2_distance(res.field.field, rhs.field) / rhs.field.l2_norm();
    const auto& audit = hwp_audit();
    summary["hwp_convention"] = audit.factor > 0 ? (audit.factor == 0.5 ? "+sigma/2" : "+sigma")
                                                 : (audit.factor == -0.5 ? "-sigma/2" : "-sigma");
    summary["audit_residuals"] = audit.residuals;
    summary["propa_residual"] = rel;
    summary["checks"] = json::array({check_entry("propa_commutation", rel <= 1e-3, rel)});
    return rel <= 1e-3 ? kExitOk : kExitNumerical;
}

int run_transform_audit(const Scenario&, ArtifactSink& sink, json& summary) {
    const auto& fm = fm_audit();
    const auto& hwp = hwp_audit();
    json fmj = {{"chosen", fm.chosen == FmForm::AsPrinted ? "as_printed" : "sum_inverse"},
                {"residual_chosen", fm.residual_chosen},
                {"residual_rejected", fm.residual_rejected},
                {"conclusive", fm.conclusive}};
    json hwpj = {{"hwp_convention", hwp.factor == 0.5    ? "+sigma/2"
                                    : hwp.factor == -0.5 ? "-sigma/2"
                                    : hwp.factor == 1.0  ? "+sigma"
                                                         : "-sigma"},
                 {"residuals", hwp.residuals},
                 {"conclusive", hwp.conclusive}};
    summary["fm_audit"] = fmj;
    summary["hwp_audit"] = hwpj;
    json out = {{"hwp_convention", hwpj["hwp_convention"]},
                {"residuals", {{"fm", fm.residual_chosen}, {"hwp", hwp.residual_chosen}}}};
    std::ofstream f(sink.path("audit.json"));
    f << out.dump(2) << "\n";
    f.close();
    sink.record("audit.json");
    return (fm.conclusive && hwp.conclusive) ? kExitOk : 1;
}

}  // namespace

int run_scenario(const std::string& config_path, std::ostream& log) {
    Scenario sc;
    try {
        sc = parse_scenario(config_path);
    } catch (const SchemaError& e) {
        log << "schema error: " << e.what() << "\n";
        return kExitSchema;
    }
    try {
        ArtifactSink sink(resolve_output_dir(sc.output_dir));
        json summary;
        summary["schema_version"] = 1;
        summary["version"] = kVersion;
        summary["mode"] = sc.mode;
        summary["seed"] = sc.seed;
        {
            const auto& fm = fm_audit();
            const auto& hwp = hwp_audit();
            summary["conventions"] = {
                {"fm_form", fm.chosen == FmForm::AsPrinted ? "as_printed" : "sum_inverse"},
                {"hwp_convention", hwp.factor == 0.5    ? "+sigma/2"
                                   : hwp.factor == -0.5 ? "-sigma/2"
                                   : hwp.factor == 1.0  ? "+sigma"
                                                        : "-sigma"}};
        }
        int rc = kExitOk;
        if (sc.mode == "coherent") rc = run_coherent(sc, sink, summary);
        else if (sc.mode == "hbar_sweep") rc = run_sweep_mode(sc, sink, summary);
        else if (sc.mode == "wigner") rc = run_wigner(sc, sink, summary);
        else if (sc.mode == "general") rc = run_general(sc, sink, summary);
        else if (sc.mode == "phase_space") rc = run_phase_space(sc, sink, summary);
        else if (sc.mode == "transform_audit") rc = run_transform_audit(sc, sink, summary);
        {
            std::ofstream out(sink.path("summary.json"));
            out << summary.dump(2) << "\n";
        }
        sink.record("summary.json");
        sink.finalize();
        log << "mode " << sc.mode << " finished, artifacts in " << sink.dir.string() << "\n";
        return rc;
    } catch (const DivergedError& e) {
        log << json{{"error", "diverged"}, {"what", e.what()}, {"last_valid_t", e.last_valid_t}}
               .dump() << "\n";
        return kExitNumerical;
    } catch (const NumericalError& e) {
        log << json{{"error", "numerical"}, {"what", e.what()}}.dump() << "\n";
        return kExitNumerical;
    } catch (const BoundaryWrapError& e) {
        log << json{{"error", "under_resolved"}, {"what", e.what()}}.dump() << "\n";
        return kExitNumerical;
    }
}

int run_sweep(const std::string& config_path, std::ostream& log) {
    // sweep is the hbar_sweep mode behind a dedicated subcommand
    Scenario sc;
    try {
        sc = parse_scenario(config_path);
    } catch (const SchemaError& e) {
        log << "schema error: " << e.what() << "\n";
        return kExitSchema;
    }
    if (sc.mode != "hbar_sweep") {
        log << "schema error: sweep requires mode hbar_sweep\n";
        return kExitSchema;
    }
    return run_scenario(config_path, log);
}

int run_selftest(const std::string& out_dir, std::ostream& log) {
    const bool force_fail = std::getenv("NEARBY_ORBIT_SELFTEST_FORCE_INCONCLUSIVE") != nullptr;
    ArtifactSink sink(resolve_output_dir(out_dir));
    json checks = json::array();
    auto add = [&checks](const std::string& name, bool pass, double residual) {
        checks.push_back(check_entry(name, pass, residual));
    };

    // closed-form spot checks
    const PhasePoint za(1.0, 0.0), zb(0.0, 1.0);
    add("sigma_antisymmetry", std::abs(symplectic_form(za, zb) + symplectic_form(zb, za)) == 0.0,
        std::abs(symplectic_form(za, zb) + symplectic_form(zb, za)));
    add("sigma_example", std::abs(symplectic_form(za, zb) + 1.0) == 0.0,
        std::abs(symplectic_form(za, zb) + 1.0));
    add("identity_symplectic", is_symplectic(Mat::Identity(2, 2)), symplectic_defect(Mat::Identity(2, 2)));
    add("j_symplectic", is_symplectic(symplectic_j(1)), symplectic_defect(symplectic_j(1)));
    {
        const SymplecticMatrix j(symplectic_j(1));
        const auto blk = block_decompose(j);
        add("block_j_free", blk.is_free && blk.b(0, 0) == 1.0, std::abs(blk.b(0, 0) - 1.0));
        const Mat mj = cayley_transform(j);
        add("cayley_j", (mj - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12,
            (mj - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff());
    }
    {
        const SqueezedState phi0 = SqueezedState::coherent(PhasePoint(0.0, 0.0), 1.0);
        const double v0 = std::abs(evaluate(phi0, 0.0) - std::pow(kPi, -0.25));
        add("coherent_peak_value", v0 < 1e-15, v0);
        const double w0 = std::abs(wigner(phi0, PhasePoint(0.0, 0.0)) - 1.0 / kPi);
        add("wigner_peak_value", w0 < 1e-15, w0);
        const double ov = std::abs(state_overlap(phi0, phi0) - 1.0);
        add("self_overlap", ov < 1e-12, ov);
    }
    {
        const Mat g = g_matrix(Mat::Constant(1, 1, 2.0), Mat::Constant(1, 1, 1.0));
        Mat expected(2, 2);
        expected << 2.5, 0.5, 0.5, 0.5;
        add("g_matrix_example", (g - expected).cwiseAbs().maxCoeff() < 1e-14,
            (g - expected).cwiseAbs().maxCoeff());
    }
    {
        const cplx fr = fresnel_sqrt(CMat::Constant(1, 1, cplx(0, 1)));
        const cplx want = std::polar(1.0, -kPi / 4.0);
        add("fresnel_branch", std::abs(fr - want) < 1e-14, std::abs(fr - want));
    }
    {
        std::mt19937_64 rng(7);
        const SymplecticMatrix s = random_symplectic(1, rng);
        const SiegelMatrix m = SiegelMatrix::standard(1);
        const SiegelMatrix am = alpha(SymplecticMatrix::identity(1), m);
        add("alpha_identity", (am.mat() - m.mat()).cwiseAbs().maxCoeff() < 1e-14,
            (am.mat() - m.mat()).cwiseAbs().maxCoeff());
        const SiegelMatrix am2 = alpha(s, m);
        add("alpha_preserves_siegel", am2.min_im_eigenvalue() > 0, -am2.min_im_eigenvalue());
    }
    {
        const HamiltonianModel h = harmonic_oscillator();
        const SqueezedState phi0 = SqueezedState::coherent(PhasePoint(1.0, 0.0), 0.5);
        const PropagatorResult r = propagate_coherent(h, phi0, 0.0, 1e-3);
        const double d = (r.state_out.center - phi0.center).norm() +
                         std::abs(r.state_out.phase - phi0.phase);
        add("propagate_t0_identity", d < 1e-12, d);
    }
    // quadrature smoke: closed-form Wigner against the integral oracle
    {
        const SqueezedState s1(PhasePoint(0.4, -0.3),
                               SiegelMatrix::from_xy(Mat::Constant(1, 1, 1.2), Mat::Constant(1, 1, -0.4)),
                               0.8);
        double res = 0.0;
        for (double zx : {-0.5, 0.3}) {
            const PhasePoint z(zx, 0.2);
            res = std::max(res, std::abs(wigner_moyal_quadrature(s1, s1, z) - wigner(s1, z)));
        }
        add("wigner_quadrature_smoke", res < 1e-6, res);
    }
    const auto& fm = fm_audit();
    const auto& hwp = hwp_audit();
    const bool fm_ok = fm.conclusive && !force_fail;
    const bool hwp_ok = hwp.conclusive && !force_fail;
    add("fm_audit_conclusive", fm_ok, fm.residual_chosen);
    add("hwp_audit_conclusive", hwp_ok, hwp.residual_chosen);

    bool all_pass = true;
    for (const auto& c : checks) all_pass = all_pass && c["pass"].get<bool>();

    json report;
    report["schema_version"] = 1;
    report["version"] = kVersion;
    report["conventions"] = {
        {"fm_form", fm.chosen == FmForm::AsPrinted ? "as_printed" : "sum_inverse"},
        {"hwp_convention", hwp.factor == 0.5    ? "+sigma/2"
                           : hwp.factor == -0.5 ? "-sigma/2"
                           : hwp.factor == 1.0  ? "+sigma"
                                                : "-sigma"},
        {"fm_residual", fm.residual_chosen},
        {"hwp_residual", hwp.residual_chosen}};
    report["checks"] = checks;
    report["pass"] = all_pass;
    {
        std::ofstream out(sink.path("selftest.json"));
        out << report.dump(2) << "\n";
    }
    sink.record("selftest.json");
    sink.finalize();
    log << (all_pass ? "selftest passed" : "selftest FAILED") << ", report in "
        << sink.dir.string() << "\n";
    return all_pass ? 0 : 1;
}

}  // namespace norbit
