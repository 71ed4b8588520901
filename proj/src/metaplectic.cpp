#include "norbit/metaplectic.hpp"

#include <cmath>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace norbit {

namespace {
constexpr double kPi = std::numbers::pi;

cplx det_a_plus_bm(const Mat& s_full, const CMat& m) {
    const int n = static_cast<int>(m.rows());
    const CMat a = s_full.topLeftCorner(n, n).cast<cplx>();
    const CMat b = s_full.topRightCorner(n, n).cast<cplx>();
    return (a + b * m).determinant();
}
}  // namespace

SiegelMatrix alpha(const SymplecticMatrix& s, const SiegelMatrix& m) {
    const int n = m.n();
    if (s.n() != n) throw DimensionMismatchError("alpha: dimension mismatch");
    const CMat abm = s.block_a().cast<cplx>() + s.block_b().cast<cplx>() * m.mat();
    const double scale = std::max(1.0, abm.cwiseAbs().maxCoeff());
    if (std::abs(abm.determinant()) < 1e-12 * std::pow(scale, n))
        throw NumericalError("alpha: det(A + BM) numerically singular");
    const CMat cdm = s.block_c().cast<cplx>() + s.block_d().cast<cplx>() * m.mat();
    CMat out = cdm * abm.inverse();
    out = 0.5 * (out + out.transpose());
    return SiegelMatrix(out, 1e-8);
}

MetaplecticElement::MetaplecticElement(SymplecticMatrix s, std::vector<Mat> samples,
                                       std::function<Mat(double)> generator)
    : s_(std::move(s)), samples_(std::move(samples)), generator_(std::move(generator)) {
    // record the branch data for det(A_t + i B_t)
    const int n = s_.n();
    const CMat im = cplx(0, 1) * CMat::Identity(n, n);
    branch_.total_arg = tracked_det_arg(im);
    const cplx d_end = det_a_plus_bm(s_.mat(), im);
    branch_.sqrt_det_aib = std::sqrt(std::abs(d_end)) * std::exp(cplx(0, 0.5 * branch_.total_arg));
    branch_.steps = static_cast<int>(samples_.size()) - 1;
    branch_.winding = static_cast<int>(std::floor(branch_.total_arg / (2.0 * kPi)));
}

MetaplecticElement MetaplecticElement::from_matrix(const SymplecticMatrix& s) {
    const int dim = 2 * s.n();
    const Mat ssq = s.mat() * s.mat().transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(ssq);
    const Mat sqrt_ssq = es.operatorSqrt();
    const Mat log_p = [&] {
        Mat l = Mat::Zero(dim, dim);
        for (int i = 0; i < dim; ++i)
            l += 0.5 * std::log(es.eigenvalues()(i)) * es.eigenvectors().col(i) *
                 es.eigenvectors().col(i).transpose();
        return l;
    }();
    const Mat o = sqrt_ssq.inverse() * s.mat();
    // orthogonal symplectic block structure O = [[A, B], [-B, A]] <-> unitary A + iB
    const int n = s.n();
    const CMat u = o.topLeftCorner(n, n).cast<cplx>() + cplx(0, 1) * o.topRightCorner(n, n).cast<cplx>();
    Eigen::ComplexEigenSolver<CMat> ues(u);
    const CMat v = ues.eigenvectors();
    const CMat v_inv = v.inverse();
    Vec angles(n);
    for (int i = 0; i < n; ++i) angles(i) = std::arg(ues.eigenvalues()(i));

    auto path_at = [=](double t) -> Mat {
        Mat pt = Mat::Zero(dim, dim);
        for (int i = 0; i < dim; ++i)
            pt += std::exp(t * 0.5 * std::log(es.eigenvalues()(i))) * es.eigenvectors().col(i) *
                  es.eigenvectors().col(i).transpose();
        CVec lam(n);
        for (int i = 0; i < n; ++i) lam(i) = std::polar(1.0, t * angles(i));
        const CMat ut = v * lam.asDiagonal() * v_inv;
        Mat ot(dim, dim);
        ot.topLeftCorner(n, n) = ut.real();
        ot.topRightCorner(n, n) = ut.imag();
        ot.bottomLeftCorner(n, n) = -ut.imag();
        ot.bottomRightCorner(n, n) = ut.real();
        return pt * ot;
    };

    const double speed = angles.cwiseAbs().maxCoeff() + log_p.cwiseAbs().maxCoeff() * dim;
    int steps = std::max(32, static_cast<int>(std::ceil(speed / (kPi / 8.0))) * 4);
    std::vector<Mat> samples;
    const CMat im = cplx(0, 1) * CMat::Identity(n, n);
    while (true) {
        samples.clear();
        samples.reserve(steps + 1);
        for (int k = 0; k <= steps; ++k) samples.push_back(path_at(double(k) / steps));
        samples.back() = s.mat();  // exact endpoint
        // per-step argument change of det(A_t + i B_t) stays below pi/4
        bool fine = true;
        cplx prev = det_a_plus_bm(samples.front(), im);
        for (size_t k = 1; k < samples.size() && fine; ++k) {
            const cplx d = det_a_plus_bm(samples[k], im);
            fine = std::abs(std::arg(d / prev)) < kPi / 4.0;
            prev = d;
        }
        if (fine || steps >= 16384) break;
        steps *= 2;
    }
    return MetaplecticElement(s, std::move(samples), path_at);
}

MetaplecticElement MetaplecticElement::from_path(std::vector<Mat> samples) {
    if (samples.size() < 2) throw std::invalid_argument("from_path: need at least two samples");
    const int dim = static_cast<int>(samples.front().rows());
    if ((samples.front() - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("from_path: path must start at the identity");
    SymplecticMatrix s(samples.back(), 1e-6);
    return MetaplecticElement(std::move(s), std::move(samples), nullptr);
}

double MetaplecticElement::tracked_det_arg(const CMat& m) const {
    double total = 0.0;
    cplx d_prev = det_a_plus_bm(samples_.front(), m);
    if (std::abs(d_prev) < 1e-300)
        throw NumericalError("branch tracking: det(A + BM) vanished at path start");

    std::function<void(const Mat&, const Mat&, double, double, int)> walk =
        [&](const Mat& s0, const Mat& s1, double t0, double t1, int depth) {
            const cplx d1 = det_a_plus_bm(s1, m);
            if (std::abs(d1) < 1e-300)
                throw NumericalError("branch tracking: det(A + BM) vanished");
            const double step = std::arg(d1 / d_prev);
            if (std::abs(step) < 0.5 * kPi) {
                total += step;
                d_prev = d1;
                return;
            }
            if (depth > 40)
                throw NumericalError("branch tracking: cannot resolve branch continuity");
            const double tm = 0.5 * (t0 + t1);
            const Mat mid = generator_ ? generator_(tm) : Mat(0.5 * (s0 + s1));
            walk(s0, mid, t0, tm, depth + 1);
            walk(mid, s1, tm, t1, depth + 1);
        };

    const int segs = static_cast<int>(samples_.size()) - 1;
    for (int k = 0; k < segs; ++k)
        walk(samples_[k], samples_[k + 1], double(k) / segs, double(k + 1) / segs, 0);
    return total;
}

cplx MetaplecticElement::unit_phase_for(const SiegelMatrix& m) const {
    return std::exp(cplx(0, -0.5 * tracked_det_arg(m.mat())));
}

SqueezedState apply_to_gaussian(const MetaplecticElement& elem, const SqueezedState& state) {
    const SiegelMatrix m_out = alpha(elem.s(), state.m);
    const PhasePoint z_out = elem.s().apply(state.center);
    const cplx c = elem.unit_phase_for(state.m);
    return SqueezedState(z_out, m_out, state.hbar, state.phase * c);
}

std::vector<double> tracked_det_arg_path(const std::vector<Mat>& samples, const CMat& m) {
    std::vector<double> prefix;
    prefix.reserve(samples.size());
    prefix.push_back(0.0);
    double total = 0.0;
    cplx d_prev = det_a_plus_bm(samples.front(), m);

    std::function<void(const Mat&, const Mat&, int)> walk = [&](const Mat& s0, const Mat& s1,
                                                                int depth) {
        const cplx d1 = det_a_plus_bm(s1, m);
        if (std::abs(d1) < 1e-300) throw NumericalError("branch tracking: det(A + BM) vanished");
        const double step = std::arg(d1 / d_prev);
        if (std::abs(step) < 0.5 * kPi) {
            total += step;
            d_prev = d1;
            return;
        }
        if (depth > 40) throw NumericalError("branch tracking: cannot resolve branch continuity");
        const Mat mid = 0.5 * (s0 + s1);
        walk(s0, mid, depth + 1);
        walk(mid, s1, depth + 1);
    };
    for (size_t k = 0; k + 1 < samples.size(); ++k) {
        walk(samples[k], samples[k + 1], 0);
        prefix.push_back(total);
    }
    return prefix;
}

int maslov_compose(const GeneratingFunction& w, const GeneratingFunction& wp,
                   double degenerate_tol) {
    const Mat sum = wp.p + w.q;
    Eigen::SelfAdjointEigenSolver<Mat> es(sum);
    int inert = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double lam = es.eigenvalues()(i);
        if (std::abs(lam) < degenerate_tol)
            throw DegenerateIndexError("maslov_compose: P' + Q has a near-zero eigenvalue");
        if (lam < 0) ++inert;
    }
    return ((w.m + wp.m - inert) % 4 + 4) % 4;
}

namespace {

struct ChirpSum {
    // sum over j of exp(i (a j^2 + b j + c)) for j = 0..n-1 using multiply
    // recurrences; resynced periodically against accumulated roundoff.
    static cplx run(double a, double b, double c, int n, const cplx* weights = nullptr) {
        cplx acc = 0.0;
        cplx u = std::polar(1.0, c);
        cplx v = std::polar(1.0, a + b);
        const cplx w = std::polar(1.0, 2.0 * a);
        for (int j = 0; j < n; ++j) {
            acc += weights ? weights[j] * u : u;
            if ((j & 1023) == 1023) {
                const double ph = a * double(j + 1) * double(j + 1) + b * (j + 1) + c;
                u = std::polar(1.0, ph);
                v = std::polar(1.0, a * (2.0 * (j + 1) + 1.0) + b);
            } else {
                u *= v;
                v *= w;
            }
        }
        return acc;
    }
};

}  // namespace

WeylApplyResult weyl_apply(const SymplecticMatrix& s, const GridField1D& psi, double hbar,
                           WeylQuadSpec spec) {
    if (s.n() != 1) throw DimensionMismatchError("weyl_apply: n = 1 grids only");
    if (hbar <= 0) throw std::invalid_argument("weyl_apply: hbar must be positive");
    const Mat smi = s.mat() - Mat::Identity(2, 2);
    const double dsmi = smi.determinant();
    if (std::abs(dsmi) < 1e-10) throw SingularSMinusIError("weyl_apply: det(S - I) ~ 0");
    const Mat ms = cayley_transform(s);
    const double mxx = ms(0, 0), mxp = ms(0, 1), mpp = ms(1, 1);

    const GridAxis& ax = psi.axis();
    const double xmax = std::max(std::abs(ax.origin), std::abs(ax.upper()));
    const double x0max = 2.0 * xmax;

    // moment estimates of the input state feed the box sizing
    double nrm2 = 0, mux = 0;
    for (int i = 0; i < ax.count; ++i) {
        const double w = std::norm(psi.values()(i));
        nrm2 += w;
        mux += w * ax.coord(i);
    }
    mux = nrm2 > 0 ? mux / nrm2 : 0.0;
    double varx = 0;
    for (int i = 0; i < ax.count; ++i)
        varx += std::norm(psi.values()(i)) * (ax.coord(i) - mux) * (ax.coord(i) - mux);
    varx = nrm2 > 0 ? varx / nrm2 : hbar / 2;
    double mup = 0, p2 = 0;
    for (int i = 1; i + 1 < ax.count; ++i) {
        const cplx dpsi = (psi.values()(i + 1) - psi.values()(i - 1)) / (2.0 * ax.spacing);
        mup += std::imag(std::conj(psi.values()(i)) * dpsi) * hbar;
        p2 += std::norm(dpsi) * hbar * hbar;
    }
    mup = nrm2 > 0 ? mup / nrm2 : 0.0;
    p2 = nrm2 > 0 ? p2 / nrm2 : hbar / 2;
    const double sigp = std::sqrt(std::max(p2 - mup * mup, hbar / 4));

    if (spec.auto_sized) {
        const double x_eff = hbar / (2.0 * std::max(varx, 1e-12));
        const double beta = mxp - 0.5;
        const double rate = x_eff * beta * beta / (2.0 * hbar * (x_eff * x_eff + mxx * mxx));
        // the outer 30% of the box is tapered, so the decay target applies at 0.7 P
        const double p_decay = std::sqrt(std::log(1e9) / std::max(rate, 1e-9)) / 0.7;
        spec.p0_half = std::min(p_decay + std::abs(mup) + 4.0 * sigp, 80.0 * std::sqrt(hbar) + 10.0);
        const double grad_p = (std::abs(mxp) * x0max + std::abs(mpp) * spec.p0_half + xmax +
                               0.5 * x0max) / hbar;
        const double dp = (kPi / 4.0) * 0.5 / std::max(grad_p, 1e-12);
        spec.np0 = std::max(64, static_cast<int>(std::ceil(2.0 * spec.p0_half / dp)) + 1);
    }
    WeylApplyResult out;
    long total_pts = static_cast<long>(spec.np0) * ax.count;
    if (total_pts > spec.max_points) {
        spec.np0 = static_cast<int>(spec.max_points / std::max(ax.count, 1));
        out.under_resolved = true;
    }
    const double dp0 = 2.0 * spec.p0_half / (spec.np0 - 1);
    const double pmin = -spec.p0_half;

    // aliasing check on the z0 lattice: the per-cell phase increment over the
    // region where the integrand envelope is non-negligible must stay below pi
    const double x0_eff = xmax + std::abs(mux) + 8.0 * std::sqrt(varx);
    const double grad_p_eff =
        (std::abs(mxp) * x0_eff + std::abs(mpp) * spec.p0_half + xmax + 0.5 * x0_eff) / hbar;
    const double grad_x_eff =
        (std::abs(mxx) * x0_eff + (std::abs(mxp) + 0.5) * spec.p0_half + std::abs(mup) +
         3.0 * sigp) / hbar;
    if (grad_p_eff * dp0 > kPi || grad_x_eff * ax.spacing > kPi) out.under_resolved = true;

    const int stride = std::max(1, spec.output_stride);
    const int nout = (ax.count + stride - 1) / stride;
    GridAxis oax{ax.origin, ax.spacing * stride, nout, ax.role};

    // a smooth roll-off over the outer 30% of the p0 box suppresses the edge
    // ringing of the flat-envelope chirp; the box is sized so the integrand's
    // effective momentum marginal has already decayed where the taper acts
    std::vector<cplx> taper(spec.np0);
    for (int j = 0; j < spec.np0; ++j) {
        const double frac = std::abs(pmin + j * dp0) / spec.p0_half;
        taper[j] = frac <= 0.7 ? 1.0
                               : std::pow(std::cos(0.5 * kPi * (frac - 0.7) / 0.3), 2);
    }

    auto quadrature = [&](const CVec& values) {
        CVec res(nout);
        const double pref = dp0 * ax.spacing / (2.0 * kPi * hbar * std::sqrt(std::abs(dsmi)));
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int oi = 0; oi < nout; ++oi) {
            const double x = oax.coord(oi);
            cplx acc = 0.0;
            for (int mI = 0; mI < ax.count; ++mI) {
                const cplx w = values(mI);
                if (std::abs(w) < 1e-14) continue;
                const double x0 = x - ax.coord(mI);
                // phase(p0) = A p0^2 + B p0 + C
                const double a_coef = 0.5 * mpp / hbar;
                const double b_coef = (mxp * x0 + x - 0.5 * x0) / hbar;
                const double c_coef = 0.5 * mxx * x0 * x0 / hbar;
                const double aj = a_coef * dp0 * dp0;
                const double bj = (2.0 * a_coef * pmin + b_coef) * dp0;
                const double cj = a_coef * pmin * pmin + b_coef * pmin + c_coef;
                acc += w * ChirpSum::run(aj, bj, cj, spec.np0, taper.data());
            }
            res(oi) = acc * pref;
        }
        return res;
    };

    out.field = GridField1D(oax, quadrature(psi.values()));

    // probe inference: standard coherent state against the branch-tracked route
    const SqueezedState probe = SqueezedState::coherent(PhasePoint(0.0, 0.0), hbar);
    const GridField1D probe_grid = sample_on_grid(probe, ax);
    const bool input_is_probe = (probe_grid.values() - psi.values()).cwiseAbs().maxCoeff() < 1e-12;
    const CVec probe_quad = input_is_probe ? out.field.values() : quadrature(probe_grid.values());
    const GridField1D probe_field(oax, probe_quad);

    const auto elem = MetaplecticElement::from_matrix(s);
    const SqueezedState target_state = apply_to_gaussian(elem, probe);
    const GridField1D target = sample_on_grid(target_state, oax);

    const cplx num = inner_product(target, probe_field);
    const double den = std::pow(probe_field.l2_norm(), 2);
    out.inferred_phase = num / den;
    int best_k = 0;
    double best = 1e9;
    for (int k = 0; k < 4; ++k) {
        const cplx ik = std::pow(cplx(0, 1), k);
        const double d = std::abs(out.inferred_phase - ik);
        if (d < best) {
            best = d;
            best_k = k;
        }
    }
    out.power_of_i = best_k;
    out.phase_defect = best;
    GridField1D aligned = probe_field;
    aligned.values() *= out.inferred_phase;
    out.probe_mismatch = l2_distance(aligned, target) / target.l2_norm();
    out.p0_half = spec.p0_half;
    out.np0 = spec.np0;
    if (out.phase_defect > 1e-3 && !out.under_resolved)
        throw NumericalError("weyl_apply: inferred phase is not an integer power of i");
    return out;
}

}  // namespace norbit
