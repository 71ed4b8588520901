#pragma once

#include <map>
#include <variant>

#include "norbit/metaplectic.hpp"
#include "norbit/orbit.hpp"

namespace norbit {

/// Window of the wave-packet transform: closed forms need a Gaussian window,
/// sampled windows go through quadrature only.
struct Window {
    std::variant<SqueezedState, GridField1D> w;
    double hbar;

    static Window standard(double hbar);
    bool is_gaussian() const { return std::holds_alternative<SqueezedState>(w); }
    const SqueezedState& gaussian() const { return std::get<SqueezedState>(w); }
    cplx value(double x) const;
    double norm() const;
};

struct PhaseSpaceField {
    GridField2D field;
    double hbar = 1.0;
};

/// Sign/scale candidates for the phase-space translation phase
/// exp(i factor sigma(z0, z) / hbar).
struct HwpAudit {
    double factor = 0.5;  // selected candidate
    std::map<std::string, double> residuals;
    double residual_chosen = 0.0;
    bool conclusive = false;
};

/// One-time selection of the translation convention that satisfies the
/// intertwining identity with the wave-packet transform on Gaussian probes.
const HwpAudit& hwp_audit();

/// Quadrature wave-packet transform of a sampled state.
PhaseSpaceField wavepacket_transform(const GridField1D& psi, const Window& window,
                                     const GridAxis& ax, const GridAxis& ap);

/// Closed-form wave-packet transform of a squeezed state (Gaussian window).
PhaseSpaceField wavepacket_transform(const SqueezedState& psi, const Window& window,
                                     const GridAxis& ax, const GridAxis& ap);

/// Adjoint transform back to configuration space (quadrature).
GridField1D wavepacket_adjoint(const PhaseSpaceField& psi_ph, const Window& window,
                               const GridAxis& x_axis);

enum class ShiftMode { Spectral, Snap };

struct TphInfo {
    bool off_lattice = false;  // Snap mode moved the requested center
    double snap_dx = 0.0, snap_dp = 0.0;
};

/// Phase-space translation: audited phase times a shift of the field.
/// Spectral mode translates by fractional cells through the FFT; Snap mode
/// rounds to the lattice and reports the displacement.
PhaseSpaceField t_ph(const PhasePoint& z0, const PhaseSpaceField& psi,
                     ShiftMode mode = ShiftMode::Spectral, TphInfo* info = nullptr);

struct SPhQuadSpec {
    int output_stride = 2;
    long max_points = 2000000000L;
};

struct SPhResult {
    PhaseSpaceField field;    // quadrature output, no i^nu factor
    cplx inferred_phase;      // multiply by this to match the branch-tracked lift
    int power_of_i = 0;
    double phase_defect = 0.0;
    double probe_mismatch = 0.0;
    bool under_resolved = false;
};

/// Phase-space Weyl-integral realization of a metaplectic operator:
/// (2 pi hbar)^-n |det(S-I)|^-1/2 int exp(i M_S z0^2/2 hbar) T_ph(z0) Psi d z0
/// by direct kernel quadrature over the field's own lattice. The unit phase is
/// inferred from a phase-space coherent probe (Gaussian window required).
SPhResult s_ph_apply(const SymplecticMatrix& s, const PhaseSpaceField& psi, const Window& window,
                     const MetaplecticElement* lift = nullptr, SPhQuadSpec spec = {});

/// Phase-space coherent state U_w(phi_{z0}) in closed form (Gaussian window).
PhaseSpaceField ps_coherent(const PhasePoint& z0, const Window& window, const GridAxis& ax,
                            const GridAxis& ap);
PhaseSpaceField ps_from_state(const SqueezedState& s, const Window& window, const GridAxis& ax,
                              const GridAxis& ap);

/// Resolution of the identity over a coherent lattice; reproduces members of
/// the transform's range and annihilates their orthogonal complement.
PhaseSpaceField ps_reconstruct(const PhaseSpaceField& psi, const Window& window,
                               const PhaseSpaceLattice& lattice);

struct UPhResult {
    PhaseSpaceField field;
    double gamma = 0.0;
    PhasePoint center_out;
    SPhResult s_ph_diag;
    bool metaplectic_skipped = false;   // S_T within tolerance of the identity
    double membership_defect = 0.0;     // projection defect of the input field
};

/// Nearby-orbit propagator on phase space:
/// exp(i gamma/hbar) T_ph(f_t(z0)) (S_t(z0))_ph T_ph(z0)^-1.
UPhResult u_ph_propagate(const HamiltonianModel& h, const PhaseSpaceField& psi0,
                         const PhasePoint& z0, double t_final, double dt, const Window& window,
                         SPhQuadSpec spec = {});

/// Default phase-space box: half-width max(6 sqrt(hbar), 2 orbit radius).
GridAxis default_ps_axis(double hbar, double orbit_radius, int count = 256,
                         const std::string& role = "x");

}  // namespace norbit
