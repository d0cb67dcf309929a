#ifndef PFSI_DIAGNOSTICS_HPP
#define PFSI_DIAGNOSTICS_HPP

#include "pfsi/core_state.hpp"

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace pfsi {

// One row of the diagnostics CSV. Cumulative entries are time integrals from 0.
struct DiagnosticsRecord {
    double t = 0;
    double mass = 0;
    double fluid_kinetic = 0;
    double internal = 0;
    double beam_kinetic = 0;
    double bending = 0;
    double dissipation_cum = 0;
    double work_cum = 0;
    double ln_eta = 0;
    double press_over_eta_cum = 0;
    double vert_kin_over_eta_cum = 0;
    double min_eta = 0;
    double max_eta = 0;
    double coupling_residual = 0;
    double clipped_mass_cum = 0;
    double penalty_impulse_cum = 0;
    double energy_residual = 0;
    double contact_residual = 0;

    double energy() const { return fluid_kinetic + internal + beam_kinetic + bending; }
    bool operator==(const DiagnosticsRecord&) const = default;
};

inline constexpr std::array<std::string_view, 18> diagnostics_columns = {
    "t",           "mass",          "fluid_kinetic",      "internal",
    "beam_kinetic", "bending",       "dissipation_cum",    "work_cum",
    "ln_eta",      "press_over_eta_cum", "vert_kin_over_eta_cum", "min_eta",
    "max_eta",     "coupling_residual", "clipped_mass_cum", "penalty_impulse_cum",
    "energy_residual", "contact_residual"};

std::array<double, 18> record_values(const DiagnosticsRecord& r);
DiagnosticsRecord record_from_values(const std::array<double, 18>& v);

// Snapshot functionals: mass, energies, ln eta, extrema. Cumulative fields and
// residuals are left at zero.
DiagnosticsRecord state_functionals(double t, const FluidState& fluid, const BeamState& beam,
                                    const PhysParams& phys, const SchemeParams& scheme, const GridSpec& grid);

// [E(t) + dissipation] - [E(0) + work]
double energy_residual(const DiagnosticsRecord& initial, const DiagnosticsRecord& now);

// Integrands of the contact inequality at one instant, over the region below
// the graph. 1/eta uses max(eta, eta_floor); every use of the floor is counted.
struct ContactSample {
    double t = 0;
    double force = 0;               // int F psi
    double press_over_eta = 0;      // int int rho^gamma psi / eta
    double vert_kin_over_eta = 0;   // int int rho u3^2 psi / eta
    double convective_time = 0;     // int int rho u3 z eta_t psi / eta^2
    double convective_shear = 0;    // int int rho u1 u3 W
    double viscous_shear = 0;       // -mu int int (d_z u1 + d_x u3) W
    double horizontal = 0;          // (lambda - 2mu/3) int int u1 (psi eta_x / eta^2 - psi_x / eta)
    double bending = 0;             // int eta_xx psi_xx
    double ln_eta = 0;              // int psi ln eta
    double boundary = 0;            // int int rho u3 z psi / eta + int eta_t psi

    // cap ingredients, meaningful for psi = 1
    double rho_gamma_norm = 0;      // ||rho||_gamma
    double u_p_sq = 0;              // ||u||_p^2, p = 2 gamma / (gamma - 2)
    double eta_t_over_eta_sq = 0;   // int int eta_t^2 / eta^2
    double sqrt_rho_u_4_sq = 0;     // ||sqrt(rho) u||_4^2
    double eta_x4_over_eta2 = 0;    // int eta_x^4 / eta^2 (on the beam)
    double eta_eta_x4 = 0;          // int eta eta_x^4 (on the beam)
    double stress = 0;              // int int S(grad u):grad u
    double eta_x_over_eta_sq = 0;   // int int eta_x^2 / eta^2
    double u1_over_eta_sq = 0;      // int int u1^2 / eta^2
    double boundary_cap = 0;        // sqrt(int int rho) sqrt(int int rho u3^2) + sqrt(L) ||eta_t||
    double abs_ln_eta = 0;          // int |ln eta|

    int floor_activations = 0;
};

ContactSample contact_sample(double t, const FluidState& fluid, const BeamState& beam, const Field1& force,
                             const Field1& psi, const PhysParams& phys, const SchemeParams& scheme,
                             const GridSpec& grid);

// The eight right-hand side groups: convective (time, shear, y), viscous
// shear (x, y), horizontal, initial ln eta, boundary-in-time. The y groups
// vanish in 2D.
struct TermBreakdown {
    double force_cum = 0;
    double press_over_eta_cum = 0;
    double vert_kin_over_eta_cum = 0;
    double ln_term = 0;  // -(4mu/3 + lambda) int psi ln eta(t)
    std::array<double, 8> groups{};
    std::array<double, 8> caps{};
    double bending_cum = 0;  // localized form only; zero for psi = 1
    bool caps_valid = false;
    int floor_activations = 0;

    double lhs() const { return force_cum + press_over_eta_cum + vert_kin_over_eta_cum + ln_term; }
    double rhs() const;
    double residual() const { return lhs() - rhs(); }
    // sum of the absolute values of every term on both sides
    double scale() const;
};

// Trapezoid accumulation of the time integrals; feed samples in time order.
class ContactAccumulator {
public:
    ContactAccumulator(const PhysParams& phys, bool unit_weight) : phys_(phys), unit_(unit_weight) {}
    void add(const ContactSample& s);
    TermBreakdown breakdown() const;
    bool empty() const { return !first_; }

private:
    PhysParams phys_;
    bool unit_;
    std::optional<ContactSample> first_, last_;
    // running time integrals
    double force_ = 0, press_ = 0, vert_ = 0, g1_ = 0, g2_ = 0, g4_ = 0, g6_ = 0, bend_ = 0;
    double u_p_sq_ = 0, eta_t_ = 0, rho_u_4_ = 0, stress_ = 0, eta_x_ = 0, u1_ = 0;
    // running suprema
    double rho_norm_sup_ = 0, eta_x4_sup_ = 0;
    int floors_ = 0;
};

// Single-run estimate C (dt_inner + dx + dz)(1 + T) with C = b.scale().
double contact_tolerance(const TermBreakdown& b, double dt_inner, double dx, double dz, double T);

// Sum over every term of |coarse - fine|, for a recomputation with all of
// dt_inner, dx, dz scaled down.
double term_difference(const TermBreakdown& coarse, const TermBreakdown& fine);

// C (dt_inner + dx + dz)(1 + T) with C fitted term-wise from a doubled
// resolution run: h = dt_inner + dx + dz of the coarse run, h_fine of the fine
// one. Equals h / (h - h_fine) * term_difference.
double refined_contact_tolerance(const TermBreakdown& coarse, const TermBreakdown& fine, double h, double h_fine);

struct PressureBoundCheck {
    bool pass = false;
    double integral = 0;  // int rho^gamma below the graph
    double bound = 0;     // m^gamma / (L max eta)^(gamma - 1), m the mass below the graph
    double margin = 0;
};

PressureBoundCheck pressure_lower_bound_check(const FluidState& fluid, const Field1& eta, const PhysParams& phys,
                                              const GridSpec& grid);

struct DetachmentBound {
    double value = 0;
    bool vacuous = false;  // non-positive denominator
};

DetachmentBound detachment_bound(double T, double m, double gamma, double L, double C_est, double F_total);

// C from a reference run: (int int rho^gamma/eta + int int F) / (1 + sqrt(T)).
double estimate_C(double press_over_eta_cum, double force_cum, double T);

// First time the series exceeds the threshold.
std::optional<double> detect_detachment(const std::vector<DiagnosticsRecord>& records, double threshold);
std::optional<double> detect_detachment(const std::vector<double>& t, const std::vector<double>& value,
                                        double threshold);

}  // namespace pfsi

#endif
