#ifndef PFSI_SCENARIOS_HPP
#define PFSI_SCENARIOS_HPP

#include "pfsi/core_state.hpp"

#include <string>

namespace pfsi {

// sigma (1/kappa^2)(kappa - |x - x0|)_+ with periodic distance; integrates to sigma.
Field1 hat_force(const GridSpec& grid, double x0, double kappa, double sigma);

// sigma^2 = (alpha+1)^2 (alpha+2)^2 / (2 C^2 kappa^alpha)
double sigma_for_kappa(double kappa, double alpha = 0.25, double C_holder = 1.0);

// m^gamma / (L^(gamma-1) H^gamma): total downward force below which contact
// is guaranteed to break for a graph bounded by H.
double theorem2_threshold(double m, double gamma, double L, double H);

struct InitialData {
    BeamState beam;
    FluidState fluid;
};

// Beam h_max (1 - cos(2 pi (x - x0)/L))/2 + delta at rest, fluid of mass
// m_target spread uniformly below it (cut cells hold their area share).
InitialData build_contact_initial_data(const GridSpec& grid, double h_max, double x0, double m_target,
                                       double delta);

struct InitialChecklist {
    bool eta_above_delta = false;
    bool rho_nonnegative = false;
    bool mass_matches = false;
    bool ln_finite = false;
    bool momentum_zero_in_vacuum = false;
    double ln_integral = 0;  // int ln(eta0 - delta + floor)

    bool ok() const
    {
        return eta_above_delta && rho_nonnegative && mass_matches && ln_finite && momentum_zero_in_vacuum;
    }
};

InitialChecklist check_initial_data(const InitialData& d, double m_target, double delta, double eta_floor,
                                    const GridSpec& grid);

enum class ForceKind { none, uniform, decaying, hat };

// Outer force on the beam. uniform: total/L; decaying: amplitude exp(-rate t);
// hat: hat_force(x0, kappa, sigma).
struct ForceSpec {
    ForceKind kind = ForceKind::none;
    double total = 0;
    double amplitude = 0;
    double rate = 0;
    double x0 = 0;
    double kappa = 0;
    double sigma = 0;

    Field1 at(double t, const GridSpec& grid) const;
    bool time_dependent() const { return kind == ForceKind::decaying; }
};

struct Scenario {
    std::string id;
    InitialData init;
    ForceSpec force;
    double v0 = 0;               // initial beam velocity, also the lagged trace of window 0
    int probe_index = 0;         // cell of the contact point x0
    double threshold = 0;        // detachment threshold
    bool guarantee = true;       // inside the hypotheses of the theorem it reproduces
    std::string tag;
    double mass = 0;
    bool detect_at_probe = false;  // detachment measured at x0 instead of min over x
};

// Flat beam at h over a uniform density filling the whole domain, at rest.
Scenario equilibrium_scenario(const GridSpec& grid, double h, double rho);

enum class Theorem2Variant { decaying_force, constant_force };

struct ContactParams {
    double h_max = 0.15;
    double mass = 0.02;
    double delta = 0.01;
    double H = 0;  // graph bound in the force threshold; 0 means M/2
};

Scenario theorem2_scenario(const GridSpec& grid, const ContactParams& p, Theorem2Variant variant,
                           double force_value, double decay_rate, double gamma);

Scenario theorem3_scenario(const GridSpec& grid, const ContactParams& p, double kappa, double alpha = 0.25,
                           double C_holder = 1.0);

// Scenario selection as read from a config file.
struct ScenarioConfig {
    std::string id = "theorem2";  // equilibrium | theorem2 | theorem3
    std::string variant = "decaying_force";  // theorem2 only
    ContactParams contact;
    double force = 0;        // theorem2: amplitude (decaying) or total force (constant)
    double decay_rate = 1;   // theorem2 decaying
    double kappa = 0.1;      // theorem3
    double alpha = 0.25;
    double C_holder = 1;
    double eq_height = 0.25; // equilibrium
    double eq_density = 0.5;
    double v0 = 0;
};

Scenario make_scenario(const ScenarioConfig& c, const GridSpec& grid, const PhysParams& phys);

// Cell centre closest to L/2; contact scenarios touch down there.
int contact_index(const GridSpec& grid);

}  // namespace pfsi

#endif
