#ifndef PFSI_BEAM_SOLVER_HPP
#define PFSI_BEAM_SOLVER_HPP

#include "pfsi/core_state.hpp"

#include <vector>

namespace pfsi {

// Per-inner-step data seen by the structure over one window. Either vector may
// hold a single entry, which is then used for every step.
struct BeamForcing {
    std::vector<Field1> outer_F;
    std::vector<Field1> lagged_trace_v3;

    const Field1& force(int k) const { return outer_F.size() == 1 ? outer_F[0] : outer_F.at(k); }
    const Field1& trace(int k) const
    {
        return lagged_trace_v3.size() == 1 ? lagged_trace_v3[0] : lagged_trace_v3.at(k);
    }
};

struct SspWindowReport {
    double start_kinetic = 0, start_bending = 0;
    double end_kinetic = 0, end_bending = 0;
    double coupling_dissipation = 0;  // eps/(2 Dt) int int |eta_t - Tv|^2
    double self_dissipation = 0;      // eps/(2 Dt) int int |eta_t|^2
    double trace_source = 0;          // eps/(2 Dt) int int |Tv|^2
    double visco_dissipation = 0;     // eps int int |d_x eta_t|^2
    double penalty_dissipation = 0;   // -int int P eta_t
    double numerical_dissipation = 0; // backward-Euler damping, reported only
    double work = 0;                  // int int F eta_t
    double penalty_impulse = 0;       // int int P
    double min_eta = 0;
    double max_undershoot = 0;        // max(delta - eta, 0) over the window
    int penalty_sign_violations = 0;
    int penalty_power_violations = 0;
    int active_set_iterations = 0;
    std::vector<Field1> eta_t_steps;  // eta_t after each inner step

    double start_energy() const { return start_kinetic + start_bending; }
    double end_energy() const { return end_kinetic + end_bending; }
};

struct EnergyCheck {
    bool pass = false;
    double residual = 0;
};

// (1/kappa) (eta_t)^- where eta < delta.
Field1 contact_penalty(const Field1& eta, const Field1& eta_t, double delta, double kappa);

double beam_kinetic_energy(const BeamState& beam, double eps, double dx);
double beam_bending_energy(const BeamState& beam, double dx);

// Advances the structure over window_steps inner steps of size dt_inner.
std::pair<BeamState, SspWindowReport> step_ssp(const BeamState& beam, const BeamForcing& forcing,
                                               const PhysParams& phys, const SchemeParams& scheme,
                                               int window_steps, double dx);

EnergyCheck check_ssp_energy(const SspWindowReport& report, double tol);

}  // namespace pfsi

#endif
