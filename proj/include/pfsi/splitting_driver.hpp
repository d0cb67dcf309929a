#ifndef PFSI_SPLITTING_DRIVER_HPP
#define PFSI_SPLITTING_DRIVER_HPP

#include "pfsi/beam_solver.hpp"
#include "pfsi/diagnostics.hpp"
#include "pfsi/fluid_solver.hpp"
#include "pfsi/scenarios.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pfsi {

struct SimulationConfig {
    GridSpec grid;
    PhysParams phys;
    SchemeParams scheme;
    ScenarioConfig scenario;
    double T = 5.0;
    int output_every = 1;       // windows between diagnostics records
    int checkpoint_every = 0;   // windows between in-memory checkpoints; 0 keeps none
    bool stop_on_detachment = false;
    double energy_window_tol = 1e-8;  // per-window ledger tolerance, relative to E(0)
    std::uint64_t seed = 42;    // lemma suite sampling only

    int windows() const;  // N = T / dt_window
    void validate() const;
};

struct WindowReports {
    SspWindowReport ssp;
    FspWindowReport fsp;
};

struct WindowResult {
    BeamState beam;
    FluidState fluid;
    WindowReports reports;
};

// SSP with the lagged trace, then FSP with the new structure velocity.
// `force` holds one field or one per inner step.
WindowResult run_window(int n, const FluidState& fluid, const BeamState& beam,
                        const std::vector<Field1>& lagged_trace, const std::vector<Field1>& force,
                        const SimulationConfig& cfg);

struct Checkpoint {
    int window = 0;
    double t = 0;
    BeamState beam;
    FluidState fluid;
    std::optional<WindowReports> reports;  // of the window ending here
};

struct PenaltyStats {
    int sign_violations = 0;
    int power_violations = 0;
    double max_undershoot = 0;
    double min_eta = 0;
};

struct Trajectory {
    std::string scenario_id;
    std::string tag;
    bool guarantee = true;
    std::vector<DiagnosticsRecord> records;
    std::vector<double> probe_eta;  // eta(t, x0) at record times
    std::vector<PressureBoundCheck> pressure;
    std::vector<TermBreakdown> contact;  // at record times, unit weight
    std::vector<Checkpoint> checkpoints;
    double threshold = 0;
    bool detect_at_probe = false;
    int windows_run = 0;
    int window_energy_failures = 0;
    double max_window_energy_residual = 0;
    int max_cg_iterations = 0;
    PenaltyStats penalty;
    bool aborted = false;
    std::string abort_message;

    std::optional<double> detachment_time() const;
};

// Runs the scenario of cfg. Instability or ||eta||_inf > M/2 ends the run
// early with `aborted` set; everything up to the failing window is kept.
Trajectory run_simulation(const SimulationConfig& cfg);
Trajectory run_simulation(const SimulationConfig& cfg, const Scenario& scenario);

}  // namespace pfsi

#endif
