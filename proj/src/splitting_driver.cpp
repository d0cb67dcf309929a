#include "pfsi/splitting_driver.hpp"

#include <cmath>
#include <sstream>

namespace pfsi {

int SimulationConfig::windows() const
{
    return static_cast<int>(std::lround(T / scheme.dt_window));
}

void SimulationConfig::validate() const
{
    grid.validate();
    phys.validate();
    scheme.validate();
    if (!(T >= 0))
        throw InputError("[output] T must be non-negative");
    const double N = T / scheme.dt_window;
    if (std::abs(N - std::round(N)) > 1e-9 * std::max(1.0, N))
        throw InputError("[output] T must be an integer multiple of dt_window");
    if (output_every < 1)
        throw InputError("[output] output_every must be at least 1");
    if (checkpoint_every < 0)
        throw InputError("[output] checkpoint_every must be non-negative");
}

WindowResult run_window(int n, const FluidState& fluid, const BeamState& beam,
                        const std::vector<Field1>& lagged_trace, const std::vector<Field1>& force,
                        const SimulationConfig& cfg)
{
    (void)n;
    const int steps = cfg.scheme.window_steps();
    BeamForcing bf{force, lagged_trace};
    auto [nb, sr] = step_ssp(beam, bf, cfg.phys, cfg.scheme, steps, cfg.grid.dx());
    auto [nf, fr] = step_fsp(fluid, nb.eta, sr.eta_t_steps, cfg.scheme, cfg.phys, cfg.grid, steps);
    return {std::move(nb), std::move(nf), {std::move(sr), std::move(fr)}};
}

std::optional<double> Trajectory::detachment_time() const
{
    if (detect_at_probe) {
        std::vector<double> t;
        for (const auto& r : records)
            t.push_back(r.t);
        return detect_detachment(t, probe_eta, threshold);
    }
    return detect_detachment(records, threshold);
}

Trajectory run_simulation(const SimulationConfig& cfg)
{
    cfg.validate();
    return run_simulation(cfg, make_scenario(cfg.scenario, cfg.grid, cfg.phys));
}

Trajectory run_simulation(const SimulationConfig& cfg, const Scenario& sc)
{
    cfg.validate();
    const GridSpec& g = cfg.grid;
    const SchemeParams& s = cfg.scheme;
    const int N = cfg.windows();
    const int steps = s.window_steps();
    const double dtw = s.dt_window;

    const InitialChecklist check = check_initial_data(sc.init, sc.mass, s.delta, s.eta_floor, g);
    if (!check.ok())
        throw InputError("initial data of scenario '" + sc.id + "' fails the admissibility checklist");

    Trajectory tr;
    tr.scenario_id = sc.id;
    tr.tag = sc.tag;
    tr.guarantee = sc.guarantee;
    tr.threshold = sc.threshold;
    tr.detect_at_probe = sc.detect_at_probe;

    BeamState beam = sc.init.beam;
    FluidState fluid = sc.init.fluid;
    const Field1 unit = Field1::Ones(g.nx);
    ContactAccumulator contact(cfg.phys, true);

    const DiagnosticsRecord initial = state_functionals(0.0, fluid, beam, cfg.phys, s, g);
    const double e_scale = std::max(std::abs(initial.energy()), 1e-300);
    DiagnosticsRecord cum;  // carries the cumulative fields

    auto emit = [&](double t) {
        DiagnosticsRecord r = state_functionals(t, fluid, beam, cfg.phys, s, g);
        const TermBreakdown b = contact.breakdown();
        r.dissipation_cum = cum.dissipation_cum;
        r.work_cum = cum.work_cum;
        r.coupling_residual = cum.coupling_residual;
        r.clipped_mass_cum = cum.clipped_mass_cum;
        r.penalty_impulse_cum = cum.penalty_impulse_cum;
        r.press_over_eta_cum = b.press_over_eta_cum;
        r.vert_kin_over_eta_cum = b.vert_kin_over_eta_cum;
        r.energy_residual = energy_residual(initial, r);
        r.contact_residual = b.residual();
        tr.records.push_back(r);
        tr.contact.push_back(b);
        tr.probe_eta.push_back(beam.eta(sc.probe_index));
        tr.pressure.push_back(pressure_lower_bound_check(fluid, beam.eta, cfg.phys, g));
        return r;
    };
    auto keep = [&](int n, std::optional<WindowReports> rep) {
        tr.checkpoints.push_back({n, n * dtw, beam, fluid, std::move(rep)});
    };

    contact.add(contact_sample(0.0, fluid, beam, sc.force.at(0.0, g), unit, cfg.phys, s, g));
    emit(0.0);
    if (cfg.checkpoint_every > 0)
        keep(0, std::nullopt);
    tr.penalty.min_eta = beam.eta.minCoeff();

    // window 0 sees the initial structure velocity as its trace
    std::vector<Field1> lagged{beam.eta_t};
    for (int n = 0; n < N; ++n) {
        const double t0 = n * dtw, t1 = (n + 1) * dtw;
        std::vector<Field1> force;
        if (sc.force.time_dependent())
            for (int k = 0; k < steps; ++k)
                force.push_back(sc.force.at(t0 + (k + 1) * s.dt_inner, g));
        else
            force.push_back(sc.force.at(t0, g));

        WindowResult w;
        try {
            w = run_window(n, fluid, beam, lagged, force, cfg);
        } catch (const NumericalAbort& e) {
            tr.aborted = true;
            tr.abort_message = "window " + std::to_string(n) + ": " + e.what();
            if (tr.records.back().t != t0)
                emit(t0);
            break;
        }
        if (!w.beam.finite() || !w.fluid.finite()) {
            tr.aborted = true;
            tr.abort_message = "non-finite state after window " + std::to_string(n);
            if (tr.records.back().t != t0)
                emit(t0);
            break;
        }
        const SspWindowReport& sr = w.reports.ssp;
        const FspWindowReport& fr = w.reports.fsp;

        // The trace energy the fluid hands over is booked as dissipation when
        // it leaves the fluid and credited back when the beam receives it in
        // the next window; the handover into window 0 counts as work.
        cum.dissipation_cum += sr.coupling_dissipation + sr.self_dissipation + sr.visco_dissipation +
                               sr.penalty_dissipation + fr.viscous_dissipation + fr.trace_dissipation +
                               fr.coupling_dissipation - fr.beam_source;
        if (n == 0)
            cum.work_cum += sr.trace_source;
        else
            cum.dissipation_cum -= sr.trace_source;
        cum.work_cum += sr.work;
        cum.coupling_residual += fr.coupling_residual;
        cum.clipped_mass_cum += fr.clipped_mass;
        cum.penalty_impulse_cum += sr.penalty_impulse;

        const double win_res = check_ssp_energy(sr, 0).residual + check_fsp_energy(fr, 0).residual;
        tr.max_window_energy_residual = std::max(tr.max_window_energy_residual, win_res);
        if (win_res > cfg.energy_window_tol * e_scale)
            ++tr.window_energy_failures;
        tr.max_cg_iterations = std::max(tr.max_cg_iterations, fr.max_cg_iterations);
        tr.penalty.sign_violations += sr.penalty_sign_violations;
        tr.penalty.power_violations += sr.penalty_power_violations;
        tr.penalty.max_undershoot = std::max(tr.penalty.max_undershoot, sr.max_undershoot);
        tr.penalty.min_eta = std::min(tr.penalty.min_eta, sr.min_eta);

        beam = std::move(w.beam);
        fluid = std::move(w.fluid);
        lagged = fr.trace_v3_steps;
        tr.windows_run = n + 1;

        contact.add(contact_sample(t1, fluid, beam, sc.force.at(t1, g), unit, cfg.phys, s, g));

        const double top = beam.eta.maxCoeff();
        const bool last = n + 1 == N;
        const bool too_high = top > g.height_M / 2;
        bool stop = false;
        if (last || too_high || (n + 1) % cfg.output_every == 0) {
            emit(t1);
            if (cfg.stop_on_detachment) {
                const double v = sc.detect_at_probe ? tr.probe_eta.back() : tr.records.back().min_eta;
                stop = v > sc.threshold;
            }
        }
        if (cfg.checkpoint_every > 0 && (last || stop || too_high || (n + 1) % cfg.checkpoint_every == 0))
            keep(n + 1, w.reports);
        if (too_high) {
            std::ostringstream msg;
            msg.precision(6);
            msg << "max eta = " << top << " exceeds M/2 = " << g.height_M / 2 << " at t = " << t1
                << "; the a priori bound ||eta||_inf <= C(1+T) does not fit this domain, enlarge height_M";
            tr.aborted = true;
            tr.abort_message = msg.str();
            break;
        }
        if (stop)
            break;
    }
    return tr;
}

}  // namespace pfsi
