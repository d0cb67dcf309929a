#include "pfsi/beam_solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <sstream>

namespace pfsi {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// c0 I - eps D2 + dt D4 + diag(extra), periodic.
SpMat beam_matrix(int n, double c0, double eps, double dt, double dx, const Field1& extra)
{
    const double a2 = eps / (dx * dx);
    const double a4 = dt / (dx * dx * dx * dx);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(5 * n);
    for (int i = 0; i < n; ++i) {
        auto col = [&](int o) { return ((i + o) % n + n) % n; };
        t.emplace_back(i, i, c0 + 2 * a2 + 6 * a4 + extra(i));
        t.emplace_back(i, col(1), -a2 - 4 * a4);
        t.emplace_back(i, col(-1), -a2 - 4 * a4);
        t.emplace_back(i, col(2), a4);
        t.emplace_back(i, col(-2), a4);
    }
    SpMat A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

double l2sq(const Field1& f, double dx) { return f.square().sum() * dx; }

}  // namespace

Field1 contact_penalty(const Field1& eta, const Field1& eta_t, double delta, double kappa)
{
    return (eta < delta).select((-eta_t).max(0.0) / kappa, 0.0);
}

double beam_kinetic_energy(const BeamState& beam, double eps, double dx)
{
    return 0.5 * (1 - eps) * l2sq(beam.eta_t, dx);
}

double beam_bending_energy(const BeamState& beam, double dx)
{
    return 0.5 * l2sq(periodic_derivative(beam.eta, 2, dx), dx);
}

std::pair<BeamState, SspWindowReport> step_ssp(const BeamState& beam, const BeamForcing& forcing,
                                               const PhysParams&, const SchemeParams& scheme,
                                               int window_steps, double dx)
{
    const int n = static_cast<int>(beam.eta.size());
    const double dt = scheme.dt_inner, eps = scheme.eps, Dt = scheme.dt_window;
    const double kappa = scheme.kappa_contact, delta = scheme.delta;
    const double c0 = (1 - eps) / dt + eps / Dt;
    const double k = eps / Dt;

    SspWindowReport rep;
    rep.start_kinetic = beam_kinetic_energy(beam, eps, dx);
    rep.start_bending = beam_bending_energy(beam, dx);
    rep.min_eta = beam.eta.minCoeff();

    Eigen::SimplicialLDLT<SpMat> base;
    base.compute(beam_matrix(n, c0, eps, dt, dx, Field1::Zero(n)));
    if (base.info() != Eigen::Success)
        throw NumericalAbort("structure matrix factorization failed");

    BeamState s = beam;
    for (int step = 0; step < window_steps; ++step) {
        const Field1& F = forcing.force(step);
        const Field1& Tv = forcing.trace(step);
        const Field1 d4 = periodic_derivative(s.eta, 4, dx);
        const Eigen::VectorXd rhs = ((1 - eps) / dt * s.eta_t + k * Tv - d4 + F).matrix();

        // Penalty treated implicitly on an active set: nodes that end the
        // step below delta while moving down.
        Eigen::VectorXd V = base.solve(rhs);
        Eigen::Array<bool, Eigen::Dynamic, 1> active(n);
        active = (s.eta + dt * V.array() < delta) && (V.array() < 0);
        int iters = 0;
        while (active.any() && iters < 50) {
            ++iters;
            const Field1 extra = active.select(Field1::Constant(n, 1.0 / kappa), 0.0);
            Eigen::SimplicialLDLT<SpMat> solver;
            solver.compute(beam_matrix(n, c0, eps, dt, dx, extra));
            V = solver.solve(rhs);
            Eigen::Array<bool, Eigen::Dynamic, 1> next(n);
            next = (s.eta + dt * V.array() < delta) && (V.array() < 0);
            if ((next == active).all())
                break;
            active = next;
        }
        rep.active_set_iterations = std::max(rep.active_set_iterations, iters);

        const Field1 Vn = V.array();
        const Field1 P = active.select(-Vn / kappa, 0.0);
        for (int i = 0; i < n; ++i) {
            if (P(i) < 0)
                ++rep.penalty_sign_violations;
            if (P(i) * Vn(i) > 0)
                ++rep.penalty_power_violations;
        }

        BeamState next{};
        next.eta_t = Vn;
        next.eta = s.eta + dt * Vn;
        if (!next.finite()) {
            std::ostringstream msg;
            msg << "structure step produced non-finite values (dt_inner = " << dt
                << ", kappa = " << kappa << "); reduce dt_inner";
            throw NumericalAbort(msg.str());
        }

        rep.coupling_dissipation += dt * 0.5 * k * l2sq(Vn - Tv, dx);
        rep.self_dissipation += dt * 0.5 * k * l2sq(Vn, dx);
        rep.trace_source += dt * 0.5 * k * l2sq(Tv, dx);
        rep.visco_dissipation += dt * eps * l2sq(forward_difference(Vn, dx), dx);
        rep.penalty_dissipation -= dt * (P * Vn).sum() * dx;
        rep.penalty_impulse += dt * P.sum() * dx;
        rep.work += dt * (F * Vn).sum() * dx;
        rep.numerical_dissipation += 0.5 * (1 - eps) * l2sq(Vn - s.eta_t, dx) +
                                     0.5 * l2sq(periodic_derivative(Field1(next.eta - s.eta), 2, dx), dx);
        rep.min_eta = std::min(rep.min_eta, next.eta.minCoeff());
        rep.max_undershoot = std::max(rep.max_undershoot, delta - next.eta.minCoeff());
        rep.eta_t_steps.push_back(Vn);
        s = std::move(next);
    }
    rep.end_kinetic = beam_kinetic_energy(s, eps, dx);
    rep.end_bending = beam_bending_energy(s, dx);
    return {s, rep};
}

EnergyCheck check_ssp_energy(const SspWindowReport& r, double tol)
{
    const double lhs = r.end_energy() + r.coupling_dissipation + r.self_dissipation +
                       r.visco_dissipation + r.penalty_dissipation;
    const double rhs = r.start_energy() + r.trace_source + r.work;
    EnergyCheck c;
    c.residual = lhs - rhs;
    c.pass = c.residual <= tol;
    return c;
}

}  // namespace pfsi
