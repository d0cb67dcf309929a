#include "pfsi/scenarios.hpp"

#include "pfsi/fluid_solver.hpp"

#include <cmath>
#include <numbers>

namespace pfsi {

Field1 hat_force(const GridSpec& grid, double x0, double kappa, double sigma)
{
    if (!(kappa > 0))
        throw InputError("hat force needs kappa > 0");
    const double L = grid.length_L;
    Field1 f(grid.nx);
    for (int i = 0; i < grid.nx; ++i) {
        double d = std::fmod(std::abs(grid.x(i) - x0), L);
        d = std::min(d, L - d);
        f(i) = sigma / (kappa * kappa) * std::max(kappa - d, 0.0);
    }
    return f;
}

double sigma_for_kappa(double kappa, double alpha, double C_holder)
{
    if (!(kappa > 0) || kappa >= 1)
        throw InputError("kappa must lie in (0, 1)");
    const double a1 = alpha + 1, a2 = alpha + 2;
    return std::sqrt(a1 * a1 * a2 * a2 / (2 * C_holder * C_holder * std::pow(kappa, alpha)));
}

double theorem2_threshold(double m, double gamma, double L, double H)
{
    return std::pow(m, gamma) / (std::pow(L, gamma - 1) * std::pow(H, gamma));
}

InitialData build_contact_initial_data(const GridSpec& grid, double h_max, double x0, double m_target,
                                       double delta)
{
    if (!(h_max >= 0) || !(delta > 0) || !(m_target > 0))
        throw InputError("contact data needs h_max >= 0, delta > 0, mass > 0");
    if (h_max + delta > grid.height_M / 2)
        throw InputError("h_max + delta exceeds M/2; enlarge M");
    InitialData d{BeamState(grid.nx), FluidState(grid.nx, grid.nz)};
    const double k = 2 * std::numbers::pi / grid.length_L;
    for (int i = 0; i < grid.nx; ++i)
        d.beam.eta(i) = h_max * (1 - std::cos(k * (grid.x(i) - x0))) / 2 + delta;
    const double dz = grid.dz();
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.nz; ++j)
            d.fluid.rho(i, j) = fraction_below(d.beam.eta(i), j, dz);
    // scale so the cell-average mass is exactly m_target
    d.fluid.rho *= m_target / fluid_mass(d.fluid, grid);
    return d;
}

InitialChecklist check_initial_data(const InitialData& d, double m_target, double delta, double eta_floor,
                                    const GridSpec& grid)
{
    InitialChecklist c;
    c.eta_above_delta = (d.beam.eta >= delta).all();
    c.rho_nonnegative = (d.fluid.rho >= 0).all();
    c.mass_matches = std::abs(fluid_mass(d.fluid, grid) - m_target) <= 1e-12 * std::max(1.0, m_target);
    c.ln_integral = (d.beam.eta - delta + eta_floor).log().sum() * grid.dx();
    c.ln_finite = std::isfinite(c.ln_integral);
    const auto vac = d.fluid.rho == 0;
    c.momentum_zero_in_vacuum = (vac.select(d.fluid.u1.abs() + d.fluid.u3.abs(), 0.0) == 0).all();
    return c;
}

Field1 ForceSpec::at(double t, const GridSpec& grid) const
{
    switch (kind) {
    case ForceKind::none:
        return Field1::Zero(grid.nx);
    case ForceKind::uniform:
        return Field1::Constant(grid.nx, total / grid.length_L);
    case ForceKind::decaying:
        return Field1::Constant(grid.nx, amplitude * std::exp(-rate * t));
    case ForceKind::hat:
        return hat_force(grid, x0, kappa, sigma);
    }
    return Field1::Zero(grid.nx);
}

int contact_index(const GridSpec& grid)
{
    return grid.nx / 2;
}

Scenario equilibrium_scenario(const GridSpec& grid, double h, double rho)
{
    if (!(h > 0) || h > grid.height_M / 2 || !(rho > 0))
        throw InputError("equilibrium needs 0 < h <= M/2 and rho > 0");
    Scenario s;
    s.id = "equilibrium";
    s.init = {BeamState(grid.nx), FluidState(grid.nx, grid.nz)};
    s.init.beam.eta.setConstant(h);
    s.init.fluid.rho.setConstant(rho);
    s.mass = fluid_mass(s.init.fluid, grid);
    s.probe_index = contact_index(grid);
    s.threshold = 0;
    return s;
}

namespace {

Scenario contact_base(const GridSpec& grid, const ContactParams& p, double& x0)
{
    Scenario s;
    s.probe_index = contact_index(grid);
    x0 = grid.x(s.probe_index);
    s.init = build_contact_initial_data(grid, p.h_max, x0, p.mass, p.delta);
    s.mass = p.mass;
    s.threshold = 2 * p.delta;
    return s;
}

}  // namespace

Scenario theorem2_scenario(const GridSpec& grid, const ContactParams& p, Theorem2Variant variant,
                           double force_value, double decay_rate, double gamma)
{
    double x0 = 0;
    Scenario s = contact_base(grid, p, x0);
    const double H = p.H > 0 ? p.H : grid.height_M / 2;
    const double A = theorem2_threshold(p.mass, gamma, grid.length_L, H);
    if (variant == Theorem2Variant::decaying_force) {
        s.id = "theorem2_decaying";
        s.force.kind = force_value == 0 ? ForceKind::none : ForceKind::decaying;
        s.force.amplitude = force_value;
        s.force.rate = decay_rate;
        // a force that decays integrably leaves the hypotheses intact
        s.guarantee = force_value == 0 || decay_rate > 0;
    } else {
        s.id = "theorem2_constant";
        s.force.kind = ForceKind::uniform;
        s.force.total = force_value;
        s.guarantee = force_value > -A;
    }
    if (!s.guarantee)
        s.tag = "no guarantee";
    return s;
}

Scenario theorem3_scenario(const GridSpec& grid, const ContactParams& p, double kappa, double alpha,
                           double C_holder)
{
    double x0 = 0;
    Scenario s = contact_base(grid, p, x0);
    s.id = "theorem3";
    s.detect_at_probe = true;
    s.force.kind = ForceKind::hat;
    s.force.x0 = x0;
    s.force.kappa = kappa;
    s.force.sigma = sigma_for_kappa(kappa, alpha, C_holder);
    return s;
}

Scenario make_scenario(const ScenarioConfig& c, const GridSpec& grid, const PhysParams& phys)
{
    Scenario s;
    if (c.id == "equilibrium") {
        s = equilibrium_scenario(grid, c.eq_height, c.eq_density);
    } else if (c.id == "theorem2") {
        Theorem2Variant v;
        if (c.variant == "decaying_force")
            v = Theorem2Variant::decaying_force;
        else if (c.variant == "constant_force")
            v = Theorem2Variant::constant_force;
        else
            throw InputError("[scenario] variant must be decaying_force or constant_force");
        s = theorem2_scenario(grid, c.contact, v, c.force, c.decay_rate, phys.gamma);
    } else if (c.id == "theorem3") {
        s = theorem3_scenario(grid, c.contact, c.kappa, c.alpha, c.C_holder);
    } else {
        throw InputError("[scenario] unknown id '" + c.id + "'");
    }
    s.v0 = c.v0;
    s.init.beam.eta_t.setConstant(c.v0);
    return s;
}

}  // namespace pfsi
