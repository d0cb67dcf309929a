#include "pfsi/diagnostics.hpp"

#include "pfsi/beam_solver.hpp"
#include "pfsi/fluid_solver.hpp"

#include <cmath>
#include <limits>

namespace pfsi {

std::array<double, 18> record_values(const DiagnosticsRecord& r)
{
    return {r.t,
            r.mass,
            r.fluid_kinetic,
            r.internal,
            r.beam_kinetic,
            r.bending,
            r.dissipation_cum,
            r.work_cum,
            r.ln_eta,
            r.press_over_eta_cum,
            r.vert_kin_over_eta_cum,
            r.min_eta,
            r.max_eta,
            r.coupling_residual,
            r.clipped_mass_cum,
            r.penalty_impulse_cum,
            r.energy_residual,
            r.contact_residual};
}

DiagnosticsRecord record_from_values(const std::array<double, 18>& v)
{
    DiagnosticsRecord r;
    r.t = v[0];
    r.mass = v[1];
    r.fluid_kinetic = v[2];
    r.internal = v[3];
    r.beam_kinetic = v[4];
    r.bending = v[5];
    r.dissipation_cum = v[6];
    r.work_cum = v[7];
    r.ln_eta = v[8];
    r.press_over_eta_cum = v[9];
    r.vert_kin_over_eta_cum = v[10];
    r.min_eta = v[11];
    r.max_eta = v[12];
    r.coupling_residual = v[13];
    r.clipped_mass_cum = v[14];
    r.penalty_impulse_cum = v[15];
    r.energy_residual = v[16];
    r.contact_residual = v[17];
    return r;
}

DiagnosticsRecord state_functionals(double t, const FluidState& fluid, const BeamState& beam,
                                    const PhysParams& phys, const SchemeParams& scheme, const GridSpec& grid)
{
    DiagnosticsRecord r;
    r.t = t;
    r.mass = fluid_mass(fluid, grid);
    r.fluid_kinetic = fluid_kinetic_energy(fluid, grid);
    r.internal = fluid_internal_energy(fluid, phys, scheme, grid);
    r.beam_kinetic = beam_kinetic_energy(beam, scheme.eps, grid.dx());
    r.bending = beam_bending_energy(beam, grid.dx());
    r.ln_eta = (beam.eta.max(scheme.eta_floor)).log().sum() * grid.dx();
    r.min_eta = beam.eta.minCoeff();
    r.max_eta = beam.eta.maxCoeff();
    return r;
}

double energy_residual(const DiagnosticsRecord& initial, const DiagnosticsRecord& now)
{
    return (now.energy() + now.dissipation_cum) - (initial.energy() + now.work_cum);
}

ContactSample contact_sample(double t, const FluidState& fluid, const BeamState& beam, const Field1& force,
                             const Field1& psi, const PhysParams& phys, const SchemeParams& scheme,
                             const GridSpec& grid)
{
    const int nx = grid.nx, nz = grid.nz;
    const double dx = grid.dx(), dz = grid.dz();
    const double g = phys.gamma, p = 2 * g / (g - 2);
    const double mu = phys.mu, kh = phys.lambda - 2 * mu / 3;
    const Field1& eta = beam.eta;
    const Field1 eta_x = periodic_derivative(eta, 1, dx);
    const Field1 eta_xx = periodic_derivative(eta, 2, dx);
    const Field1 psi_x = periodic_derivative(psi, 1, dx);
    const Field1 psi_xx = periodic_derivative(psi, 2, dx);
    const Field2 &rho = fluid.rho, &u1 = fluid.u1, &u3 = fluid.u3;

    auto dz_of = [&](const Field2& u, int i, int j) {
        if (j == 0)
            return (u(i, 1) - u(i, 0)) / dz;
        if (j == nz - 1)
            return (u(i, j) - u(i, j - 1)) / dz;
        return (u(i, j + 1) - u(i, j - 1)) / (2 * dz);
    };
    auto dx_of = [&](const Field2& u, int i, int j) {
        return (u((i + 1) % nx, j) - u((i + nx - 1) % nx, j)) / (2 * dx);
    };

    ContactSample s;
    s.t = t;
    double rho_g = 0, up = 0, r4 = 0, mass = 0, rho_u3 = 0, eta_t_sq = 0;
    for (int i = 0; i < nx; ++i) {
        const double h = eta(i);
        double he = h;
        if (he < scheme.eta_floor) {
            he = scheme.eta_floor;
            ++s.floor_activations;
        }
        const double et = beam.eta_t(i), ex = eta_x(i), ps = psi(i), psx = psi_x(i);
        const double ex4 = ex * ex * ex * ex;
        s.force += dx * force(i) * ps;
        s.ln_eta += dx * ps * std::log(he);
        s.abs_ln_eta += dx * std::abs(std::log(he));
        s.bending += dx * eta_xx(i) * psi_xx(i);
        s.boundary += dx * et * ps;
        eta_t_sq += dx * et * et;
        s.eta_x4_over_eta2 += dx * ex4 / (he * he);
        s.eta_eta_x4 += dx * he * ex4;
        const double weight_x = ps * ex / (he * he) - psx / he;
        for (int j = 0; j < nz; ++j) {
            const double f = fraction_below(h, j, dz);
            if (f <= 0)
                break;
            const double w = dx * dz * f;
            const double zq = 0.5 * (j * dz + std::min(h, (j + 1) * dz));
            const double r = rho(i, j), a = u1(i, j), b = u3(i, j);
            const double u1z = dz_of(u1, i, j), u3x = dx_of(u3, i, j);
            const double W = zq * weight_x;
            const double usq = a * a + b * b;
            s.press_over_eta += w * std::pow(r, g) * ps / he;
            s.vert_kin_over_eta += w * r * b * b * ps / he;
            s.convective_time += w * r * b * zq * et * ps / (he * he);
            s.convective_shear += w * r * a * b * W;
            s.viscous_shear -= mu * w * (u1z + u3x) * W;
            s.horizontal += kh * w * a * weight_x;
            s.boundary += w * r * b * zq * ps / he;

            rho_g += w * std::pow(r, g);
            up += w * std::pow(usq, p / 2);
            s.eta_t_over_eta_sq += w * et * et / (he * he);
            r4 += w * r * r * usq * usq;
            s.stress += w * stress_power(dx_of(u1, i, j), u1z, u3x, dz_of(u3, i, j), phys);
            s.eta_x_over_eta_sq += w * ex * ex / (he * he);
            s.u1_over_eta_sq += w * a * a / (he * he);
            mass += w * r;
            rho_u3 += w * r * b * b;
        }
    }
    s.rho_gamma_norm = std::pow(rho_g, 1 / g);
    s.u_p_sq = std::pow(up, 2 / p);
    s.sqrt_rho_u_4_sq = std::sqrt(r4);
    s.boundary_cap = std::sqrt(mass * rho_u3) + std::sqrt(grid.length_L * eta_t_sq);
    return s;
}

double TermBreakdown::rhs() const
{
    double sum = bending_cum;
    for (double g : groups)
        sum += g;
    return sum;
}

double TermBreakdown::scale() const
{
    double sum = std::abs(force_cum) + std::abs(press_over_eta_cum) + std::abs(vert_kin_over_eta_cum) +
                 std::abs(ln_term) + std::abs(bending_cum);
    for (double g : groups)
        sum += std::abs(g);
    return sum;
}

void ContactAccumulator::add(const ContactSample& s)
{
    if (last_) {
        const ContactSample& a = *last_;
        const double h = 0.5 * (s.t - a.t);
        force_ += h * (a.force + s.force);
        press_ += h * (a.press_over_eta + s.press_over_eta);
        vert_ += h * (a.vert_kin_over_eta + s.vert_kin_over_eta);
        g1_ += h * (a.convective_time + s.convective_time);
        g2_ += h * (a.convective_shear + s.convective_shear);
        g4_ += h * (a.viscous_shear + s.viscous_shear);
        g6_ += h * (a.horizontal + s.horizontal);
        bend_ += h * (a.bending + s.bending);
        u_p_sq_ += h * (a.u_p_sq + s.u_p_sq);
        eta_t_ += h * (a.eta_t_over_eta_sq + s.eta_t_over_eta_sq);
        rho_u_4_ += h * (a.sqrt_rho_u_4_sq + s.sqrt_rho_u_4_sq);
        stress_ += h * (a.stress + s.stress);
        eta_x_ += h * (a.eta_x_over_eta_sq + s.eta_x_over_eta_sq);
        u1_ += h * (a.u1_over_eta_sq + s.u1_over_eta_sq);
    } else {
        first_ = s;
    }
    rho_norm_sup_ = std::max(rho_norm_sup_, s.rho_gamma_norm);
    eta_x4_sup_ = std::max(eta_x4_sup_, std::pow(s.eta_x4_over_eta2, 1.0 / 6) * std::pow(s.eta_eta_x4, 1.0 / 12));
    floors_ += s.floor_activations;
    last_ = s;
}

TermBreakdown ContactAccumulator::breakdown() const
{
    TermBreakdown b;
    if (!last_)
        return b;
    const double c = 4 * phys_.mu / 3 + phys_.lambda;
    b.force_cum = force_;
    b.press_over_eta_cum = press_;
    b.vert_kin_over_eta_cum = vert_;
    b.ln_term = -c * last_->ln_eta;
    b.groups = {g1_, g2_, 0.0, g4_, 0.0, g6_, -c * first_->ln_eta, last_->boundary - first_->boundary};
    b.bending_cum = bend_;
    b.floor_activations = floors_;
    b.caps_valid = unit_;
    if (unit_) {
        const double kh = std::abs(phys_.lambda - 2 * phys_.mu / 3);
        b.caps = {rho_norm_sup_ * std::sqrt(u_p_sq_ * eta_t_),
                  std::sqrt(vert_ * rho_u_4_) * eta_x4_sup_,
                  0.0,
                  std::sqrt(phys_.mu * stress_ * eta_x_),
                  0.0,
                  kh * std::sqrt(u1_ * eta_x_),
                  c * first_->abs_ln_eta,
                  last_->boundary_cap + first_->boundary_cap};
    }
    return b;
}

double contact_tolerance(const TermBreakdown& b, double dt_inner, double dx, double dz, double T)
{
    return (dt_inner + dx + dz) * (1 + T) * b.scale();
}

double term_difference(const TermBreakdown& coarse, const TermBreakdown& fine)
{
    double sum = std::abs(coarse.force_cum - fine.force_cum) +
                 std::abs(coarse.press_over_eta_cum - fine.press_over_eta_cum) +
                 std::abs(coarse.vert_kin_over_eta_cum - fine.vert_kin_over_eta_cum) +
                 std::abs(coarse.ln_term - fine.ln_term) + std::abs(coarse.bending_cum - fine.bending_cum);
    for (int k = 0; k < 8; ++k)
        sum += std::abs(coarse.groups[k] - fine.groups[k]);
    return sum;
}

double refined_contact_tolerance(const TermBreakdown& coarse, const TermBreakdown& fine, double h, double h_fine)
{
    if (!(h > h_fine) || !(h_fine > 0))
        throw InputError("refined tolerance needs h > h_fine > 0");
    return h / (h - h_fine) * term_difference(coarse, fine);
}

PressureBoundCheck pressure_lower_bound_check(const FluidState& fluid, const Field1& eta, const PhysParams& phys,
                                              const GridSpec& grid)
{
    const Field2 w = region_weights(Region::below_graph, eta, grid);
    const double g = phys.gamma;
    PressureBoundCheck c;
    const double m = (w * fluid.rho).sum();
    c.integral = (w * fluid.rho.pow(g)).sum();
    c.bound = std::pow(m, g) / std::pow(grid.length_L * eta.maxCoeff(), g - 1);
    c.margin = c.integral - c.bound;
    c.pass = c.margin >= -1e-12 * c.bound;
    return c;
}

DetachmentBound detachment_bound(double T, double m, double gamma, double L, double C_est, double F_total)
{
    DetachmentBound b;
    const double denom = std::pow(L, gamma - 1) * (C_est * (1 + std::sqrt(T)) - F_total);
    if (!(denom > 0)) {
        b.vacuous = true;
        b.value = std::numeric_limits<double>::infinity();
        return b;
    }
    b.value = std::pow(T * std::pow(m, gamma) / denom, 1 / gamma);
    return b;
}

double estimate_C(double press_over_eta_cum, double force_cum, double T)
{
    return (press_over_eta_cum + force_cum) / (1 + std::sqrt(T));
}

std::optional<double> detect_detachment(const std::vector<DiagnosticsRecord>& records, double threshold)
{
    for (const auto& r : records)
        if (r.min_eta > threshold)
            return r.t;
    return std::nullopt;
}

std::optional<double> detect_detachment(const std::vector<double>& t, const std::vector<double>& value,
                                        double threshold)
{
    for (size_t k = 0; k < t.size() && k < value.size(); ++k)
        if (value[k] > threshold)
            return t[k];
    return std::nullopt;
}

}  // namespace pfsi
