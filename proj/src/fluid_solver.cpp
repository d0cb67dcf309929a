#include "pfsi/fluid_solver.hpp"

#include "stencil_solver.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace pfsi {

namespace {

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Vec8 = Eigen::Matrix<double, 8, 1>;

const double gauss_lo = 0.5 - 0.5 / std::sqrt(3.0);
const double gauss_hi = 0.5 + 0.5 / std::sqrt(3.0);

// Gauss point g -> (xi, zeta) in the unit element.
inline double gp_xi(int g) { return (g & 1) ? gauss_hi : gauss_lo; }
inline double gp_zeta(int g) { return (g & 2) ? gauss_hi : gauss_lo; }

// Maps [u1_0..u1_3, u3_0..u3_3] to [u1x, u1z, u3x, u3z] at (xi, zeta).
// Node order: (i,j), (i+1,j), (i,j+1), (i+1,j+1).
Eigen::Matrix<double, 4, 8> gradient_matrix(double xi, double ze, double dx, double dz)
{
    const double dxi[4] = {-(1 - ze), (1 - ze), -ze, ze};
    const double dze[4] = {-(1 - xi), -xi, (1 - xi), xi};
    Eigen::Matrix<double, 4, 8> B = Eigen::Matrix<double, 4, 8>::Zero();
    for (int a = 0; a < 4; ++a) {
        B(0, a) = dxi[a] / dx;
        B(1, a) = dze[a] / dz;
        B(2, 4 + a) = dxi[a] / dx;
        B(3, 4 + a) = dze[a] / dz;
    }
    return B;
}

Eigen::Matrix4d stress_form(const PhysParams& phys)
{
    const double mu = phys.mu, la = phys.lambda;
    Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
    C(0, 0) = C(3, 3) = 4 * mu / 3 + la;
    C(0, 3) = C(3, 0) = la - 2 * mu / 3;
    C(1, 1) = C(2, 2) = C(1, 2) = C(2, 1) = mu;
    return C;
}

// Element stiffness at each Gauss point for a unit mask, element height h.
std::array<Mat8, 4> gauss_stiffness(const PhysParams& phys, double dx, double h)
{
    const Eigen::Matrix4d C = stress_form(phys);
    const double w = dx * h / 4;
    std::array<Mat8, 4> K;
    for (int g = 0; g < 4; ++g) {
        const auto B = gradient_matrix(gp_xi(g), gp_zeta(g), dx, h);
        K[g] = w * B.transpose() * C * B;
    }
    return K;
}

// The strip between the floor and the first row of centres is covered by
// elements of height dz/2 whose lower nodes sit on the wall (value 0).
inline Vec8 wall_element(const Field2& u1, const Field2& u3, int i, int nx)
{
    const int ip = (i + 1) % nx;
    Vec8 xe = Vec8::Zero();
    xe(2) = u1(i, 0);
    xe(3) = u1(ip, 0);
    xe(6) = u3(i, 0);
    xe(7) = u3(ip, 0);
    return xe;
}

inline void element_nodes(int i, int j, int nx, int n[4])
{
    const int ip = (i + 1) % nx;
    n[0] = i + nx * j;
    n[1] = ip + nx * j;
    n[2] = i + nx * (j + 1);
    n[3] = ip + nx * (j + 1);
}

constexpr double cg_rtol = 1e-10;

// Viscous stiffness plus the interface penalty, assembled once per window.
// Unknowns are [u1; u3] with node index i + nx j.
class StencilOperator {
public:
    StencilOperator(const ViscosityMask& mask, const TraceStencil& st, double kpen, const PhysParams& phys,
                    const GridSpec& grid)
        : k_(grid.nx, grid.nz)
    {
        const int nx = grid.nx, nz = grid.nz;
        const auto Kg = gauss_stiffness(phys, grid.dx(), grid.dz());
        const auto Kw = gauss_stiffness(phys, grid.dx(), 0.5 * grid.dz());
        const int di[4] = {0, 1, 0, 1}, dj[4] = {0, 0, 1, 1};
        for (int i = 0; i < nx; ++i) {
            const auto& c = mask.chi_wall[i];
            const Mat8 Ke = c[0] * Kw[0] + c[1] * Kw[1] + c[2] * Kw[2] + c[3] * Kw[3];
            const int n[2] = {i, (i + 1) % nx};
            for (int a = 2; a < 4; ++a)
                for (int b = 2; b < 4; ++b) {
                    const int k = detail::Stencil9::slot(di[b] - di[a], 0);
                    for (int ca = 0; ca < 2; ++ca)
                        for (int cb = 0; cb < 2; ++cb)
                            k_.at(ca, cb, k, n[a - 2]) += Ke(4 * ca + a, 4 * cb + b);
                }
        }
        for (int j = 0; j + 1 < nz; ++j)
            for (int i = 0; i < nx; ++i) {
                const auto& c = mask.chi_gp[i + nx * j];
                const Mat8 Ke = c[0] * Kg[0] + c[1] * Kg[1] + c[2] * Kg[2] + c[3] * Kg[3];
                int n[4];
                element_nodes(i, j, nx, n);
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) {
                        const int k = detail::Stencil9::slot(di[b] - di[a], dj[b] - dj[a]);
                        for (int ca = 0; ca < 2; ++ca)
                            for (int cb = 0; cb < 2; ++cb)
                                k_.at(ca, cb, k, n[a]) += Ke(4 * ca + a, 4 * cb + b);
                    }
            }
        const double w = kpen * grid.dx();
        for (int i = 0; i < nx; ++i) {
            const int jl = st.j_lo(i), jh = st.j_hi(i);
            const int lo = i + nx * jl, hi = i + nx * jh;
            const double wl = st.w_lo(i), wh = st.w_hi(i);
            for (int c = 0; c < 2; ++c) {
                k_.at(c, c, detail::Stencil9::slot(0, 0), lo) += w * wl * wl;
                k_.at(c, c, detail::Stencil9::slot(0, 0), hi) += w * wh * wh;
                k_.at(c, c, detail::Stencil9::slot(0, jh - jl), lo) += w * wl * wh;
                k_.at(c, c, detail::Stencil9::slot(0, jl - jh), hi) += w * wh * wl;
            }
        }
    }

    const detail::Stencil9& stiffness() const { return k_; }

    // stiffness plus a lumped mass on the diagonal
    detail::Stencil9 with_mass(const Eigen::VectorXd& mass) const
    {
        detail::Stencil9 a = k_;
        const int N = a.nodes();
        for (int c = 0; c < 2; ++c)
            for (int n = 0; n < N; ++n)
                a.at(c, c, detail::Stencil9::slot(0, 0), n) += mass(c * N + n);
        return a;
    }

private:
    detail::Stencil9 k_;
};

void abort_nonfinite(const char* where, double dt, double cfl)
{
    std::ostringstream msg;
    msg << "non-finite values in " << where << " (dt_inner = " << dt << ", CFL = " << cfl
        << "); reduce dt_inner";
    throw NumericalAbort(msg.str());
}

FluidState momentum_step_impl(const FluidState& old, const ContinuityResult& cont, const StencilOperator& op,
                              const TraceStencil& st, const Field1& w_beam, const SchemeParams& scheme,
                              const PhysParams& phys, const GridSpec& grid, double dt, MomentumLedger* ledger)
{
    const int nx = grid.nx, nz = grid.nz;
    const double dx = grid.dx(), dz = grid.dz(), A = grid.cell_area();
    const double a = scheme.a_diff;
    const Field2& r0 = old.rho;
    const Field2& r1 = cont.rho;

    // explicit momentum update
    Field2 h1(nx, nz);
    for (int j = 0; j < nz; ++j)
        for (int i = 0; i < nx; ++i)
            h1(i, j) = enthalpy(r1(i, j), phys, scheme);

    FluidState out(nx, nz);
    out.rho = r1;
    const Field2* vel[2] = {&old.u1, &old.u3};
    Field2* res[2] = {&out.u1, &out.u3};
    for (int c = 0; c < 2; ++c) {
        const Field2& u = *vel[c];
        Field2 m = r0 * u;
        // convective flux through x faces
        for (int j = 0; j < nz; ++j) {
            for (int i = 0; i < nx; ++i) {
                const int ip = (i + 1) % nx;
                const double F = cont.flux_x(i, j);
                const double G = F * (F > 0 ? u(i, j) : u(ip, j));
                m(i, j) -= dt * G / dx;
                m(ip, j) += dt * G / dx;
                if (a > 0) {
                    const double g = (r0(ip, j) - r0(i, j)) / dx;
                    const double du = (u(ip, j) - u(i, j)) / dx;
                    const double s = 0.5 * a * g * du;
                    m(i, j) -= dt * s;
                    m(ip, j) -= dt * s;
                }
            }
        }
        for (int j = 0; j + 1 < nz; ++j) {
            for (int i = 0; i < nx; ++i) {
                const double F = cont.flux_z(i, j);
                const double G = F * (F > 0 ? u(i, j) : u(i, j + 1));
                m(i, j) -= dt * G / dz;
                m(i, j + 1) += dt * G / dz;
                if (a > 0) {
                    const double g = (r0(i, j + 1) - r0(i, j)) / dz;
                    const double du = (u(i, j + 1) - u(i, j)) / dz;
                    const double s = 0.5 * a * g * du;
                    m(i, j) -= dt * s;
                    m(i, j + 1) -= dt * s;
                }
            }
        }
        // pressure in enthalpy form, reflective ghosts in z
        for (int j = 0; j < nz; ++j) {
            for (int i = 0; i < nx; ++i) {
                double grad;
                if (c == 0) {
                    grad = (h1((i + 1) % nx, j) - h1((i + nx - 1) % nx, j)) / (2 * dx);
                } else {
                    const double hu = h1(i, std::min(j + 1, nz - 1));
                    const double hd = h1(i, std::max(j - 1, 0));
                    grad = (hu - hd) / (2 * dz);
                }
                m(i, j) -= dt * r1(i, j) * grad;
            }
        }
        Field2& un = *res[c];
        for (int j = 0; j < nz; ++j)
            for (int i = 0; i < nx; ++i)
                un(i, j) = r1(i, j) < vacuum_density ? 0.0 : m(i, j) / r1(i, j);
    }

    // free unknowns: everything except u3 on the top row. Massless cells
    // keep a velocity through the viscous extension.
    const int S = nx * nz;
    Eigen::Array<bool, Eigen::Dynamic, 1> freedof(2 * S);
    for (int j = 0; j < nz; ++j)
        for (int i = 0; i < nx; ++i) {
            const int n = i + nx * j;
            freedof(n) = true;
            freedof(S + n) = j < nz - 1;
        }

    const double kpen = scheme.eps / scheme.dt_window;
    Eigen::VectorXd mass(2 * S);
    for (int n = 0; n < S; ++n)
        mass(n) = mass(S + n) = r1.data()[n] * A / dt;

    Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * S);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * S);
    for (int n = 0; n < S; ++n) {
        b(n) = mass(n) * out.u1.data()[n];
        b(S + n) = mass(S + n) * out.u3.data()[n];
    }
    for (int i = 0; i < nx; ++i) {
        const int jl = st.j_lo(i), jh = st.j_hi(i);
        b(S + i + nx * jl) += kpen * dx * st.w_lo(i) * w_beam(i);
        b(S + i + nx * jh) += kpen * dx * st.w_hi(i) * w_beam(i);
    }
    for (int n = 0; n < 2 * S; ++n) {
        if (!freedof(n))
            b(n) = 0;
        else if (r1.data()[n % S] >= vacuum_density)
            x(n) = n < S ? out.u1.data()[n] : out.u3.data()[n - S];
        else
            x(n) = n < S ? old.u1.data()[n] : old.u3.data()[n - S];
    }
    // pinned unknowns stay zero: they are decoupled identity rows
    const int iters = detail::pcg(detail::ZMultigrid(op.with_mass(mass), freedof), b, x, cg_rtol, 2000);
    out.u1.setZero();
    out.u3.setZero();
    for (int n = 0; n < S; ++n) {
        out.u1.data()[n] = x(n);
        out.u3.data()[n] = x(S + n);
    }
    if (!out.finite())
        abort_nonfinite("momentum step", dt, cfl_number(old, phys, scheme, grid, dt));

    if (ledger) {
        const Field1 v1 = apply_stencil(st, out.u1), v3 = apply_stencil(st, out.u3);
        const double vv = (v1.square() + v3.square()).sum() * dx;
        // x^T K x, with the penalty quadratic removed from the assembled form
        Eigen::VectorXd Kx(2 * S);
        op.stiffness().apply(x, Kx);
        ledger->viscous += dt * (x.dot(Kx) - kpen * vv);
        const double cc = (v1.square() + (v3 - w_beam).square()).sum() * dx;
        const double ww = w_beam.square().sum() * dx;
        ledger->trace += dt * 0.5 * kpen * vv;
        ledger->coupling += dt * 0.5 * kpen * cc;
        ledger->source += dt * 0.5 * kpen * ww;
        ledger->coupling_residual += dt * cc;
        ledger->cg_iterations = std::max(ledger->cg_iterations, iters);
        ledger->trace_v3 = v3;
    }
    return out;
}

}  // namespace

double mask_value(double z, double eta, double eps)
{
    if (z <= eta)
        return 1.0;
    if (z >= eta + eps)
        return eps;
    return 1.0 - (1.0 - eps) * (z - eta) / eps;
}

ViscosityMask build_mask(const Field1& eta, double eps, const GridSpec& grid)
{
    const int nx = grid.nx, nz = grid.nz;
    ViscosityMask m;
    m.chi.resize(nx, nz);
    for (int j = 0; j < nz; ++j)
        for (int i = 0; i < nx; ++i)
            m.chi(i, j) = mask_value(grid.z(j), eta(i), eps);
    m.chi_gp.resize(static_cast<size_t>(nx) * (nz - 1));
    for (int j = 0; j + 1 < nz; ++j)
        for (int i = 0; i < nx; ++i) {
            auto& c = m.chi_gp[i + nx * j];
            for (int g = 0; g < 4; ++g) {
                const double xi = gp_xi(g), ze = gp_zeta(g);
                const double h = (1 - xi) * eta(i) + xi * eta((i + 1) % nx);
                c[g] = mask_value(grid.z(j) + ze * grid.dz(), h, eps);
            }
        }
    m.chi_wall.resize(nx);
    for (int i = 0; i < nx; ++i)
        for (int g = 0; g < 4; ++g) {
            const double xi = gp_xi(g), ze = gp_zeta(g);
            const double h = (1 - xi) * eta(i) + xi * eta((i + 1) % nx);
            m.chi_wall[i][g] = mask_value(ze * 0.5 * grid.dz(), h, eps);
        }
    return m;
}

double pressure(double rho, const PhysParams& phys, const SchemeParams& scheme)
{
    double p = std::pow(rho, phys.gamma);
    if (scheme.b_reg > 0)
        p += scheme.b_reg * std::pow(rho, scheme.beta_reg);
    return p;
}

double enthalpy(double rho, const PhysParams& phys, const SchemeParams& scheme)
{
    const double g = phys.gamma;
    double h = g / (g - 1) * std::pow(rho, g - 1);
    if (scheme.b_reg > 0) {
        const double be = scheme.beta_reg;
        h += scheme.b_reg * be / (be - 1) * std::pow(rho, be - 1);
    }
    return h;
}

double internal_energy_density(double rho, const PhysParams& phys, const SchemeParams& scheme)
{
    double e = std::pow(rho, phys.gamma) / (phys.gamma - 1);
    if (scheme.b_reg > 0)
        e += scheme.b_reg * std::pow(rho, scheme.beta_reg) / (scheme.beta_reg - 1);
    return e;
}

double sound_speed(double rho, const PhysParams& phys, const SchemeParams& scheme)
{
    double c2 = phys.gamma * std::pow(rho, phys.gamma - 1);
    if (scheme.b_reg > 0)
        c2 += scheme.b_reg * scheme.beta_reg * std::pow(rho, scheme.beta_reg - 1);
    return std::sqrt(c2);
}

double fluid_kinetic_energy(const FluidState& f, const GridSpec& grid)
{
    return 0.5 * (f.rho * (f.u1.square() + f.u3.square())).sum() * grid.cell_area();
}

double fluid_internal_energy(const FluidState& f, const PhysParams& phys, const SchemeParams& scheme,
                             const GridSpec& grid)
{
    double s = 0;
    for (Eigen::Index n = 0; n < f.rho.size(); ++n)
        s += internal_energy_density(f.rho.data()[n], phys, scheme);
    return s * grid.cell_area();
}

double fluid_energy(const FluidState& f, const PhysParams& phys, const SchemeParams& scheme,
                    const GridSpec& grid)
{
    return fluid_kinetic_energy(f, grid) + fluid_internal_energy(f, phys, scheme, grid);
}

double fluid_mass(const FluidState& f, const GridSpec& grid) { return f.rho.sum() * grid.cell_area(); }

double cfl_number(const FluidState& f, const PhysParams& phys, const SchemeParams& scheme,
                  const GridSpec& grid, double dt)
{
    const double dx = grid.dx(), dz = grid.dz();
    double worst = 0;
    for (int j = 0; j < grid.nz; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const double c = sound_speed(f.rho(i, j), phys, scheme);
            worst = std::max(worst, (std::abs(f.u1(i, j)) + c) / dx + (std::abs(f.u3(i, j)) + c) / dz);
        }
    return dt * (worst + 2 * scheme.a_diff * (1 / (dx * dx) + 1 / (dz * dz)));
}

ContinuityResult continuity_step(const FluidState& f, const PhysParams& phys, const SchemeParams& scheme,
                                 const GridSpec& grid, double dt)
{
    const double cfl = cfl_number(f, phys, scheme, grid, dt);
    if (!(cfl <= 1.0)) {
        std::ostringstream msg;
        msg << "CFL condition violated: CFL = " << cfl << " > 1 at dt_inner = " << dt
            << "; reduce dt_inner";
        throw NumericalAbort(msg.str());
    }
    const int nx = grid.nx, nz = grid.nz;
    const double dx = grid.dx(), dz = grid.dz(), a = scheme.a_diff;
    const Field2& r = f.rho;
    ContinuityResult out;
    out.flux_x.resize(nx, nz);
    out.flux_z = Field2::Zero(nx, nz - 1);
    out.rho = r;
    for (int j = 0; j < nz; ++j)
        for (int i = 0; i < nx; ++i) {
            const int ip = (i + 1) % nx;
            const double uL = f.u1(i, j), uR = f.u1(ip, j);
            const double s = std::max(std::abs(uL), std::abs(uR));
            const double F = 0.5 * (r(i, j) * uL + r(ip, j) * uR) - 0.5 * s * (r(ip, j) - r(i, j));
            out.flux_x(i, j) = F;
            const double Ft = F - a * (r(ip, j) - r(i, j)) / dx;
            out.rho(i, j) -= dt * Ft / dx;
            out.rho(ip, j) += dt * Ft / dx;
        }
    for (int j = 0; j + 1 < nz; ++j)
        for (int i = 0; i < nx; ++i) {
            const double uL = f.u3(i, j), uR = f.u3(i, j + 1);
            const double s = std::max(std::abs(uL), std::abs(uR));
            const double F = 0.5 * (r(i, j) * uL + r(i, j + 1) * uR) - 0.5 * s * (r(i, j + 1) - r(i, j));
            out.flux_z(i, j) = F;
            const double Ft = F - a * (r(i, j + 1) - r(i, j)) / dz;
            out.rho(i, j) -= dt * Ft / dz;
            out.rho(i, j + 1) += dt * Ft / dz;
        }
    for (Eigen::Index n = 0; n < out.rho.size(); ++n) {
        double& v = out.rho.data()[n];
        if (v < 0) {
            out.clipped_mass -= v * grid.cell_area();
            v = 0;
        }
    }
    if (!out.rho.allFinite())
        abort_nonfinite("continuity step", dt, cfl);
    return out;
}

FluidState momentum_step(const FluidState& old, const ContinuityResult& cont, const ViscosityMask& mask,
                         const BeamState& beam, const SchemeParams& scheme, const PhysParams& phys,
                         const GridSpec& grid, double dt, MomentumLedger* ledger)
{
    const TraceStencil st = trace_stencil(beam.eta, grid);
    const StencilOperator op(mask, st, scheme.eps / scheme.dt_window, phys, grid);
    return momentum_step_impl(old, cont, op, st, beam.eta_t, scheme, phys, grid, dt, ledger);
}

std::pair<FluidState, FspWindowReport> step_fsp(const FluidState& fluid, const Field1& eta,
                                                const std::vector<Field1>& eta_t_steps,
                                                const SchemeParams& scheme, const PhysParams& phys,
                                                const GridSpec& grid, int window_steps)
{
    const double dt = scheme.dt_inner;
    const ViscosityMask mask = build_mask(eta, scheme.eps, grid);
    const TraceStencil st = trace_stencil(eta, grid);
    const StencilOperator op(mask, st, scheme.eps / scheme.dt_window, phys, grid);

    FspWindowReport rep;
    rep.start_energy = fluid_energy(fluid, phys, scheme, grid);
    FluidState s = fluid;
    for (int k = 0; k < window_steps; ++k) {
        const Field1& w = eta_t_steps.size() == 1 ? eta_t_steps[0] : eta_t_steps.at(k);
        const ContinuityResult cont = continuity_step(s, phys, scheme, grid, dt);
        rep.clipped_mass += cont.clipped_mass;
        MomentumLedger led;
        s = momentum_step_impl(s, cont, op, st, w, scheme, phys, grid, dt, &led);
        rep.viscous_dissipation += led.viscous;
        rep.trace_dissipation += led.trace;
        rep.coupling_dissipation += led.coupling;
        rep.beam_source += led.source;
        rep.coupling_residual += led.coupling_residual;
        rep.max_cg_iterations = std::max(rep.max_cg_iterations, led.cg_iterations);
        rep.trace_v3_steps.push_back(led.trace_v3);
    }
    rep.end_energy = fluid_energy(s, phys, scheme, grid);
    return {s, rep};
}

EnergyCheckF check_fsp_energy(const FspWindowReport& r, double tol)
{
    const double lhs = r.end_energy + r.viscous_dissipation + r.trace_dissipation + r.coupling_dissipation;
    const double rhs = r.start_energy + r.beam_source + r.work;
    EnergyCheckF c;
    c.residual = lhs - rhs;
    c.pass = c.residual <= tol;
    return c;
}

double viscous_dissipation_rate(const FluidState& f, const ViscosityMask& mask, const PhysParams& phys,
                                const GridSpec& grid)
{
    const int nx = grid.nx, nz = grid.nz;
    const double w = grid.cell_area() / 4;
    double total = 0;
    for (int j = 0; j + 1 < nz; ++j)
        for (int i = 0; i < nx; ++i) {
            int n[4];
            element_nodes(i, j, nx, n);
            Vec8 xe;
            for (int q = 0; q < 4; ++q) {
                xe(q) = f.u1.data()[n[q]];
                xe(4 + q) = f.u3.data()[n[q]];
            }
            for (int g = 0; g < 4; ++g) {
                const Eigen::Vector4d G = gradient_matrix(gp_xi(g), gp_zeta(g), grid.dx(), grid.dz()) * xe;
                total += w * mask.chi_gp[i + nx * j][g] * stress_power(G(0), G(1), G(2), G(3), phys);
            }
        }
    for (int i = 0; i < nx; ++i) {
        const Vec8 xe = wall_element(f.u1, f.u3, i, nx);
        for (int g = 0; g < 4; ++g) {
            const Eigen::Vector4d G = gradient_matrix(gp_xi(g), gp_zeta(g), grid.dx(), 0.5 * grid.dz()) * xe;
            total += 0.5 * w * mask.chi_wall[i][g] * stress_power(G(0), G(1), G(2), G(3), phys);
        }
    }
    return total;
}

GradientNorms gradient_norms(const Field2& u1, const Field2& u3, const PhysParams& phys, const GridSpec& grid)
{
    const int nx = grid.nx, nz = grid.nz;
    const double w = grid.cell_area() / 4;
    GradientNorms out;
    for (int j = 0; j + 1 < nz; ++j)
        for (int i = 0; i < nx; ++i) {
            int n[4];
            element_nodes(i, j, nx, n);
            Vec8 xe;
            for (int q = 0; q < 4; ++q) {
                xe(q) = u1.data()[n[q]];
                xe(4 + q) = u3.data()[n[q]];
            }
            for (int g = 0; g < 4; ++g) {
                const Eigen::Vector4d G = gradient_matrix(gp_xi(g), gp_zeta(g), grid.dx(), grid.dz()) * xe;
                out.grad_sq += w * G.squaredNorm();
                out.div_sq += w * (G(0) + G(3)) * (G(0) + G(3));
                out.stress += w * stress_power(G(0), G(1), G(2), G(3), phys);
            }
        }
    return out;
}

}  // namespace pfsi
