#ifndef PFSI_FLUID_SOLVER_HPP
#define PFSI_FLUID_SOLVER_HPP

#include "pfsi/core_state.hpp"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace pfsi {

// Below this density a cell is treated as vacuum when recovering u from rho u.
inline constexpr double vacuum_density = 1e-12;

struct ViscosityMask {
    Field2 chi;                                 // cell centres
    std::vector<std::array<double, 4>> chi_gp;  // per dual element, per Gauss point
    std::vector<std::array<double, 4>> chi_wall;  // floor strip below the first centres
};

struct FspWindowReport {
    double start_energy = 0, end_energy = 0;
    double viscous_dissipation = 0;   // int int chi S(grad u):grad u
    double trace_dissipation = 0;     // eps/(2 Dt) int int |v|^2
    double coupling_dissipation = 0;  // eps/(2 Dt) int int |v - eta_t e_z|^2
    double beam_source = 0;           // eps/(2 Dt) int int |eta_t|^2
    double work = 0;                  // the outer force acts on the beam only
    double clipped_mass = 0;
    double coupling_residual = 0;     // int int |v - eta_t e_z|^2
    int max_cg_iterations = 0;
    std::vector<Field1> trace_v3_steps;
};

struct EnergyCheckF {
    bool pass = false;
    double residual = 0;
};

double mask_value(double z, double eta, double eps);
ViscosityMask build_mask(const Field1& eta, double eps, const GridSpec& grid);

// S = mu (G + G^T - 2/3 tr G I) + lambda tr G I
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 2> stress_tensor(const Eigen::MatrixBase<Derived>& grad,
                                                            const PhysParams& phys)
{
    using Scalar = typename Derived::Scalar;
    using M2 = Eigen::Matrix<Scalar, 2, 2>;
    const Scalar div = grad.trace();
    return Scalar(phys.mu) * (grad + grad.transpose() - Scalar(2.0 / 3.0) * div * M2::Identity()) +
           Scalar(phys.lambda) * div * M2::Identity();
}

// Pointwise S(G):G for G = [[u1x, u1z], [u3x, u3z]].
inline double stress_power(double u1x, double u1z, double u3x, double u3z, const PhysParams& phys)
{
    const double div = u1x + u3z;
    const double sh = u1z + u3x;
    return phys.mu * (2 * u1x * u1x + 2 * u3z * u3z + sh * sh - 2.0 / 3.0 * div * div) +
           phys.lambda * div * div;
}

double pressure(double rho, const PhysParams& phys, const SchemeParams& scheme);
double enthalpy(double rho, const PhysParams& phys, const SchemeParams& scheme);
double internal_energy_density(double rho, const PhysParams& phys, const SchemeParams& scheme);
double sound_speed(double rho, const PhysParams& phys, const SchemeParams& scheme);

double fluid_kinetic_energy(const FluidState& f, const GridSpec& grid);
double fluid_internal_energy(const FluidState& f, const PhysParams& phys, const SchemeParams& scheme,
                             const GridSpec& grid);
double fluid_energy(const FluidState& f, const PhysParams& phys, const SchemeParams& scheme,
                    const GridSpec& grid);
double fluid_mass(const FluidState& f, const GridSpec& grid);

// Advective mass fluxes through x faces (i+1/2, j) and z faces (i, j+1/2).
struct ContinuityResult {
    Field2 rho;
    Field2 flux_x, flux_z;
    double clipped_mass = 0;
};

double cfl_number(const FluidState& f, const PhysParams& phys, const SchemeParams& scheme,
                  const GridSpec& grid, double dt);

ContinuityResult continuity_step(const FluidState& fluid, const PhysParams& phys,
                                 const SchemeParams& scheme, const GridSpec& grid, double dt);

struct MomentumLedger {
    double viscous = 0;
    double trace = 0;
    double coupling = 0;
    double source = 0;
    double coupling_residual = 0;
    int cg_iterations = 0;
    Field1 trace_v3;
};

// Explicit transport, pressure and a-correction; then an implicit solve for
// viscosity and the interface penalty. beam.eta fixes the interface stencil,
// beam.eta_t is the frozen structure velocity.
FluidState momentum_step(const FluidState& old, const ContinuityResult& cont, const ViscosityMask& mask,
                         const BeamState& beam, const SchemeParams& scheme, const PhysParams& phys,
                         const GridSpec& grid, double dt, MomentumLedger* ledger = nullptr);

// One window with a frozen mask and interface position; eta_t_steps holds the
// structure velocity for each inner step.
std::pair<FluidState, FspWindowReport> step_fsp(const FluidState& fluid, const Field1& eta,
                                                const std::vector<Field1>& eta_t_steps,
                                                const SchemeParams& scheme, const PhysParams& phys,
                                                const GridSpec& grid, int window_steps);

EnergyCheckF check_fsp_energy(const FspWindowReport& report, double tol);

// Discrete viscous dissipation rate sum chi S(grad u):grad u over the dual
// elements with 2x2 Gauss quadrature.
double viscous_dissipation_rate(const FluidState& f, const ViscosityMask& mask, const PhysParams& phys,
                                const GridSpec& grid);

// Unit-mask gradient norms on the same quadrature (for the Korn identity).
struct GradientNorms {
    double grad_sq = 0;  // ||grad u||^2
    double div_sq = 0;   // ||div u||^2
    double stress = 0;   // sum S(grad u):grad u
};
GradientNorms gradient_norms(const Field2& u1, const Field2& u3, const PhysParams& phys, const GridSpec& grid);

}  // namespace pfsi

#endif
