#include "pfsi/core_state.hpp"

#include <sstream>

namespace pfsi {

void GridSpec::validate() const
{
    if (nx < 8)
        throw InputError("[grid] nx must be at least 8");
    if (nz < 8)
        throw InputError("[grid] nz must be at least 8");
    if (!(length_L > 0))
        throw InputError("[grid] length_L must be positive");
    if (!(height_M > 0))
        throw InputError("[grid] height_M must be positive");
}

void PhysParams::validate() const
{
    if (!(mu > 0))
        throw InputError("[physics] mu must be positive");
    if (!(lambda >= 0))
        throw InputError("[physics] lambda must be non-negative");
    if (!(gamma > 2))
        throw InputError("[physics] gamma must exceed 2 (2D/1D regime)");
}

int SchemeParams::window_steps() const
{
    return static_cast<int>(std::lround(dt_window / dt_inner));
}

void SchemeParams::validate() const
{
    if (!(eps > 0 && eps < 0.5))
        throw InputError("[scheme] eps must lie in (0, 1/2)");
    if (!(delta > 0 && delta < 0.5))
        throw InputError("[scheme] delta must lie in (0, 1/2)");
    if (!(dt_inner > 0))
        throw InputError("[scheme] dt_inner must be positive");
    if (!(dt_window > 0))
        throw InputError("[scheme] dt_window must be positive");
    const double r = dt_window / dt_inner;
    if (r < 1 - 1e-9 || std::abs(r - std::round(r)) > 1e-9 * r)
        throw InputError("[scheme] dt_window must be an integer multiple of dt_inner");
    if (!(kappa_contact > 0))
        throw InputError("[scheme] kappa_contact must be positive");
    if (!(a_diff >= 0))
        throw InputError("[scheme] a_diff must be non-negative");
    if (!(b_reg >= 0))
        throw InputError("[scheme] b_reg must be non-negative");
    if (b_reg > 0 && beta_reg < 4)
        throw InputError("[scheme] beta_reg must be at least 4 when b_reg > 0");
    if (!(eta_floor > 0))
        throw InputError("[scheme] eta_floor must be positive");
    if (!(tol_penalty >= 0))
        throw InputError("[scheme] tol_penalty must be non-negative");
}

Field2 region_weights(Region region, const Field1& eta, const GridSpec& grid)
{
    const double dz = grid.dz(), area = grid.cell_area();
    Field2 w(grid.nx, grid.nz);
    if (region == Region::full) {
        w.setConstant(area);
        return w;
    }
    for (int i = 0; i < grid.nx; ++i) {
        if (region == Region::below_graph && eta(i) > grid.height_M) {
            std::ostringstream msg;
            msg << "graph leaves the extended domain: eta(" << grid.x(i) << ") = " << eta(i)
                << " > M = " << grid.height_M;
            throw InputError(msg.str());
        }
        for (int j = 0; j < grid.nz; ++j) {
            const double f = fraction_below(eta(i), j, dz);
            w(i, j) = area * (region == Region::below_graph ? f : 1.0 - f);
        }
    }
    return w;
}

double integrate_field(const Field2& f, Region region, const Field1& eta, const GridSpec& grid)
{
    return (f * region_weights(region, eta, grid)).sum();
}

Field1 beam_derivatives(const BeamState& beam, int order, double dx)
{
    return periodic_derivative(beam.eta, order, dx);
}

TraceStencil trace_stencil(const Field1& eta, const GridSpec& grid)
{
    const int nx = grid.nx, nz = grid.nz;
    const double dz = grid.dz();
    TraceStencil s;
    s.j_lo.resize(nx);
    s.j_hi.resize(nx);
    s.w_lo.resize(nx);
    s.w_hi.resize(nx);
    for (int i = 0; i < nx; ++i) {
        const double h = eta(i);
        if (!(h >= 0) || h > grid.height_M) {
            std::ostringstream msg;
            msg << "trace requested outside [0, M]: eta(" << grid.x(i) << ") = " << h;
            throw InputError(msg.str());
        }
        const double s_pos = h / dz - 0.5;
        if (s_pos <= 0) {
            // between the wall (value 0) and the first centre
            s.j_lo(i) = 0;
            s.j_hi(i) = 0;
            s.w_lo(i) = h / (0.5 * dz);
            s.w_hi(i) = 0;
        } else if (s_pos >= nz - 1) {
            s.j_lo(i) = nz - 1;
            s.j_hi(i) = nz - 1;
            s.w_lo(i) = 1;
            s.w_hi(i) = 0;
        } else {
            const int lo = static_cast<int>(std::floor(s_pos));
            const double t = s_pos - lo;
            s.j_lo(i) = lo;
            s.j_hi(i) = lo + 1;
            s.w_lo(i) = 1 - t;
            s.w_hi(i) = t;
        }
    }
    return s;
}

Field1 apply_stencil(const TraceStencil& s, const Field2& u)
{
    const Eigen::Index nx = s.j_lo.size();
    Field1 out(nx);
    for (Eigen::Index i = 0; i < nx; ++i)
        out(i) = s.w_lo(i) * u(i, s.j_lo(i)) + s.w_hi(i) * u(i, s.j_hi(i));
    return out;
}

Trace trace_velocity(const FluidState& fluid, const BeamState& beam, const GridSpec& grid)
{
    const TraceStencil s = trace_stencil(beam.eta, grid);
    return {apply_stencil(s, fluid.u1), apply_stencil(s, fluid.u3)};
}

}  // namespace pfsi
