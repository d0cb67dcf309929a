#ifndef PFSI_CORE_STATE_HPP
#define PFSI_CORE_STATE_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pfsi {

template <typename Scalar>
using Field1T = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
// Indexed (i, j): i runs along x (periodic), j along z (0 = floor).
template <typename Scalar>
using Field2T = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Field1 = Field1T<double>;
using Field2 = Field2T<double>;

// Bad input (config values, out-of-domain geometry). Maps to exit code 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Solver blew up or left its domain of validity. Maps to exit code 2.
class NumericalAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    double length_L = 1.0;
    double height_M = 1.0;
    int nx = 256;
    int nz = 64;

    double dx() const { return length_L / nx; }
    double dz() const { return height_M / nz; }
    double x(int i) const { return (i + 0.5) * dx(); }
    double z(int j) const { return (j + 0.5) * dz(); }
    double cell_area() const { return dx() * dz(); }
    void validate() const;
};

struct PhysParams {
    double mu = 0.01;
    double lambda = 0.0;
    double gamma = 3.0;
    void validate() const;
};

struct SchemeParams {
    double eps = 0.1;
    double delta = 0.01;
    double dt_window = 2e-3;
    double dt_inner = 1e-3;
    double kappa_contact = 1e-4;
    double a_diff = 1e-4;
    double b_reg = 0.0;
    double beta_reg = 4.0;
    double eta_floor = 1e-12;
    double tol_penalty = 0.01;

    int window_steps() const;
    void validate() const;
};

struct FluidState {
    Field2 rho, u1, u3;

    FluidState() = default;
    FluidState(int nx, int nz)
        : rho(Field2::Zero(nx, nz)), u1(Field2::Zero(nx, nz)), u3(Field2::Zero(nx, nz)) {}
    bool finite() const { return rho.allFinite() && u1.allFinite() && u3.allFinite(); }
};

struct BeamState {
    Field1 eta, eta_t;

    BeamState() = default;
    explicit BeamState(int nx) : eta(Field1::Zero(nx)), eta_t(Field1::Zero(nx)) {}
    bool finite() const { return eta.allFinite() && eta_t.allFinite(); }
};

enum class Region { full, below_graph, above_graph };

// Fraction of cell (i, j) lying below the graph height h.
inline double fraction_below(double h, int j, double dz)
{
    return std::clamp((h - j * dz) / dz, 0.0, 1.0);
}

// Midpoint rule over the selected region; cut cells get fractional weights.
double integrate_field(const Field2& f, Region region, const Field1& eta, const GridSpec& grid);

// Quadrature weights (cell area times fraction) for the region.
Field2 region_weights(Region region, const Field1& eta, const GridSpec& grid);

// Centered periodic finite differences of order 1, 2 or 4.
template <typename Derived>
Field1T<typename Derived::Scalar> periodic_derivative(const Eigen::ArrayBase<Derived>& f, int order,
                                                      typename Derived::Scalar dx)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = f.size();
    Field1T<Scalar> out(n);
    auto at = [&](Eigen::Index i) { return f((i % n + n) % n); };
    switch (order) {
    case 1:
        for (Eigen::Index i = 0; i < n; ++i)
            out(i) = (at(i + 1) - at(i - 1)) / (2 * dx);
        break;
    case 2:
        // written as a difference of differences so constants give exact zeros
        for (Eigen::Index i = 0; i < n; ++i)
            out(i) = ((at(i + 1) - at(i)) - (at(i) - at(i - 1))) / (dx * dx);
        break;
    case 4: {
        // 5-point stencil applied as D2 D2
        const Field1T<Scalar> d2 = periodic_derivative(f, 2, dx);
        out = periodic_derivative(d2, 2, dx);
        break;
    }
    default:
        throw std::invalid_argument("derivative order must be 1, 2 or 4");
    }
    return out;
}

// Forward difference (f_{i+1} - f_i)/dx; D2 = -D+^T D+ in the periodic inner product.
template <typename Derived>
Field1T<typename Derived::Scalar> forward_difference(const Eigen::ArrayBase<Derived>& f,
                                                     typename Derived::Scalar dx)
{
    const Eigen::Index n = f.size();
    Field1T<typename Derived::Scalar> out(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out(i) = (f((i + 1) % n) - f(i)) / dx;
    return out;
}

Field1 beam_derivatives(const BeamState& beam, int order, double dx);

// Linear-in-z interpolation from the cell centres of column i to height eta_i.
// Below the first centre the value blends to the no-slip zero at z = 0; above
// the last centre it is held constant.
struct TraceStencil {
    Eigen::ArrayXi j_lo, j_hi;
    Field1 w_lo, w_hi;
};

TraceStencil trace_stencil(const Field1& eta, const GridSpec& grid);
Field1 apply_stencil(const TraceStencil& s, const Field2& u);

struct Trace {
    Field1 v1, v3;
};

Trace trace_velocity(const FluidState& fluid, const BeamState& beam, const GridSpec& grid);

}  // namespace pfsi

#endif
