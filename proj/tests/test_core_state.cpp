#include "doctest.h"

#include "pfsi/core_state.hpp"

#include <cmath>

using namespace pfsi;

namespace {

GridSpec unit_grid(int nx = 32, int nz = 16)
{
    GridSpec g;
    g.length_L = 1.0;
    g.height_M = 1.0;
    g.nx = nx;
    g.nz = nz;
    return g;
}

Field2 sample(const GridSpec& g, double (*f)(double, double))
{
    Field2 out(g.nx, g.nz);
    for (int j = 0; j < g.nz; ++j)
        for (int i = 0; i < g.nx; ++i)
            out(i, j) = f(g.x(i), g.z(j));
    return out;
}

double sin_mode(const GridSpec& g, int i) { return std::sin(2 * M_PI * g.x(i) / g.length_L); }

}  // namespace

TEST_CASE("integrate_field basic regions")
{
    const GridSpec g = unit_grid();
    const Field2 one = Field2::Ones(g.nx, g.nz);
    const Field1 half = Field1::Constant(g.nx, 0.5);
    CHECK(integrate_field(one, Region::full, half, g) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(integrate_field(2 * one, Region::below_graph, half, g) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("integrate_field of z below a flat graph converges to h^2/2")
{
    const double h = 0.37;
    double prev_err = 0;
    for (int level = 0; level < 3; ++level) {
        const GridSpec g = unit_grid(16, 16 << level);
        const Field2 z = sample(g, [](double, double zz) { return zz; });
        const double got = integrate_field(z, Region::below_graph, Field1::Constant(g.nx, h), g);
        const double err = std::abs(got - h * h / 2);
        CHECK(err < g.dz() * g.dz());
        if (level > 0)
            CHECK(err <= prev_err);
        prev_err = err;
    }
}

TEST_CASE("below + above = full for a wavy graph")
{
    const GridSpec g = unit_grid(40, 24);
    Field1 eta(g.nx);
    for (int i = 0; i < g.nx; ++i)
        eta(i) = 0.4 + 0.3 * sin_mode(g, i);
    const Field2 f = sample(g, [](double x, double z) { return std::exp(x) * (1 + z * z); });
    const double b = integrate_field(f, Region::below_graph, eta, g);
    const double a = integrate_field(f, Region::above_graph, eta, g);
    const double full = integrate_field(f, Region::full, eta, g);
    CHECK(std::abs(a + b - full) < 1e-14 * full);
}

TEST_CASE("below_graph rejects graphs leaving the domain")
{
    const GridSpec g = unit_grid();
    CHECK_THROWS_AS(integrate_field(Field2::Ones(g.nx, g.nz), Region::below_graph,
                                    Field1::Constant(g.nx, 1.5), g),
                    InputError);
}

TEST_CASE("beam derivatives: constants, accuracy and convergence")
{
    for (int order : {1, 2, 4}) {
        const Field1 c = Field1::Constant(16, 3.25);
        CHECK(periodic_derivative(c, order, 0.1).abs().maxCoeff() == 0.0);
    }
    const double L = 1.0;
    const double k = 2 * M_PI / L;
    for (int order : {2, 4}) {
        double prev = 0;
        for (int level = 0; level < 3; ++level) {
            const GridSpec g = unit_grid(32 << level, 8);
            BeamState b(g.nx);
            Field1 exact(g.nx);
            for (int i = 0; i < g.nx; ++i) {
                b.eta(i) = sin_mode(g, i);
                exact(i) = (order == 2 ? -k * k : k * k * k * k) * sin_mode(g, i);
            }
            const double err = (beam_derivatives(b, order, g.dx()) - exact).abs().maxCoeff();
            if (level > 0)
                CHECK(prev / err >= 3.5);
            prev = err;
        }
    }
}

TEST_CASE("derivative stencils are linear and self-adjoint")
{
    const int n = 24;
    const double dx = 1.0 / n;
    Field1 f(n), g(n);
    for (int i = 0; i < n; ++i) {
        f(i) = std::cos(0.3 * i) + 0.1 * (i % 3);
        g(i) = std::sin(1.7 * i) * (i % 5);
    }
    const Field1 lhs = periodic_derivative(Field1(2.0 * f + 3.0 * g), 2, dx);
    const Field1 rhs = 2.0 * periodic_derivative(f, 2, dx) + 3.0 * periodic_derivative(g, 2, dx);
    CHECK((lhs - rhs).abs().maxCoeff() <= 1e-9 * rhs.abs().maxCoeff());
    const double a = (f * periodic_derivative(g, 2, dx)).sum() * dx;
    const double b = (periodic_derivative(f, 2, dx) * g).sum() * dx;
    CHECK(std::abs(a - b) <= 1e-12 * (std::abs(a) + 1));
    // D4 = D2 D2 and sum D4 = 0
    const Field1 d22 = periodic_derivative(periodic_derivative(f, 2, dx), 2, dx);
    const Field1 d4 = periodic_derivative(f, 4, dx);
    CHECK((d22 - d4).abs().maxCoeff() <= 1e-9 * d4.abs().maxCoeff());
    CHECK(std::abs(d4.sum()) * dx <= 1e-12 * d4.abs().sum() * dx);
}

TEST_CASE("trace velocity")
{
    const GridSpec g = unit_grid(16, 32);
    FluidState f(g.nx, g.nz);
    BeamState b(g.nx);
    b.eta.setConstant(0.3);
    Trace t = trace_velocity(f, b, g);
    CHECK(t.v1.abs().maxCoeff() == 0.0);
    CHECK(t.v3.abs().maxCoeff() == 0.0);

    f.u3 = sample(g, [](double, double z) { return z; });
    for (double h : {0.3, 0.01, 0.5 * g.dz(), 0.77}) {
        b.eta.setConstant(h);
        t = trace_velocity(f, b, g);
        CHECK((t.v3 - h).abs().maxCoeff() < 1e-14);
    }

    f.u1.setConstant(1.0);
    f.u3.setConstant(1.0);
    b.eta.setConstant(0.5);
    b.eta(3) = 0.0;
    t = trace_velocity(f, b, g);
    CHECK(t.v1(3) == 0.0);
    CHECK(t.v3(3) == 0.0);

    b.eta(3) = 1.2;
    CHECK_THROWS_AS(trace_velocity(f, b, g), InputError);
}

TEST_CASE("parameter validation")
{
    PhysParams p;
    p.gamma = 1.5;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("gamma must exceed 2 (2D/1D regime)"), InputError);
    SchemeParams s;
    s.dt_window = 0.1;
    s.dt_inner = 0.03;
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("dt_window must be an integer multiple of dt_inner"),
                         InputError);
    s.dt_inner = 0.025;
    CHECK_NOTHROW(s.validate());
    CHECK(s.window_steps() == 4);
    GridSpec gr;
    gr.nx = 4;
    CHECK_THROWS_AS(gr.validate(), InputError);
}
