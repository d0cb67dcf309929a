#ifndef PFSI_LEMMA_SUITE_HPP
#define PFSI_LEMMA_SUITE_HPP

#include "pfsi/core_state.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pfsi {

// pass <=> lhs <= constant * rhs + tolerance
struct LemmaTrial {
    std::string lemma;
    int trial = 0;
    std::string descriptor;
    double lhs = 0;
    double rhs = 0;
    double constant = 1;
    double tolerance = 0;
    bool pass = false;

    double margin() const { return constant * rhs + tolerance - lhs; }
};

// mean + sum_k a_k cos(2 pi k x / L) + b_k sin(2 pi k x / L)
struct PeriodicSeries {
    double L = 1;
    double mean = 0;
    std::vector<double> a, b;

    double value(double x, int order = 0) const;
    Field1 sample(int n, int order = 0) const;  // at cell centres (i + 1/2) L / n
    std::string describe() const;
};

// Velocity component on the region under a graph, in the coordinates
// (x, zeta) with z = zeta eta(x):
//   u = sum_{k, m} c(k, m) h_k(x) Z_m(zeta),
// h = [1, cos 1, sin 1, cos 2, ...]. clamped_both: Z_m = sin((m+1) pi zeta);
// clamped_bottom: Z_0 = zeta, Z_m = sin((m - 1/2) pi zeta).
struct ColumnSeries {
    enum class Base { clamped_both, clamped_bottom };
    Base base = Base::clamped_bottom;
    double L = 1;
    Eigen::MatrixXd c;  // (2K + 1) x M

    std::string describe() const;
};

struct MappedGrid {
    int nx = 256;
    int nzeta = 64;
};

// Physical values and derivatives of a field on the mapped grid (nx x nzeta),
// plus the trace on the graph.
struct MappedSample {
    Eigen::ArrayXXd u, ux, uz;
    Eigen::ArrayXd trace;
};

MappedSample sample_mapped(const ColumnSeries& u, const PeriodicSeries& eta, const MappedGrid& g);

using LemmaRng = std::mt19937_64;

// Band-limited random graph with min = lo and max = hi.
PeriodicSeries random_profile(LemmaRng& rng, double L, int modes, double lo, double hi);
ColumnSeries random_column(LemmaRng& rng, ColumnSeries::Base base, double L, int modes_x, int modes_z,
                           double amplitude);

// ||u||_{H^1}^2 <= C (1 + ||eta||_inf)^2 int S(grad u):grad u
LemmaTrial check_korn(const ColumnSeries& u1, const ColumnSeries& u3, const PeriodicSeries& eta,
                      const PhysParams& phys, const MappedGrid& g, double C);

// int S:grad u - mu ||grad u||^2 - (mu/3 + lambda) ||div u||^2 by quadrature
double korn_identity_gap(const ColumnSeries& u1, const ColumnSeries& u3, const PeriodicSeries& eta,
                         const PhysParams& phys, const MappedGrid& g);

// [0]: int |u(eta)|^2 / eta <= int int |d_z u|^2
// [1]: int int |u|^2 / eta^2 <= int int |d_z u|^2
// constant 1, tolerance dzeta * rhs
std::vector<LemmaTrial> check_weighted_trace(const ColumnSeries& u, const PeriodicSeries& eta, const MappedGrid& g);

// int |eta_x|^(2s) / eta^s <= C int |eta_xx|^s
LemmaTrial check_grad_log(const PeriodicSeries& eta, double s, int n, double C);

// max eta - min eta <= C ||eta_xx||_2
LemmaTrial check_max_min(const PeriodicSeries& eta, int n, double C);

// int ln(eta)^- phi <= lim int ln(eta_n)^- phi, with the limit estimated from
// the last two members; the tolerance is their difference.
LemmaTrial check_ln_semicontinuity(const Field1& eta, const std::vector<Field1>& sequence, const Field1& phi,
                                   double dx);

struct LemmaConstants {
    double korn = 0;
    double grad_log_s1 = 0;
    double grad_log_s2 = 0;
    double max_min = 0;
};

// Largest observed ratio over `trials` random trials at fine resolution,
// times the safety factor.
LemmaConstants calibrate_lemma_constants(std::uint64_t seed, int trials, const PhysParams& phys,
                                         double safety = 1.5);

struct LemmaReport {
    std::vector<LemmaTrial> trials;
    double korn_gap_coarse = 0;
    double korn_gap_fine = 0;
    double korn_order = 0;       // log2 of the gap ratio under one halving
    double max_l4_over_h1 = 0;   // ||u||_{L^4} / ||u||_{H^1}
    double max_trace_l4_over_h1 = 0;

    bool all_pass() const;
    int failures(const std::string& lemma) const;
};

// The full battery at default resolution with the frozen constants.
LemmaReport run_lemma_suite(std::uint64_t seed, int trials, const PhysParams& phys);

}  // namespace pfsi

#endif
